#include "msle/loewner.hpp"

#include <algorithm>
#include <cmath>

#include "msle/errors.hpp"

namespace msle::loewner {

namespace {

// drivers at time t into buf; returns min distance from g to any driver
double fill_and_dist(const sde::DrivingPaths& d, double t, cplx g, std::vector<double>& buf) {
  d.value_all(t, buf);
  double dist = 1e300;
  for (double x : buf) dist = std::min(dist, std::abs(g - x));
  return dist;
}

// sum of 2/(g - x) with the division written out explicitly; negating the
// real parts then flips every term exactly in IEEE arithmetic, which makes
// mirrored drivers produce bit-exact mirrored flows (N = 2)
cplx loewner_rhs(cplx g, std::span<const double> drivers) {
  double re = 0.0, im = 0.0;
  for (double x : drivers) {
    const double a = g.real() - x;
    const double b = g.imag();
    const double den = a * a + b * b;
    re += 2.0 * a / den;
    im -= 2.0 * b / den;
  }
  return {re, im};
}

} // namespace

LoewnerState::LoewnerState(const sde::DrivingPaths& drivers) : drivers_(&drivers) {}

void LoewnerState::track(cplx z0) { pts_.push_back({z0, z0, true, std::nullopt}); }

void LoewnerState::track(std::span<const cplx> z0s) {
  for (cplx z : z0s) track(z);
}

void LoewnerState::advance(double until) {
  const auto& drv = *drivers_;
  const double dt = drv.params.dt;
  until = std::min(until, drv.horizon());
  if (until <= t_) return;
  const double thr = swallow_threshold(dt);
  const int n = drv.n_particles;
  std::vector<double> xs(n), xm(n);

  for (auto& p : pts_) {
    if (!p.alive) continue;
    double t = t_;
    cplx g = p.g;
    while (t < until - 1e-15) {
      double dist = fill_and_dist(drv, t, g, xs);
      if (dist < thr) {
        p.alive = false;
        p.tau = t;
        break;
      }
      double h = std::min(until - t, dt);
      const double cap = dist * dist / (16.0 * n);
      h = std::min(h, std::max(cap, dt * 9.5367431640625e-7));
      const cplx k1 = loewner_rhs(g, xs);
      drv.value_all(t + 0.5 * h, xm);
      const cplx k2 = loewner_rhs(g + 0.5 * h * k1, xm);
      g += h * k2;
      t += h;
      if (g.imag() <= 0.0) {
        p.alive = false;
        p.tau = t;
        break;
      }
    }
    if (p.alive) p.g = g;
  }
  hcap_ += 2.0 * n * (until - t_);
  t_ = until;
}

FlowSample flow_with_deriv(const sde::DrivingPaths& drivers, cplx z, double t) {
  const double dt = drivers.params.dt;
  const double thr = swallow_threshold(dt);
  const int n = drivers.n_particles;
  std::vector<double> xs(n), xm(n);
  FlowSample s{z, 0.0, true, std::nullopt};
  double tc = 0.0;
  t = std::min(t, drivers.horizon());
  while (tc < t - 1e-15) {
    double dist = fill_and_dist(drivers, tc, s.g, xs);
    if (dist < thr || s.g.imag() <= 0.0) {
      s.alive = false;
      s.tau = tc;
      return s;
    }
    double h = std::min(t - tc, dt);
    h = std::min(h, std::max(dist * dist / (16.0 * n), dt * 9.5367431640625e-7));
    // d/dt log g' = -sum 2/(g - X)^2
    auto rhs = [&](cplx g, std::span<const double> x) {
      cplx v = 0.0, dl = 0.0;
      for (double xi : x) {
        const cplx q = g - xi;
        v += 2.0 / q;
        dl -= 2.0 / (q * q);
      }
      return std::pair{v, dl};
    };
    const auto [k1v, k1d] = rhs(s.g, xs);
    drivers.value_all(tc + 0.5 * h, xm);
    const auto [k2v, k2d] = rhs(s.g + 0.5 * h * k1v, xm);
    s.g += h * k2v;
    s.log_deriv += h * k2d;
    tc += h;
  }
  return s;
}

conformal::MapChain flow_chain(const sde::DrivingPaths& drivers, double t) {
  conformal::MapChain chain;
  const double dt = drivers.params.dt;
  const int n = drivers.n_particles;
  const auto n_steps = static_cast<std::size_t>(std::llround(std::min(t, drivers.horizon()) / dt));
  for (std::size_t k = 0; k < n_steps; ++k) {
    for (int i = 0; i < n; ++i) {
      // anchor each slit at the image of the driver under the chain so far
      double u = drivers.at(k, i);
      for (const auto& e : chain.elements) u = e.map(cplx(u, 0.0)).real();
      chain.push(conformal::SlitElement::from_cap(u, 2.0 * dt));
    }
  }
  return chain;
}

cplx trace_tip(const sde::DrivingPaths& drivers, int index, double t, double eps,
               double blowup_radius) {
  if (!(eps > 0.0)) throw ReverseBlowup("trace eps must be positive");
  const double dt = drivers.params.dt;
  const int n = drivers.n_particles;
  t = std::min(t, drivers.horizon());

  double guard = blowup_radius;
  if (guard <= 0.0) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t k = 0; k < drivers.steps(); ++k)
      for (int i = 0; i < n; ++i) {
        lo = std::min(lo, drivers.at(k, i));
        hi = std::max(hi, drivers.at(k, i));
      }
    guard = 4.0 * (hi - lo) + 16.0 * (1.0 + std::sqrt(2.0 * n * t));
  }

  std::vector<double> xs(n), xm(n);
  cplx z(drivers.value(index, t), 0.0);
  z += cplx(0.0, eps);
  double s = 0.0;
  const double h_floor = dt * 9.5367431640625e-7;
  while (s < t - 1e-15) {
    double dist = fill_and_dist(drivers, t - s, z, xs);
    double h = std::min(t - s, dt);
    h = std::min(h, std::max(dist * dist / (16.0 * n), h_floor));
    const cplx k1 = -loewner_rhs(z, xs);
    drivers.value_all(t - s - 0.5 * h, xm);
    const cplx k2 = -loewner_rhs(z + 0.5 * h * k1, xm);
    z += h * k2;
    s += h;
    if (z.imag() <= 0.0 || std::abs(z) > guard)
      throw ReverseBlowup("reverse flow left the guard box (eps too small for dt)");
  }
  return z;
}

std::vector<Trace> full_traces(const sde::DrivingPaths& drivers, double t_max, int n_out,
                               const TraceOptions& opts) {
  const double dt = drivers.params.dt;
  const double eps = opts.eps > 0.0 ? opts.eps : 4.0 * std::sqrt(dt);
  t_max = std::min(t_max, drivers.horizon());
  std::vector<Trace> traces(drivers.n_particles);
  for (int i = 0; i < drivers.n_particles; ++i) {
    auto& tr = traces[i];
    tr.index = i;
    tr.times.reserve(n_out + 1);
    tr.points.reserve(n_out + 1);
    tr.times.push_back(0.0);
    tr.points.push_back(cplx(drivers.at(0, i), 0.0));
    tr.eps_used.push_back(eps);
    for (int k = 1; k <= n_out; ++k) {
      const double t = t_max * static_cast<double>(k) / n_out;
      cplx tip = trace_tip(drivers, i, t, eps, opts.blowup_radius);
      if (opts.richardson) {
        const cplx tip2 = trace_tip(drivers, i, t, 0.5 * eps, opts.blowup_radius);
        tip = 2.0 * tip2 - tip;
      }
      tr.times.push_back(t);
      tr.points.push_back(tip);
      tr.eps_used.push_back(opts.richardson ? 0.5 * eps : eps);
    }
  }
  return traces;
}

SwallowGridResult swallow_grid(const sde::DrivingPaths& drivers, double t,
                               std::span<const cplx> grid) {
  SwallowGridResult out;
  out.grid.assign(grid.begin(), grid.end());
  out.swallowed.assign(grid.size(), 0);
  out.tau.assign(grid.size(), 0.0);
  LoewnerState st(drivers);
  st.track(grid);
  st.advance(t);
  const auto& pts = st.points();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (!pts[k].alive) {
      out.swallowed[k] = 1;
      out.tau[k] = pts[k].tau.value_or(t);
    }
  }
  return out;
}

} // namespace msle::loewner
