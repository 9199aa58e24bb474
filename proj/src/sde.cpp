#include "msle/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msle/errors.hpp"
#include "msle/rng.hpp"

namespace msle::sde {

namespace {

constexpr double kSubstepFloorFactor = 9.5367431640625e-7;  // 2^-20

double min_gap(std::span<const double> x) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < x.size(); ++i) g = std::min(g, x[i] - x[i - 1]);
  return g;
}

bool strictly_increasing(std::span<const double> x) {
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) return false;
  return true;
}

double machine_gap_floor(std::span<const double> x) {
  double scale = 1.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  return 64.0 * std::numeric_limits<double>::epsilon() * scale;
}

} // namespace

double SdeParams::guard() const {
  if (collision_guard > 0.0) return collision_guard;
  if (initial_positions.size() < 2) return 1e-8;
  const double mean_gap =
      (initial_positions.back() - initial_positions.front()) /
      static_cast<double>(initial_positions.size() - 1);
  return 1e-4 * mean_gap;
}

void SdeParams::validate() const {
  if (initial_positions.empty()) throw DegenerateInput("no initial positions");
  if (!strictly_increasing(initial_positions))
    throw DegenerateInput("initial positions must be strictly increasing");
  if (!(kappa > 0.0) || kappa > 8.0) throw DegenerateInput("kappa must lie in (0, 8]");
  if (!(dt > 0.0)) throw DegenerateInput("dt must be positive");
  if (!(horizon > 0.0) || dt >= horizon) throw DegenerateInput("need 0 < dt < horizon");
  if (collision_guard < 0.0) throw DegenerateInput("collision_guard must be positive");
}

double DrivingPaths::value(int i, double t) const {
  if (times.empty()) return 0.0;
  if (t <= times.front()) return at(0, i);
  if (t >= times.back()) return at(times.size() - 1, i);
  const double dt = params.dt;
  auto k = static_cast<std::size_t>(t / dt);
  if (k + 1 >= times.size()) k = times.size() - 2;
  while (k + 1 < times.size() - 1 && times[k + 1] < t) ++k;
  while (k > 0 && times[k] > t) --k;
  const double f = (t - times[k]) / (times[k + 1] - times[k]);
  return (1.0 - f) * at(k, i) + f * at(k + 1, i);
}

void DrivingPaths::value_all(double t, std::span<double> out) const {
  for (int i = 0; i < n_particles; ++i) out[i] = value(i, t);
}

namespace {

// One stored grid interval of the guarded Euler-Maruyama scheme shared by the
// Dyson and flow-line systems. `drift` fills dx for state x; `noise_of` gives
// the diffusion coefficient per coordinate (0 for deterministic force points).
template <typename DriftFn, typename NoiseFn>
void integrate_interval(std::vector<double>& x, double dt, double guard, CounterRng& rng,
                        DriftFn&& drift, NoiseFn&& noise_of, std::vector<double>& scratch,
                        std::vector<double>& proposal) {
  const double h_floor = dt * kSubstepFloorFactor;
  double remaining = dt;
  while (remaining > 0.0) {
    const double g = min_gap(x);
    double h = remaining;
    if (x.size() > 1 && g < guard) {
      // keep diffusive and drift displacement well under the smallest gap
      const double cap = g * g / 16.0;
      while (h > h_floor && h > cap) h *= 0.5;
    }
    int rejects = 0;
    for (;;) {
      drift(x, scratch);
      bool ok = true;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double dW = std::sqrt(h) * rng.gauss() * noise_of(i);
        proposal[i] = x[i] + scratch[i] * h + dW;
      }
      if (x.size() > 1) {
        ok = strictly_increasing(proposal) && min_gap(proposal) > machine_gap_floor(proposal);
      }
      if (ok) {
        x = proposal;
        remaining -= h;
        break;
      }
      if (h <= h_floor) {
        if (min_gap(x) < std::max(machine_gap_floor(x), 4.0 * std::sqrt(h_floor)) ||
            ++rejects > 64)
          throw GapCollapse("adaptive refinement bottomed out without restoring the gap");
        continue;  // gap still healthy: reject the extreme draw and retry at the floor
      }
      h *= 0.5;
    }
  }
}

} // namespace

DrivingPaths simulate_dyson(const SdeParams& params, std::uint64_t path_id) {
  params.validate();
  const int n = params.n();
  const auto n_steps = static_cast<std::size_t>(std::llround(params.horizon / params.dt));
  CounterRng rng(params.seed, path_id);

  DrivingPaths out;
  out.n_particles = n;
  out.params = params;
  out.kind = DriverKind::dyson;
  out.times.reserve(n_steps + 1);
  out.values.reserve((n_steps + 1) * n);

  std::vector<double> x = params.initial_positions;
  std::vector<double> scratch(n), proposal(n);
  const double guard = params.guard();
  const double sqk = std::sqrt(params.kappa);

  out.times.push_back(0.0);
  out.values.insert(out.values.end(), x.begin(), x.end());

  auto drift = [](const std::vector<double>& s, std::vector<double>& d) {
    const int m = static_cast<int>(s.size());
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j)
        if (j != i) acc += 4.0 / (s[i] - s[j]);
      d[i] = acc;
    }
  };
  auto noise = [sqk](std::size_t) { return sqk; };

  for (std::size_t k = 1; k <= n_steps; ++k) {
    integrate_interval(x, params.dt, guard, rng, drift, noise, scratch, proposal);
    out.times.push_back(static_cast<double>(k) * params.dt);
    out.values.insert(out.values.end(), x.begin(), x.end());
  }
  return out;
}

DrivingPaths constant_paths(std::span<const double> positions, double dt, double horizon) {
  DrivingPaths out;
  out.n_particles = static_cast<int>(positions.size());
  out.kind = DriverKind::constant;
  out.params.initial_positions.assign(positions.begin(), positions.end());
  out.params.dt = dt;
  out.params.horizon = horizon;
  const auto n_steps = static_cast<std::size_t>(std::llround(horizon / dt));
  for (std::size_t k = 0; k <= n_steps; ++k) {
    out.times.push_back(static_cast<double>(k) * dt);
    out.values.insert(out.values.end(), positions.begin(), positions.end());
  }
  return out;
}

FlowLineDriving simulate_flowline_driver(int index, const SdeParams& params,
                                         std::uint64_t path_id) {
  params.validate();
  const int n = params.n();
  if (index < 0 || index >= n) throw DegenerateInput("flow-line index out of range");
  const auto n_steps = static_cast<std::size_t>(std::llround(params.horizon / params.dt));
  CounterRng rng(params.seed, path_id);

  // combined ordered state: all positions, with the xi coordinate at `index`
  std::vector<double> x = params.initial_positions;
  std::vector<double> scratch(n), proposal(n);
  const double guard = params.guard();
  const double sqk = std::sqrt(params.kappa);

  auto drift = [index](const std::vector<double>& s, std::vector<double>& d) {
    const int m = static_cast<int>(s.size());
    for (int i = 0; i < m; ++i) {
      if (i == index) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j)
          if (j != index) acc += 2.0 / (s[index] - s[j]);
        d[i] = acc;
      } else {
        d[i] = 2.0 / (s[i] - s[index]);
      }
    }
  };
  auto noise = [index, sqk](std::size_t i) {
    return static_cast<int>(i) == index ? sqk : 0.0;
  };

  FlowLineDriving out;
  out.index = index;
  out.params = params;
  out.times.reserve(n_steps + 1);
  out.xi.reserve(n_steps + 1);
  out.zeta.assign(n - 1, {});

  auto record = [&](double t) {
    out.times.push_back(t);
    out.xi.push_back(x[index]);
    int z = 0;
    for (int i = 0; i < n; ++i) {
      if (i == index) continue;
      out.zeta[z++].push_back(x[i]);
    }
  };
  record(0.0);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    integrate_interval(x, params.dt, guard, rng, drift, noise, scratch, proposal);
    record(static_cast<double>(k) * params.dt);
  }
  return out;
}

DrivingPaths FlowLineDriving::xi_as_paths() const {
  DrivingPaths out;
  out.n_particles = 1;
  out.kind = DriverKind::flowline;
  out.flowline_index = index;
  out.times = times;
  out.values = xi;
  out.params = params;
  out.params.initial_positions = {xi.front()};
  return out;
}

BesselPath simulate_bessel(double dim, double start, double dt, double horizon,
                           std::uint64_t seed, std::uint64_t path_id) {
  if (dim < 1.0) throw DegenerateInput("Bessel dimension must be >= 1");
  if (!(start > 0.0)) throw DegenerateInput("Bessel start must be positive");
  const auto n_steps = static_cast<std::size_t>(std::llround(horizon / dt));
  CounterRng rng(seed, path_id);

  BesselPath out;
  out.dim = dim;
  out.seed = seed;
  out.times.reserve(n_steps + 1);
  out.trajectory.reserve(n_steps + 1);
  out.times.push_back(0.0);
  out.trajectory.push_back(start);

  const double nu = 0.5 * (dim - 1.0);
  // deep floor: the positivity scheme must outlast excursions toward 0
  const double h_floor = dt * 9.094947017729282e-13;  // 2^-40
  const double r_floor = std::max(1e-12, 1e-8 * start);
  double r = start;

  for (std::size_t k = 1; k <= n_steps; ++k) {
    double remaining = dt;
    while (remaining > 0.0) {
      double h = std::min(remaining, std::max(h_floor, r * r / 16.0));
      for (;;) {
        const double prop = r + nu / r * h + std::sqrt(h) * rng.gauss();
        if (prop > r_floor) {
          r = prop;
          remaining -= h;
          break;
        }
        if (h <= h_floor) {
          if (!out.hit_zero) {
            out.hit_zero = true;
            out.first_hit_time = static_cast<double>(k - 1) * dt + (dt - remaining);
          }
          // reflect: the guard floor only matters for dim < 2 diagnostics
          r = std::max(r_floor, std::abs(prop));
          remaining -= h;
          break;
        }
        h *= 0.5;
      }
    }
    out.times.push_back(static_cast<double>(k) * dt);
    out.trajectory.push_back(r);
  }
  return out;
}

std::vector<double> drift_direct(std::span<const double> positions) {
  const int n = static_cast<int>(positions.size());
  for (int i = 1; i < n; ++i)
    if (positions[i] == positions[i - 1]) throw DegenerateInput("coincident positions");
  std::vector<double> d(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) {
        const double diff = positions[i] - positions[j];
        if (diff == 0.0) throw DegenerateInput("coincident positions");
        acc += 4.0 / diff;
      }
    d[i] = acc;
  }
  return d;
}

std::vector<double> drift_partition(std::span<const double> positions, double kappa) {
  const int n = static_cast<int>(positions.size());
  std::vector<double> d(n, 0.0);
  // kappa * d/dx_i log Z + sum 2/(x_i-x_j),  Z = prod |x_i-x_j|^(2/kappa)
  for (int i = 0; i < n; ++i) {
    double dlogz = 0.0;
    double pair_sum = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) {
        const double diff = positions[i] - positions[j];
        if (diff == 0.0) throw DegenerateInput("coincident positions");
        dlogz += (2.0 / kappa) / diff;
        pair_sum += 2.0 / diff;
      }
    d[i] = kappa * dlogz + pair_sum;
  }
  return d;
}

} // namespace msle::sde
