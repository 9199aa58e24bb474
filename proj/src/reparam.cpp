#include "msle/reparam.hpp"

#include <algorithm>
#include <cmath>

#include "msle/errors.hpp"

namespace msle::reparam {

namespace {

// union zipper over several curves in index order; returns the final driving
// value of each curve's tip under the full combined chain
struct UnionZip {
  conformal::MapChain chain;
  std::vector<double> tips;     // per curve, mapped through the full chain
  bool self_touch = false;
};

UnionZip union_zipper(const CurveFamily& family, const std::vector<double>& s) {
  UnionZip out;
  const int n = family.n();
  std::vector<double> beta(n, 0.0);
  std::vector<std::size_t> elems_after(n, 0);
  for (int j = 0; j < n; ++j) {
    const auto pts = family.prefix(j, s[j]);
    double b = out.chain.empty() ? pts.front().real()
                                 : out.chain.apply_unchecked(pts.front()).real();
    for (std::size_t k = 1; k < pts.size(); ++k) {
      cplx w = out.chain.apply_unchecked(pts[k]);
      cplx rel = w - b;
      if (rel.imag() <= 0.0) {
        if (rel.imag() < -1e-7 * std::max(1.0, std::abs(rel))) {
          out.self_touch = true;  // separated from infinity: drop the point
          continue;
        }
        rel = cplx(rel.real(), 0.0);
        if (std::abs(rel.real()) < 1e-14) continue;
      }
      const auto e = conformal::SlitElement::from_target(b, rel);
      out.chain.push(e);
      b = e.tip_image();
    }
    beta[j] = b;
    elems_after[j] = out.chain.elements.size();
  }
  // push each tip through the elements appended after its curve
  out.tips.resize(n);
  for (int j = 0; j < n; ++j) {
    double x = beta[j];
    for (std::size_t k = elems_after[j]; k < out.chain.elements.size(); ++k)
      x = out.chain.elements[k].map(cplx(x, 0.0)).real();
    out.tips[j] = x;
  }
  return out;
}

} // namespace

cplx CurveFamily::point(int i, double s) const {
  const auto& tr = curves[i];
  if (s <= 0.0) return tr.points.front();
  if (s > tr.times.back() * (1.0 + 1e-12)) throw CurveExhausted("curve parameter past stored extent");
  const auto it = std::upper_bound(tr.times.begin(), tr.times.end(), s);
  if (it == tr.times.end()) return tr.points.back();
  const auto k = static_cast<std::size_t>(it - tr.times.begin());
  if (k == 0) return tr.points.front();
  const double f = (s - tr.times[k - 1]) / (tr.times[k] - tr.times[k - 1]);
  return (1.0 - f) * tr.points[k - 1] + f * tr.points[k];
}

std::vector<cplx> CurveFamily::prefix(int i, double s) const {
  const auto& tr = curves[i];
  std::vector<cplx> out;
  out.push_back(tr.points.front());
  if (s <= 0.0) return out;
  for (std::size_t k = 1; k < tr.points.size() && tr.times[k] < s; ++k)
    out.push_back(tr.points[k]);
  const cplx tip = point(i, s);
  if (std::abs(tip - out.back()) > 1e-14) out.push_back(tip);
  return out;
}

CurveFamily family_from_flowlines(const sde::SdeParams& params, const FamilyOptions& opts,
                                  std::uint64_t path_id) {
  params.validate();
  const int n = params.n();
  CurveFamily fam;
  fam.kappa = params.kappa;
  fam.start_positions = params.initial_positions;
  fam.curves.resize(n);
  fam.seeds.resize(n);

  sde::SdeParams p = params;
  p.dt = opts.sde_dt;
  p.horizon = opts.s_extent * 1.02 + 2.0 * opts.sde_dt;

  for (int i = 0; i < n; ++i) {
    const auto stream = path_id * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(i);
    fam.seeds[i] = stream;
    const auto fl = sde::simulate_flowline_driver(i, p, stream);
    const auto drv = fl.xi_as_paths();
    auto& tr = fam.curves[i];
    tr.index = i;
    tr.times.push_back(0.0);
    tr.points.push_back(cplx(params.initial_positions[i], 0.0));
    tr.eps_used.push_back(0.0);
    const double eps = 4.0 * std::sqrt(opts.sde_dt);
    // quadratic grid in s: roughly uniform spacing in the plane
    for (int k = 1; k <= opts.points_per_curve; ++k) {
      const double f = static_cast<double>(k) / opts.points_per_curve;
      const double s = opts.s_extent * f * f;
      cplx tip = loewner::trace_tip(drv, 0, s, eps);
      if (opts.richardson) {
        const cplx tip2 = loewner::trace_tip(drv, 0, s, 0.5 * eps);
        tip = 2.0 * tip2 - tip;
      }
      tr.times.push_back(s);
      tr.points.push_back(tip);
      tr.eps_used.push_back(opts.richardson ? 0.5 * eps : eps);
    }
  }
  return fam;
}

double combined_capacity(const CurveFamily& family, const std::vector<double>& s,
                         bool* self_touch) {
  const auto uz = union_zipper(family, s);
  if (self_touch) *self_touch = uz.self_touch;
  return uz.chain.total_cap;
}

double capacity_partial(const CurveFamily& family, const std::vector<double>& s, int i,
                        PartialMethod method, PartialDiag* diag) {
  const int n = family.n();
  for (int j = 0; j < n; ++j)
    if (s[j] > family.extent(j) * (1.0 + 1e-12))
      throw CurveExhausted("curve parameter past stored extent");

  if (method == PartialMethod::finite_diff) {
    const double scale = std::max(s[i], 1e-3 * family.extent(i));
    const double d = 1e-3 * scale;
    auto sv = s;
    if (s[i] >= d && s[i] + d <= family.extent(i)) {
      sv[i] = s[i] + d;
      const double hi = combined_capacity(family, sv, nullptr);
      sv[i] = s[i] - d;
      const double lo = combined_capacity(family, sv, nullptr);
      return (hi - lo) / (2.0 * d);
    }
    sv[i] = std::min(s[i] + d, family.extent(i));
    const double hi = combined_capacity(family, sv, nullptr);
    const double dd = sv[i] - s[i];
    if (dd <= 0.0) throw CurveExhausted("no room for a finite-difference step");
    return (hi - combined_capacity(family, s, nullptr)) / dd;
  }

  // fprime: f = map-out of g_i(other hulls), evaluated at curve i's own
  // driving value (Eq.-15 style decomposition of the combined map)
  const auto own_pts = family.prefix(i, s[i]);
  double xi_i;
  conformal::MapChain own;
  {
    const auto zr = conformal::map_out_curve(own_pts);
    own = std::move(zr.chain);
    xi_i = zr.tip_position;
    if (diag && zr.self_touch) diag->self_touch = true;
  }

  conformal::MapChain f;
  bool touched = false;
  for (int j = 0; j < n && !touched; ++j) {
    if (j == i || s[j] <= 0.0) continue;
    const auto pts = family.prefix(j, s[j]);
    std::vector<cplx> img(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k)
      img[k] = f.apply_unchecked(own.apply_unchecked(pts[k]));
    double b = img.front().real();
    for (std::size_t k = 1; k < img.size(); ++k) {
      cplx rel = img[k] - b;
      if (rel.imag() <= 0.0) {
        if (rel.imag() < -1e-7 * std::max(1.0, std::abs(rel))) {
          touched = true;
          break;
        }
        rel = cplx(rel.real(), 0.0);
        if (std::abs(rel.real()) < 1e-14) continue;
      }
      const auto e = conformal::SlitElement::from_target(b, rel);
      f.push(e);
      b = e.tip_image();
    }
  }

  if (!touched) {
    try {
      const double d = f.boundary_derivative(xi_i, 1e-7);
      return 2.0 * d * d;
    } catch (const AtFoot&) {
      touched = true;
    }
  }
  if (diag) diag->touch_degenerate = true;
  return capacity_partial(family, s, i, PartialMethod::finite_diff, diag);
}

ReparamSolution solve_reparam(const CurveFamily& family, double horizon,
                              const SolveOptions& opts) {
  const int n = family.n();
  ReparamSolution sol;
  std::vector<double> s(n, 0.0);

  auto rhs = [&](const std::vector<double>& sv, std::vector<double>& out) {
    for (int i = 0; i < n; ++i) {
      PartialDiag diag;
      const double p = capacity_partial(family, sv, i, opts.method, &diag);
      if (diag.touch_degenerate || diag.self_touch) ++sol.touch_events;
      if (p < opts.partial_floor)
        throw DerivativeBlowup("capacity partial fell below the positivity floor");
      out[i] = 2.0 / p;
    }
  };

  auto record = [&](double t) {
    const auto uz = union_zipper(family, s);
    sol.times.push_back(t);
    sol.s_of_t.push_back(s);
    sol.tilde_x.push_back(uz.tips);
    sol.combined_cap.push_back(uz.chain.total_cap);
  };

  record(0.0);
  std::vector<double> k1(n), k2(n), smid(n);
  double t = 0.0;
  while (t < horizon - 1e-12) {
    const double h = std::min(opts.dt, horizon - t);
    bool exhausted = false;
    try {
      rhs(s, k1);
      for (int i = 0; i < n; ++i) smid[i] = s[i] + 0.5 * h * k1[i];
      rhs(smid, k2);
      for (int i = 0; i < n; ++i) {
        s[i] += h * k2[i];
        if (s[i] > family.extent(i)) exhausted = true;
      }
    } catch (const CurveExhausted&) {
      exhausted = true;
    }
    if (exhausted) {
      sol.partial = true;
      break;
    }
    t += h;
    record(t);
  }
  return sol;
}

WeakCheckReport weak_solution_check(const std::vector<ReparamSolution>& ensemble_a,
                                    const std::vector<std::vector<double>>& dyson_at_t,
                                    double kappa, double t, double ks_level) {
  WeakCheckReport rep;
  if (ensemble_a.empty() || dyson_at_t.empty()) return rep;
  const int n = static_cast<int>(dyson_at_t.front().size());

  auto value_at = [&](const ReparamSolution& sol, int i) {
    // linear interpolation of tilde X at time t
    const auto& ts = sol.times;
    if (t >= ts.back()) return sol.tilde_x.back()[i];
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - ts.begin()));
    const double f = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
    return (1.0 - f) * sol.tilde_x[k - 1][i] + f * sol.tilde_x[k][i];
  };

  std::vector<std::vector<double>> a_coord(n), b_coord(n);
  std::vector<double> a_gap, b_gap, qv;
  for (const auto& sol : ensemble_a) {
    if (sol.times.back() < t * (1.0 - 1e-9)) continue;  // incomplete path
    for (int i = 0; i < n; ++i) a_coord[i].push_back(value_at(sol, i));
    if (n > 1) a_gap.push_back(value_at(sol, n - 1) - value_at(sol, 0));
    double q = 0.0;
    for (std::size_t k = 1; k < sol.times.size() && sol.times[k] <= t * (1.0 + 1e-9); ++k)
      for (int i = 0; i < n; ++i) {
        const double d = sol.tilde_x[k][i] - sol.tilde_x[k - 1][i];
        q += d * d;
      }
    qv.push_back(q / n);
  }
  for (const auto& row : dyson_at_t) {
    for (int i = 0; i < n; ++i) b_coord[i].push_back(row[i]);
    if (n > 1) b_gap.push_back(row[n - 1] - row[0]);
  }

  rep.n_a = static_cast<int>(a_coord[0].size());
  rep.n_b = static_cast<int>(b_coord[0].size());
  rep.pass = true;
  for (int i = 0; i < n; ++i) {
    rep.per_coordinate.push_back(stats::ks_two_sample(a_coord[i], b_coord[i]));
    if (rep.per_coordinate.back().p_value < ks_level) rep.pass = false;
  }
  if (n > 1) {
    rep.gap = stats::ks_two_sample(a_gap, b_gap);
    if (rep.gap.p_value < ks_level) rep.pass = false;
  }
  rep.qv_mean = stats::mean(qv);
  rep.qv_target = kappa * t;
  return rep;
}

} // namespace msle::reparam
