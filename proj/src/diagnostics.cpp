#include "msle/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msle/errors.hpp"
#include "msle/util.hpp"

namespace msle::diag {

namespace {

using cplx = loewner::cplx;

double seg_dist(cplx p, cplx a, cplx b) {
  const cplx ab = b - a;
  const double l2 = std::norm(ab);
  double u = l2 > 0.0 ? ((p - a).real() * ab.real() + (p - a).imag() * ab.imag()) / l2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return std::abs(p - (a + u * ab));
}

// min distance from any point of tr_a to any segment of tr_b
double cross_distance(const Trace& a, const Trace& b) {
  double d = 1e300;
  for (const auto& p : a.points)
    for (std::size_t k = 1; k < b.points.size(); ++k)
      d = std::min(d, seg_dist(p, b.points[k - 1], b.points[k]));
  return d;
}

bool self_intersects(const Trace& tr, double tol) {
  // non-adjacent point pairs within tol; adjacency window scales with the
  // local spacing so a slow curve is not flagged against itself
  const auto& p = tr.points;
  for (std::size_t i = 0; i + 2 < p.size(); ++i) {
    for (std::size_t j = i + 2; j < p.size(); ++j) {
      const double step_scale = std::abs(p[i + 1] - p[i]) + std::abs(p[j] - p[j - 1]);
      if (std::abs(p[i] - p[j]) < tol && std::abs(p[i] - p[j]) < 0.8 * (j - i) * step_scale)
        return true;
    }
  }
  return false;
}

} // namespace

PhaseReport classify_phase(std::span<const Trace> traces, double tol, const Box& box) {
  PhaseReport rep;
  rep.tol = tol;
  const int n = static_cast<int>(traces.size());
  rep.self_intersects.assign(n, 0);
  rep.hits_r.assign(n, 0);
  rep.neighbor_hit.assign(n, std::vector<char>(n, 0));
  rep.second_neighbor_hit.assign(n, std::vector<char>(n, 0));

  std::vector<double> spacings;
  for (const auto& tr : traces)
    for (std::size_t k = 1; k < tr.points.size(); ++k)
      spacings.push_back(std::abs(tr.points[k] - tr.points[k - 1]));
  if (!spacings.empty()) {
    std::sort(spacings.begin(), spacings.end());
    rep.median_spacing = spacings[spacings.size() / 2];
    rep.max_spacing = spacings.back();
  }
  if (tol < 3.0 * rep.median_spacing)
    throw ResolutionTooCoarse("tol below 3x the observed trace spacing");

  for (int i = 0; i < n; ++i) {
    const auto& tr = traces[i];
    if (self_intersects(tr, tol)) {
      rep.self_intersects[i] = 1;
      rep.all_simple = false;
    }
    // interior-time returns to R; skip the start-up window where Im ~ 2 sqrt(t)
    const double t_guard = 2.25 * tol * tol;
    for (std::size_t k = 1; k < tr.points.size(); ++k) {
      if (tr.times[k] <= t_guard) continue;
      if (tr.points[k].imag() < tol) {
        rep.hits_r[i] = 1;
        break;
      }
    }
    for (const auto& p : tr.points) rep.escape = std::max(rep.escape, std::abs(p));
  }

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = std::min(cross_distance(traces[i], traces[j]),
                                cross_distance(traces[j], traces[i]));
      if (d < tol) {
        rep.neighbor_hit[i][j] = rep.neighbor_hit[j][i] = 1;
        rep.all_disjoint = false;
        if (j - i >= 2) rep.second_neighbor_hit[i][j] = rep.second_neighbor_hit[j][i] = 1;
      }
    }

  // coverage proxy: fraction of box cells within tol of some trace point
  const double wx = (box.x_hi - box.x_lo) / box.cells_x;
  const double wy = box.y_hi / box.cells_y;
  int covered = 0;
  for (int cy = 0; cy < box.cells_y; ++cy)
    for (int cx = 0; cx < box.cells_x; ++cx) {
      const cplx center(box.x_lo + (cx + 0.5) * wx, (cy + 0.5) * wy);
      const double reach = tol + 0.5 * std::hypot(wx, wy);
      bool hit = false;
      for (const auto& tr : traces) {
        for (const auto& p : tr.points)
          if (std::abs(p - center) < reach) {
            hit = true;
            break;
          }
        if (hit) break;
      }
      if (hit) ++covered;
    }
  rep.area_coverage = static_cast<double>(covered) / (box.cells_x * box.cells_y);
  return rep;
}

GapScanReport collision_scan(const sde::SdeParams& params, int n_paths, int workers) {
  if (workers <= 0) workers = default_workers();
  GapScanReport rep;
  rep.total = n_paths;
  std::vector<double> slot(n_paths);
  std::vector<char> ok(n_paths, 0);
  parallel_for(n_paths, workers, [&](int k) {
    try {
      const auto drv = sde::simulate_dyson(params, static_cast<std::uint64_t>(k));
      double g = 1e300;
      if (drv.n_particles < 2) {
        slot[k] = std::numeric_limits<double>::infinity();
      } else {
        for (std::size_t r = 0; r < drv.steps(); ++r)
          for (int i = 1; i < drv.n_particles; ++i)
            g = std::min(g, drv.at(r, i) - drv.at(r, i - 1));
        slot[k] = g;
      }
      ok[k] = 1;
    } catch (const GapCollapse&) {
    }
  });
  rep.min_overall = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_paths; ++k) {
    if (!ok[k]) {
      ++rep.rejected;
      continue;
    }
    rep.min_gaps.push_back(slot[k]);
    rep.min_overall = std::min(rep.min_overall, slot[k]);
  }
  return rep;
}

BesselLawReport bessel_law_check(double kappa, int n_paths, double t, double gap0,
                                 double dt, std::uint64_t seed, int workers) {
  if (workers <= 0) workers = default_workers();
  BesselLawReport rep;
  rep.dim = 8.0 / kappa + 1.0;

  sde::SdeParams p;
  p.kappa = kappa;
  p.initial_positions = {-0.5 * gap0, 0.5 * gap0};
  p.dt = dt;
  p.horizon = t + 2.0 * dt;
  p.seed = seed;

  const double scale = 1.0 / std::sqrt(2.0 * kappa);
  std::vector<double> gaps_slot(n_paths), bessel_slot(n_paths);
  std::vector<char> ok(n_paths, 0);
  parallel_for(n_paths, workers, [&](int k) {
    try {
      const auto drv = sde::simulate_dyson(p, static_cast<std::uint64_t>(k));
      std::size_t idx = drv.steps() - 1;
      while (idx > 0 && drv.times[idx] > t) --idx;
      gaps_slot[k] = (drv.at(idx, 1) - drv.at(idx, 0)) * scale;
      ok[k] = 1;
    } catch (const GapCollapse&) {
    }
    const auto bp =
        sde::simulate_bessel(rep.dim, gap0 * scale, dt, t + 2.0 * dt, seed ^ 0x42ULL,
                             static_cast<std::uint64_t>(k));
    std::size_t idx = bp.times.size() - 1;
    while (idx > 0 && bp.times[idx] > t) --idx;
    bessel_slot[k] = bp.trajectory[idx];
  });

  std::vector<double> gaps, bessel;
  for (int k = 0; k < n_paths; ++k) {
    bessel.push_back(bessel_slot[k]);
    if (!ok[k]) {
      ++rep.rejected_dyson;
      continue;
    }
    gaps.push_back(gaps_slot[k]);
  }
  rep.ks = stats::ks_two_sample(gaps, bessel);
  return rep;
}

NeighborReport neighbor_structure(std::span<const std::vector<Trace>> ensembles, double tol) {
  NeighborReport rep;
  rep.paths = static_cast<int>(ensembles.size());
  if (ensembles.empty()) return rep;
  const int n = static_cast<int>(ensembles.front().size());
  rep.hit_count.assign(n, std::vector<int>(n, 0));
  long nb_hits = 0, nb_pairs = 0, sec_hits = 0, sec_pairs = 0;
  for (const auto& traces : ensembles) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double d = std::min(cross_distance(traces[i], traces[j]),
                                  cross_distance(traces[j], traces[i]));
        const bool hit = d < tol;
        if (hit) {
          ++rep.hit_count[i][j];
          ++rep.hit_count[j][i];
        }
        if (j - i == 1) {
          ++nb_pairs;
          nb_hits += hit;
        } else if (j - i == 2) {
          ++sec_pairs;
          sec_hits += hit;
        }
      }
  }
  rep.neighbor_rate = nb_pairs ? static_cast<double>(nb_hits) / nb_pairs : 0.0;
  rep.second_neighbor_rate = sec_pairs ? static_cast<double>(sec_hits) / sec_pairs : 0.0;
  return rep;
}

} // namespace msle::diag
