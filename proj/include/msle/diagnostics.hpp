#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "msle/loewner.hpp"
#include "msle/sde.hpp"
#include "msle/stats.hpp"

namespace msle::diag {

using loewner::Trace;

struct Box {
  double x_lo = -2.5, x_hi = 2.5, y_hi = 2.0;
  int cells_x = 50, cells_y = 20;
};

struct PhaseReport {
  double kappa = 0.0;
  double tol = 0.0;
  bool all_simple = true;
  bool all_disjoint = true;
  std::vector<char> self_intersects;               // per curve
  std::vector<char> hits_r;                        // per curve, interior times
  std::vector<std::vector<char>> neighbor_hit;     // cross-curve proximity
  std::vector<std::vector<char>> second_neighbor_hit;
  double area_coverage = 0.0;                      // fraction of box cells touched
  double escape = 0.0;                             // max |trace point|
  double median_spacing = 0.0;
  double max_spacing = 0.0;
};

// Deterministic function of (traces, tol, box). Throws ResolutionTooCoarse
// if tol < 3x the observed median consecutive spacing.
PhaseReport classify_phase(std::span<const Trace> traces, double tol, const Box& box = {});

struct GapScanReport {
  std::vector<double> min_gaps;  // per accepted path
  int rejected = 0;              // GapCollapse count
  int total = 0;
  double min_overall = 0.0;
};
GapScanReport collision_scan(const sde::SdeParams& params, int n_paths, int workers = 0);

struct BesselLawReport {
  double dim = 0.0;
  stats::KsResult ks;
  int rejected_dyson = 0;
};
// N=2 Dyson gap scaled by 1/sqrt(2 kappa) against a Bessel(8/kappa+1)
// ensemble at the same time
BesselLawReport bessel_law_check(double kappa, int n_paths, double t,
                                 double gap0 = 1.0, double dt = 1e-4,
                                 std::uint64_t seed = 12345, int workers = 0);

struct NeighborReport {
  std::vector<std::vector<int>> hit_count;  // [i][j] paths where curves i,j touch
  int paths = 0;
  double neighbor_rate = 0.0;
  double second_neighbor_rate = 0.0;
};
NeighborReport neighbor_structure(std::span<const std::vector<Trace>> ensembles, double tol);

} // namespace msle::diag
