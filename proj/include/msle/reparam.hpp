#pragma once

#include <cstdint>
#include <vector>

#include "msle/conformal.hpp"
#include "msle/loewner.hpp"
#include "msle/sde.hpp"
#include "msle/stats.hpp"

namespace msle::reparam {

using cplx = std::complex<double>;

// N curves, each individually capacity-parametrized: curve i sampled at its
// own parameter s with hcap(gamma_i(0,s]) = 2s. times of each Trace carry s.
struct CurveFamily {
  std::vector<loewner::Trace> curves;
  double kappa = 4.0;
  std::vector<double> start_positions;
  std::vector<std::uint64_t> seeds;

  int n() const { return static_cast<int>(curves.size()); }
  double extent(int i) const { return curves[i].times.back(); }
  // curve point at parameter s (linear interpolation between samples)
  cplx point(int i, double s) const;  // throws CurveExhausted past the extent
  // prefix of curve i up to parameter s, last point interpolated
  std::vector<cplx> prefix(int i, double s) const;
};

struct FamilyOptions {
  double s_extent = 0.2;      // own-capacity horizon per curve
  int points_per_curve = 64;  // trace resolution
  double sde_dt = 1e-4;
  bool richardson = true;     // extrapolate the trace tips in eps
};

// One flow-line driver system per curve, each integrated and traced
// independently; curve i keeps its own capacity parameter.
CurveFamily family_from_flowlines(const sde::SdeParams& params, const FamilyOptions& opts,
                                  std::uint64_t path_id = 0);

enum class PartialMethod : std::uint8_t { fprime, finite_diff };

struct PartialDiag {
  bool touch_degenerate = false;  // fprime foot clash; finite_diff fallback used
  bool self_touch = false;
};

// d hcap(K_s) / d s_i.
//   fprime:      2 * (f'(xi_i))^2 with f the map-out of g_i(other hulls)
//   finite_diff: central difference of the combined-hull capacity
double capacity_partial(const CurveFamily& family, const std::vector<double>& s, int i,
                        PartialMethod method, PartialDiag* diag = nullptr);

// combined hull capacity at parameters s via a union zipper (curves in index order)
double combined_capacity(const CurveFamily& family, const std::vector<double>& s,
                         bool* self_touch = nullptr);

struct ReparamSolution {
  std::vector<double> times;
  std::vector<std::vector<double>> s_of_t;      // per node, N values
  std::vector<std::vector<double>> tilde_x;     // per node, N driving values
  std::vector<double> combined_cap;             // per node, union-zipper capacity
  bool partial = false;                          // stopped early: curves exhausted
  int touch_events = 0;
};

struct SolveOptions {
  double dt = 5e-3;
  double partial_floor = 1e-6;  // DerivativeBlowup below this
  PartialMethod method = PartialMethod::fprime;
};

// RK2 on ds_i/dt = 2 / (d hcap / d s_i), s(0) = 0, with the combined chain
// and tilde X rebuilt at every node.
ReparamSolution solve_reparam(const CurveFamily& family, double horizon,
                              const SolveOptions& opts = {});

struct WeakCheckReport {
  std::vector<stats::KsResult> per_coordinate;
  stats::KsResult gap;                 // X_N - X_1 (skipped for N=1)
  double qv_mean = 0.0;                // mean quadratic variation of tilde X
  double qv_target = 0.0;              // kappa * t
  int n_a = 0, n_b = 0;
  bool pass = false;                   // all KS p-values above the level
};

// Lemma 2 harness: marginals of tilde X at time t against direct Dyson
// samples, plus the increment quadratic-variation check.
WeakCheckReport weak_solution_check(const std::vector<ReparamSolution>& ensemble_a,
                                    const std::vector<std::vector<double>>& dyson_at_t,
                                    double kappa, double t, double ks_level = 0.01);

} // namespace msle::reparam
