#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "msle/conformal.hpp"
#include "msle/sde.hpp"

namespace msle::loewner {

using cplx = std::complex<double>;

// swallow threshold tied to the parabolic scaling of the slit tip
inline double swallow_threshold(double dt) {
  return std::max(10.0 * 2.220446049250313e-16, 2.0 * std::sqrt(dt));
}

struct TrackedPoint {
  cplx z0;
  cplx g;          // current image under the forward flow
  bool alive = true;
  std::optional<double> tau;  // swallow time
};

// Forward solver for dg/dt = sum_i 2/(g - X_i(t)), RK2 with step halving
// near the drivers. Single-owner mutable state; drivers are read-only.
class LoewnerState {
 public:
  explicit LoewnerState(const sde::DrivingPaths& drivers);

  void track(cplx z0);
  void track(std::span<const cplx> z0s);
  void advance(double until);

  double time() const { return t_; }
  double hcap_accum() const { return hcap_; }
  const std::vector<TrackedPoint>& points() const { return pts_; }
  const sde::DrivingPaths& drivers() const { return *drivers_; }

 private:
  const sde::DrivingPaths* drivers_;
  std::vector<TrackedPoint> pts_;
  double t_ = 0.0;
  double hcap_ = 0.0;
};

// (g_t(z), log g_t'(z)) for one tracked point, integrated jointly; the log
// derivative keeps a continuous branch of arg g'.
struct FlowSample {
  cplx g;
  cplx log_deriv;
  bool alive = true;
  std::optional<double> tau;
};
FlowSample flow_with_deriv(const sde::DrivingPaths& drivers, cplx z, double t);

// Euler chain of vertical slit elements approximating g_t (one element per
// driver per stored step). Exact for a single constant driver.
conformal::MapChain flow_chain(const sde::DrivingPaths& drivers, double t);

struct Trace {
  int index = 0;
  std::vector<double> times;
  std::vector<cplx> points;
  std::vector<double> eps_used;
};

struct TraceOptions {
  double eps = 0.0;          // <= 0 selects 4*sqrt(dt)
  bool richardson = false;   // two-level extrapolation in eps
  double blowup_radius = 0.0;  // <= 0 selects an automatic guard box
};

// backward-flow evaluation of g_t^{-1}(X_i(t) + i*eps)
cplx trace_tip(const sde::DrivingPaths& drivers, int index, double t, double eps,
               double blowup_radius = 0.0);

// N traces sampled on n_out uniformly spaced times in (0, t_max]
std::vector<Trace> full_traces(const sde::DrivingPaths& drivers, double t_max, int n_out,
                               const TraceOptions& opts = {});

struct SwallowGridResult {
  std::vector<cplx> grid;
  std::vector<char> swallowed;
  std::vector<double> tau;  // valid where swallowed
};
SwallowGridResult swallow_grid(const sde::DrivingPaths& drivers, double t,
                               std::span<const cplx> grid);

} // namespace msle::loewner
