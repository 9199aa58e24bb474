#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace msle::sde {

struct SdeParams {
  double kappa = 4.0;
  std::vector<double> initial_positions;  // strictly increasing
  double dt = 1e-4;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  double collision_guard = 0.0;  // <= 0 selects the default 1e-4 * mean initial gap

  int n() const { return static_cast<int>(initial_positions.size()); }
  double guard() const;
  void validate() const;  // throws DegenerateInput on any violation
};

enum class DriverKind : std::uint8_t { dyson, flowline, constant };

// N driver trajectories on a shared uniform grid. values are stored
// time-major: value(k, i) is particle i at times[k]. Immutable once built.
struct DrivingPaths {
  std::vector<double> times;
  std::vector<double> values;  // size times.size() * n
  int n_particles = 0;
  SdeParams params;
  DriverKind kind = DriverKind::constant;
  int flowline_index = -1;

  std::size_t steps() const { return times.size(); }
  double at(std::size_t k, int i) const { return values[k * n_particles + i]; }
  double horizon() const { return times.empty() ? 0.0 : times.back(); }
  // linear interpolation between grid nodes
  double value(int i, double t) const;
  void value_all(double t, std::span<double> out) const;
};

struct FlowLineDriving {
  int index = 0;                    // the curve this driver system grows
  std::vector<double> times;
  std::vector<double> xi;           // driving process of curve `index`
  std::vector<std::vector<double>> zeta;  // N-1 force-point trajectories
  SdeParams params;

  // xi as a single-driver path, ready for the Loewner solver
  DrivingPaths xi_as_paths() const;
};

struct BesselPath {
  double dim = 0.0;
  std::vector<double> times;
  std::vector<double> trajectory;
  std::uint64_t seed = 0;
  bool hit_zero = false;                 // reported, not an error (dim < 2)
  std::optional<double> first_hit_time;
};

// Euler-Maruyama with gap-triggered adaptive halving. Throws GapCollapse when
// refinement bottoms out without restoring a machine-scaled gap.
DrivingPaths simulate_dyson(const SdeParams& params, std::uint64_t path_id = 0);

DrivingPaths constant_paths(std::span<const double> positions, double dt, double horizon);

// dXi = sqrt(kappa) dB + sum_j 2 dt/(Xi - Zj),  dZj = 2 dt/(Zj - Xi)
FlowLineDriving simulate_flowline_driver(int index, const SdeParams& params,
                                         std::uint64_t path_id = 0);

// dR = dW + ((dim-1)/2) dt / R, positivity-preserving sub-stepping
BesselPath simulate_bessel(double dim, double start, double dt, double horizon,
                           std::uint64_t seed, std::uint64_t path_id = 0);

// Interaction drift, both algebraic routes. They agree identically.
std::vector<double> drift_direct(std::span<const double> positions);
std::vector<double> drift_partition(std::span<const double> positions, double kappa);
inline std::vector<double> drift_vector(std::span<const double> positions) {
  return drift_direct(positions);
}

} // namespace msle::sde
