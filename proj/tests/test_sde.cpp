#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "msle/errors.hpp"
#include "msle/rng.hpp"
#include "msle/sde.hpp"
#include "msle/stats.hpp"

using namespace msle;
using namespace msle::sde;

namespace {

SdeParams base_params(double kappa, std::vector<double> x0, double dt, double T,
                      std::uint64_t seed = 11) {
  SdeParams p;
  p.kappa = kappa;
  p.initial_positions = std::move(x0);
  p.dt = dt;
  p.horizon = T;
  p.seed = seed;
  return p;
}

} // namespace

TEST_CASE("N=1: pure sqrt(kappa) Brownian motion, zero drift") {
  const auto p = base_params(3.0, {0.5}, 0.01, 0.2, 1234);
  const auto drv = simulate_dyson(p, 9);
  // replay the stream: one gauss per step, drift term is an empty sum
  CounterRng rng(p.seed, 9);
  double x = 0.5;
  for (std::size_t k = 1; k < drv.steps(); ++k) {
    x = x + 0.0 * 0.01 + (std::sqrt(0.01) * rng.gauss()) * std::sqrt(3.0);
    CHECK(drv.at(k, 0) == x);
  }
}

TEST_CASE("drift at (0,1) is (-4, +4)") {
  const std::vector<double> x{0.0, 1.0};
  const auto d = drift_vector(x);
  CHECK(d[0] == -4.0);
  CHECK(d[1] == 4.0);
}

TEST_CASE("drift at (0,1,3), middle particle") {
  const std::vector<double> x{0.0, 1.0, 3.0};
  const auto d = drift_vector(x);
  CHECK(d[1] == doctest::Approx(4.0 / 1.0 + 4.0 / (-2.0)).epsilon(1e-15));
  CHECK(d[1] == doctest::Approx(2.0));
}

TEST_CASE("drift dual forms agree to 1e-12 relative on random configurations") {
  CounterRng rng(2024, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 5);
    std::vector<double> x;
    double acc = -2.0;
    for (int i = 0; i < n; ++i) {
      acc += 0.05 + rng.uniform();
      x.push_back(acc);
    }
    const double kappa = 0.5 + 7.5 * rng.uniform();
    const auto a = drift_direct(x);
    const auto b = drift_partition(x, kappa);
    for (int i = 0; i < n; ++i) {
      const double scale = std::max(1.0, std::abs(a[i]));
      CHECK(std::abs(a[i] - b[i]) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("rational identity: 1/2 sum_i 1/(z-x_i) sum_{j!=i} 1/(z-x_j) matches pole form") {
  using cplx = std::complex<double>;
  CounterRng rng(77, 1);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 5);
    std::vector<double> x;
    double acc = -3.0;
    for (int i = 0; i < n; ++i) {
      acc += 0.1 + 1.2 * rng.uniform();
      x.push_back(acc);
    }
    const cplx z(6.0 * rng.uniform() - 3.0, 0.2 + 2.0 * rng.uniform());
    cplx lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < n; ++i) {
      cplx si = 0.0;
      double di = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) {
          si += 1.0 / (z - x[j]);
          di += 1.0 / (x[i] - x[j]);
        }
      lhs += 0.5 / (z - x[i]) * si;
      rhs += 1.0 / (z - x[i]) * di;
    }
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("ordering preserved on every stored step") {
  const auto p = base_params(2.0, {-1.0, -0.2, 0.4, 1.3}, 2e-4, 0.3, 5);
  const auto drv = simulate_dyson(p, 0);
  for (std::size_t k = 0; k < drv.steps(); ++k)
    for (int i = 1; i < drv.n_particles; ++i) CHECK(drv.at(k, i) > drv.at(k, i - 1));
}

TEST_CASE("seed determinism and stream independence") {
  const auto p = base_params(4.0, {-1.0, 1.0}, 1e-3, 0.1, 99);
  const auto a = simulate_dyson(p, 3);
  const auto b = simulate_dyson(p, 3);
  CHECK(a.values == b.values);
  const auto c = simulate_dyson(p, 4);
  CHECK(a.values != c.values);
}

TEST_CASE("sub-machine gap raises GapCollapse") {
  // the middle particle is catapulted through its right neighbor at every
  // trial step; refinement bottoms out with the gap still below the floor
  auto p = base_params(8.0, {0.0, 1e-15, 1.0}, 1e-4, 1e-3, 1);
  CHECK_THROWS_AS((void)simulate_dyson(p, 0), GapCollapse);
}

TEST_CASE("degenerate inputs rejected") {
  CHECK_THROWS_AS((void)drift_vector(std::vector<double>{0.0, 0.0}),
                  DegenerateInput);
  auto p = base_params(4.0, {1.0, 0.0}, 1e-3, 0.1);
  CHECK_THROWS_AS(p.validate(), DegenerateInput);
  auto q = base_params(9.5, {0.0, 1.0}, 1e-3, 0.1);
  CHECK_THROWS_AS(q.validate(), DegenerateInput);
}

TEST_CASE("flow-line driver: N=1 reduces to sqrt(kappa) BM") {
  const auto p = base_params(2.0, {0.25}, 0.01, 0.1, 321);
  const auto fl = simulate_flowline_driver(0, p, 2);
  CHECK(fl.zeta.empty());
  CounterRng rng(p.seed, 2);
  double x = 0.25;
  for (std::size_t k = 1; k < fl.times.size(); ++k) {
    x = x + 0.0 * 0.01 + (std::sqrt(0.01) * rng.gauss()) * std::sqrt(2.0);
    CHECK(fl.xi[k] == x);
  }
}

TEST_CASE("flow-line drift: mutual repulsion at (0,1)") {
  // first substep from (xi, zeta) = (0, 1): drift of xi is -2, of zeta is +2,
  // and zeta carries no noise
  const auto p = base_params(4.0, {0.0, 1.0}, 1e-3, 0.01, 5150);
  const auto fl = simulate_flowline_driver(0, p, 0);
  CounterRng rng(p.seed, 0);
  const double g0 = rng.gauss();
  (void)rng.gauss();  // zeta draw, multiplied by zero
  const double h = 1e-3;
  CHECK(fl.xi[1] == 0.0 + (-2.0) * h + (std::sqrt(h) * g0) * std::sqrt(4.0));
  CHECK(fl.zeta[0][1] == 1.0 + 2.0 * h + (std::sqrt(h) * 0.0) * 0.0);
}

TEST_CASE("bessel: first-step drift matches (d-1)/(2R)") {
  const double dt = 1e-3;
  const auto bp = simulate_bessel(2.0, 1.0, dt, 0.01, 7, 0);
  CounterRng rng(7, 0);
  CHECK(bp.trajectory[1] == 1.0 + 0.5 / 1.0 * dt + std::sqrt(dt) * rng.gauss());
}

TEST_CASE("bessel dim>=2 never reaches the guard floor") {
  int hits = 0;
  for (int k = 0; k < 500; ++k) {
    const auto bp = simulate_bessel(2.0, 1.0, 1e-3, 1.0, 1000, k);
    hits += bp.hit_zero;
  }
  CHECK(hits == 0);
}

TEST_CASE("bessel(3) marginal matches |3d Brownian motion| by KS") {
  const double t = 0.3, start = 1.0;
  const int n = 2500;
  std::vector<double> sim, oracle;
  CounterRng rng(4242, 0);
  for (int k = 0; k < n; ++k) {
    const auto bp = simulate_bessel(3.0, start, 1e-3, t + 2e-3, 31337, k);
    std::size_t idx = bp.times.size() - 1;
    while (idx > 0 && bp.times[idx] > t) --idx;
    sim.push_back(bp.trajectory[idx]);
    const double s = std::sqrt(t);
    const double a = start + s * rng.gauss();
    const double b = s * rng.gauss();
    const double c = s * rng.gauss();
    oracle.push_back(std::sqrt(a * a + b * b + c * c));
  }
  const auto ks = msle::stats::ks_two_sample(sim, oracle);
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("two-particle gap is sqrt(2 kappa) times a Bessel(8/kappa+1) in law") {
  const double kappa = 4.0, t = 0.5, dt = 5e-4;
  const int n = 1500;
  const double scale = 1.0 / std::sqrt(2.0 * kappa);
  std::vector<double> gaps, bessel;
  auto p = base_params(kappa, {-0.5, 0.5}, dt, t + 2.0 * dt, 2718);
  for (int k = 0; k < n; ++k) {
    const auto drv = simulate_dyson(p, k);
    std::size_t idx = drv.steps() - 1;
    while (idx > 0 && drv.times[idx] > t) --idx;
    gaps.push_back((drv.at(idx, 1) - drv.at(idx, 0)) * scale);
    const auto bp = simulate_bessel(8.0 / kappa + 1.0, 1.0 * scale, dt, t + 2.0 * dt, 999, k);
    std::size_t b = bp.times.size() - 1;
    while (b > 0 && bp.times[b] > t) --b;
    bessel.push_back(bp.trajectory[b]);
  }
  const auto ks = msle::stats::ks_two_sample(gaps, bessel);
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("flow-line gap (xi-zeta)/sqrt(kappa) matches Bessel(8/kappa+1)") {
  const double kappa = 4.0, t = 0.5, dt = 5e-4;
  const int n = 1500;
  std::vector<double> gaps, bessel;
  auto p = base_params(kappa, {0.0, 1.0}, dt, t + 2.0 * dt, 1618);
  for (int k = 0; k < n; ++k) {
    const auto fl = simulate_flowline_driver(0, p, k);
    std::size_t idx = fl.times.size() - 1;
    while (idx > 0 && fl.times[idx] > t) --idx;
    gaps.push_back((fl.zeta[0][idx] - fl.xi[idx]) / std::sqrt(kappa));
    const auto bp =
        simulate_bessel(8.0 / kappa + 1.0, 1.0 / std::sqrt(kappa), dt, t + 2.0 * dt, 888, k);
    std::size_t b = bp.times.size() - 1;
    while (b > 0 && bp.times[b] > t) --b;
    bessel.push_back(bp.trajectory[b]);
  }
  const auto ks = msle::stats::ks_two_sample(gaps, bessel);
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("driver interpolation is linear between nodes") {
  const auto drv = constant_paths(std::vector<double>{-1.0, 1.0}, 0.1, 1.0);
  CHECK(drv.value(0, 0.05) == -1.0);
  CHECK(drv.value(1, 0.949) == 1.0);
  const auto p = base_params(4.0, {0.0}, 0.1, 0.4, 3);
  const auto d2 = simulate_dyson(p, 0);
  const double mid = d2.value(0, 0.15);
  CHECK(mid == doctest::Approx(0.5 * (d2.at(1, 0) + d2.at(2, 0))));
}
