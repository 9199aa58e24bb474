#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "msle/rng.hpp"
#include "msle/stats.hpp"

using msle::CounterRng;
namespace stats = msle::stats;

TEST_CASE("counter rng is a pure function of (seed, stream)") {
  CounterRng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  bool differ_c = false, differ_d = false;
  for (int i = 0; i < 1000; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    differ_c |= (va != c.next_u64());
    differ_d |= (va != d.next_u64());
  }
  CHECK(differ_c);
  CHECK(differ_d);
}

TEST_CASE("uniform stays inside (0,1)") {
  CounterRng rng(1, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("gauss moments match theory") {
  CounterRng rng(777, 0);
  const std::size_t n = 200000;
  long double s = 0.0L, s2 = 0.0L, s4 = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = rng.gauss();
    s += g;
    s2 += g * g;
    s4 += g * g * g * g;
  }
  const double m = static_cast<double>(s / n);
  const double v = static_cast<double>(s2 / n);
  const double k = static_cast<double>(s4 / n);
  CHECK(std::abs(m) < 5.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(v - 1.0) < 6.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(k - 3.0) < 0.15);
}

TEST_CASE("kolmogorov tail values") {
  CHECK(stats::kolmogorov_q(0.5) == doctest::Approx(0.9639).epsilon(1e-3));
  CHECK(stats::kolmogorov_q(1.36) == doctest::Approx(0.0494).epsilon(2e-2));
  CHECK(stats::kolmogorov_q(10.0) < 1e-8);
  CHECK(stats::kolmogorov_q(0.0) == 1.0);
}

TEST_CASE("two-sample KS: identical, same law, different law") {
  CounterRng rng(5, 0);
  std::vector<double> a, b, shifted;
  for (int i = 0; i < 4000; ++i) a.push_back(rng.gauss());
  for (int i = 0; i < 4000; ++i) b.push_back(rng.gauss());
  for (double x : b) shifted.push_back(x + 0.5);

  const auto same = stats::ks_two_sample(a, a);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == doctest::Approx(1.0));

  const auto law = stats::ks_two_sample(a, b);
  CHECK(law.p_value > 0.01);

  const auto diff = stats::ks_two_sample(a, shifted);
  CHECK(diff.p_value < 1e-6);
}

TEST_CASE("mean variance std_error basics") {
  std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(stats::mean(v) == doctest::Approx(2.5));
  CHECK(stats::variance(v) == doctest::Approx(5.0 / 3.0));
  CHECK(stats::std_error(v) == doctest::Approx(std::sqrt(5.0 / 12.0)));
}
