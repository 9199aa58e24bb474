#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "msle/conformal.hpp"
#include "msle/errors.hpp"
#include "msle/rng.hpp"

using namespace msle;
using namespace msle::conformal;

namespace {

// wiggly test curve from the origin
std::vector<cplx> wiggle_curve(int n, double len = 1.2, double tilt = 1.0) {
  std::vector<cplx> pts{cplx(0.0, 0.0)};
  for (int k = 1; k <= n; ++k) {
    const double h = len * k / n;
    pts.push_back(h * std::exp(cplx(0.0, tilt + 0.3 * std::sin(3.0 * h))));
  }
  return pts;
}

MapChain random_chain(CounterRng& rng, int n_elems) {
  MapChain ch;
  double beta = 0.0;
  for (int k = 0; k < n_elems; ++k) {
    const cplx rel(0.6 * (rng.uniform() - 0.5), 0.1 + 0.4 * rng.uniform());
    const auto e = SlitElement::from_target(beta, rel);
    ch.push(e);
    beta = e.tip_image();
  }
  return ch;
}

} // namespace

TEST_CASE("empty chain is the identity") {
  MapChain ch;
  const cplx z(0.3, 1.7);
  CHECK(ch.apply(z) == z);
  CHECK(ch.invert(z) == z);
  CHECK(ch.boundary_derivative(5.0) == 1.0);
}

TEST_CASE("single slit with delta=1/4 sends 2i to i*sqrt(3)") {
  MapChain ch;
  ch.push(SlitElement::from_cap(0.0, 0.5));  // hcap 2*delta = 1/2, height 1
  const cplx w = ch.apply(cplx(0.0, 2.0));
  CHECK(w.real() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(w.imag() == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("chain application equals element-by-element composition") {
  const auto e1 = SlitElement::from_target(0.0, cplx(0.3, 0.8));
  const auto e2 = SlitElement::from_target(e1.tip_image(), cplx(-0.2, 0.5));
  MapChain ch;
  ch.push(e1);
  ch.push(e2);
  const cplx z(1.4, 0.9);
  CHECK(ch.apply(z) == e2.map(e1.map(z)));
}

TEST_CASE("slit inverse closed forms") {
  const double t = 0.09;  // slit with hcap 2t
  MapChain ch;
  ch.push(SlitElement::from_cap(0.0, 2.0 * t));
  const cplx tip = ch.invert(cplx(0.0, 0.0));
  CHECK(tip.real() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(tip.imag() == doctest::Approx(2.0 * std::sqrt(t)));
}

TEST_CASE("round trip invert(apply(z)) on random chains") {
  CounterRng rng(31, 0);
  const auto ch = random_chain(rng, 12);
  for (int k = 0; k < 100; ++k) {
    const cplx z(4.0 * (rng.uniform() - 0.5), 0.05 + 2.5 * rng.uniform());
    bool inside = false;
    for (const auto& e : ch.elements)
      if (e.near_slit(z, 1e-6)) inside = true;
    if (inside) continue;
    const cplx back = ch.invert(ch.apply(z));
    CHECK(std::abs(back - z) <= 1e-10 * std::max(1.0, std::abs(z)));
  }
}

TEST_CASE("boundary derivative: slit closed form and finite differences") {
  const double delta = 0.11;
  MapChain ch;
  ch.push(SlitElement::from_cap(0.0, 2.0 * delta));
  const double x = 1.0;
  CHECK(ch.boundary_derivative(x) == doctest::Approx(x / std::sqrt(x * x + 4.0 * delta)));

  CounterRng rng(77, 0);
  const auto rc = random_chain(rng, 8);
  for (double xx : {2.7, 3.4, -2.2, 5.0}) {
    const double h = 1e-6;
    const double fd =
        (rc.apply_unchecked(cplx(xx + h, 0.0)).real() - rc.apply_unchecked(cplx(xx - h, 0.0)).real()) /
        (2.0 * h);
    const double bd = rc.boundary_derivative(xx);
    CHECK(bd == doctest::Approx(fd).epsilon(1e-6));
    CHECK(bd > 0.0);
  }
}

TEST_CASE("AtFoot raised inside the hull footprint") {
  MapChain ch;
  ch.push(SlitElement::from_cap(0.0, 0.5));
  CHECK_THROWS_AS((void)ch.boundary_derivative(0.0), AtFoot);
}

TEST_CASE("InsideHull raised on the curve") {
  const auto pts = wiggle_curve(64);
  const auto zr = map_out_curve(pts);
  CHECK_THROWS_AS((void)zr.chain.apply(pts[30], 1e-7), InsideHull);
  // a point clearly away from the curve passes
  CHECK_NOTHROW((void)zr.chain.apply(cplx(2.5, 0.4)));
}

TEST_CASE("zipper: vertical slit capacity h^2/2") {
  for (double h : {0.5, 1.0, 2.0}) {
    std::vector<cplx> pts;
    for (int k = 0; k <= 64; ++k) pts.emplace_back(0.0, h * k / 64.0);
    const auto zr = map_out_curve(pts);
    CHECK(zr.chain.total_cap == doctest::Approx(0.5 * h * h).epsilon(1e-3));
  }
}

TEST_CASE("zipper: half-disk boundary arc capacity r^2") {
  for (double r : {0.5, 1.0}) {
    std::vector<cplx> pts;
    const int n = 96;
    for (int k = 0; k <= n; ++k) {
      const double a = 3.14159265358979324 * (1.0 - static_cast<double>(k) / n);
      pts.push_back(r * cplx(std::cos(a), std::sin(a)));
    }
    pts.front() = cplx(-r, 0.0);
    const auto zr = map_out_curve(pts);
    CHECK(zr.chain.total_cap == doctest::Approx(r * r).epsilon(1e-2));
  }
}

TEST_CASE("zipper: dilation scales capacity by alpha^2") {
  const auto pts = wiggle_curve(40);
  const auto base = map_out_curve(pts);
  for (double alpha : {0.5, 2.0, 3.0}) {
    std::vector<cplx> scaled;
    for (const auto& p : pts) scaled.push_back(alpha * p);
    const auto zr = map_out_curve(scaled);
    CHECK(zr.chain.total_cap / base.chain.total_cap ==
          doctest::Approx(alpha * alpha).epsilon(1e-3));
  }
}

TEST_CASE("hydrodynamic normalization of chains") {
  const auto zr = map_out_curve(wiggle_curve(64));
  const double cap = zr.chain.total_cap;
  const double n_el = static_cast<double>(zr.chain.elements.size());
  for (double y : {1e2, 1e3, 1e4}) {
    const cplx z(0.0, y);
    const double resid = std::abs(zr.chain.apply(z) - z - cap / z) * y * y;
    // the measurement itself loses ~1e-12 per element relative to Y, and the
    // Y^2 factor amplifies that cancellation noise at the top of the range
    const double roundoff = n_el * 2e-12 * y * y * 1e-4;
    CHECK(resid < 2.0 + roundoff);
  }
}

TEST_CASE("capacity additivity under order exchange") {
  // A and B are disjoint hulls; hcap(A u B) computed by unzipping in either
  // order must agree: cap(A) + cap(mapout(g_A(B))) = cap(B) + cap(mapout(g_B(A)))
  const auto a_pts = wiggle_curve(48, 0.8, 1.3);
  std::vector<cplx> b_pts;
  for (const auto& p : wiggle_curve(48, 0.7, 1.8)) b_pts.push_back(p + 2.0);

  auto cap_of_union = [](const std::vector<cplx>& first, const std::vector<cplx>& second) {
    auto zr = map_out_curve(first);
    std::vector<cplx> img;
    for (const auto& p : second) img.push_back(zr.chain.apply_unchecked(p));
    img.front() = cplx(img.front().real(), 0.0);
    const auto zr2 = map_out_curve(img);
    return zr.chain.total_cap + zr2.chain.total_cap;
  };
  const double ab = cap_of_union(a_pts, b_pts);
  const double ba = cap_of_union(b_pts, a_pts);
  CHECK(ab == doctest::Approx(ba).epsilon(1e-3));
}

TEST_CASE("refinement changes capacity at second order in spacing") {
  // against a dense reference; halving the spacing should shrink the error
  // by at least ~4 once in the asymptotic regime
  auto curve_at = [](int n) { return wiggle_curve(n); };
  const double ref = map_out_curve(curve_at(2048)).chain.total_cap;
  const double e32 = std::abs(map_out_curve(curve_at(32)).chain.total_cap - ref);
  const double e64 = std::abs(map_out_curve(curve_at(64)).chain.total_cap - ref);
  const double e128 = std::abs(map_out_curve(curve_at(128)).chain.total_cap - ref);
  CHECK(e32 / e64 > 3.5);
  CHECK(e64 / e128 > 3.5);
}

TEST_CASE("refine_curve halves the spacing") {
  const auto pts = wiggle_curve(10);
  const auto fine = refine_curve(pts);
  CHECK(fine.size() == 2 * pts.size() - 1);
  CHECK(fine[1] == 0.5 * (pts[0] + pts[1]));
}

TEST_CASE("self-touch flag on coincident non-adjacent points") {
  std::vector<cplx> pts{{0.0, 0.0}, {0.0, 0.5}, {0.2, 0.7}, {0.0, 0.5000000001}};
  const auto zr = map_out_curve(pts, 1e-6);
  CHECK(zr.self_touch);
}

TEST_CASE("zipper requires a real starting point") {
  std::vector<cplx> pts{{0.0, 0.5}, {0.0, 1.0}};
  CHECK_THROWS_AS((void)map_out_curve(pts), MalformedInput);
}

TEST_CASE("mc oracle: empty hull") {
  HullSampler empty;
  empty.contains = [](cplx) { return false; };
  empty.distance = [](cplx) { return 1e300; };
  empty.x_lo = empty.x_hi = 0.0;
  empty.y_hi = 0.0;
  const auto est = hcap_mc_oracle(empty, 10.0, 2000, 7);
  CHECK(est.value == 0.0);
  CHECK(est.std_error == 0.0);
}

TEST_CASE("mc oracle: vertical slit and half-disk" * doctest::timeout(600)) {
  const auto slit = slit_hull(0.0, 1.0, 2e-3);
  const auto es = hcap_mc_oracle(slit, 10.0, 20000, 11);
  CHECK(std::abs(es.value - 0.5) <= 3.0 * es.std_error + 0.01);

  const auto hd = halfdisk_hull(0.0, 1.0);
  const auto eh = hcap_mc_oracle(hd, 10.0, 20000, 12);
  CHECK(std::abs(eh.value - 1.0) <= 3.0 * eh.std_error + 0.01);
}

TEST_CASE("mc oracle agrees with the zipper on a random hull" * doctest::timeout(600)) {
  const auto pts = wiggle_curve(96);
  const auto zr = map_out_curve(pts);
  const auto hull = polyline_hull(pts, 4e-3);
  const auto est = hcap_mc_oracle(hull, 12.0, 20000, 13);
  CHECK(std::abs(est.value - zr.chain.total_cap) <= 3.0 * est.std_error +
                                                        0.03 * zr.chain.total_cap);
}
