#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace msle::conformal {

using cplx = std::complex<double>;

// Elementary hydrodynamically normalized map-out of a slit attached to the
// real axis at `anchor`: z + 2*delta/z + O(1/z^2) at infinity, hcap = 2*delta.
//
// Three kinds:
//   vertical:  straight slit [u, u+i*h],    E(z) = u + sqrt((z-u)^2 + h^2)
//   geodesic:  circular arc orthogonal to R from u to u+(dx,dy); with
//              c = (dx^2+dy^2)/(2dx), t = (dx^2+dy^2)/dy, Q = sqrt(4c^2+t^2)
//              the map is sigma(v(m(z))) with m(z) = 2cz/(2c-z),
//              v(w) = sqrt(w^2+t^2), sigma(w) = (Aw+B)/(w+Q),
//              A = c(8c^2+3t^2)/Q^2, B = 3ct^2/Q, hcap = c^2t^2(8c^2+t^2)/Q^4
//   halfdisk:  degenerate dy->0 limit, removes the half-disk on [u, u+dx],
//              E(z) = z + r^2/(z - u - dx/2), r = dx/2
//
// Arcs leaning left (dx<0) are stored mirrored; evaluation reflects through
// the imaginary axis on the way in and out.
struct SlitElement {
  enum class Kind : std::uint8_t { vertical, geodesic, halfdisk };

  Kind kind = Kind::vertical;
  double anchor = 0.0;
  bool mirrored = false;
  double dx = 0.0, dy = 0.0;   // local target, dx >= 0 after mirroring
  double delta = 0.0;          // hcap / 2
  double tip = 0.0;            // local image of the arc endpoint (real)
  double foot_lo = 0.0, foot_hi = 0.0;  // local feet of the slit image
  double c = 0.0, t = 0.0, Q = 0.0, A = 0.0, B = 0.0;  // geodesic constants

  static SlitElement vertical_slit(double u, double height);
  static SlitElement from_cap(double u, double cap_increment);  // vertical with hcap=cap
  // target given relative to the anchor; requires Im(target) >= 0
  static SlitElement from_target(double u, cplx target);

  cplx map(cplx z) const;
  cplx map_deriv(cplx z) const;
  cplx inverse(cplx w) const;
  double tip_image() const { return anchor + (mirrored ? -tip : tip); }
  // distance check against the removed slit (pre-image side)
  bool near_slit(cplx z, double tol) const;
};

struct MapChain {
  std::vector<SlitElement> elements;
  double total_cap = 0.0;

  void push(const SlitElement& e) {
    elements.push_back(e);
    total_cap += 2.0 * e.delta;
  }
  bool empty() const { return elements.empty(); }

  cplx apply(cplx z, double tol = 1e-9) const;   // throws InsideHull near a slit
  cplx apply_unchecked(cplx z) const;
  cplx invert(cplx w) const;
  // d/dx of the composition along R; throws AtFoot within tol of a hull foot
  double boundary_derivative(double x, double tol = 1e-9) const;
  std::pair<cplx, cplx> apply_with_deriv(cplx z) const;  // (value, derivative)
};

struct ZipperResult {
  MapChain chain;
  double tip_position = 0.0;     // driving-function value of the last point
  bool self_touch = false;       // non-adjacent points coincide within tol
  int skipped_points = 0;        // swallowed/degenerate inputs dropped
};

// Geodesic zipper: map out a discretized curve. points[0] must lie on R
// (within tol); consecutive duplicates are skipped.
ZipperResult map_out_curve(std::span<const cplx> points, double touch_tol = 1e-9);

// halve the maximum spacing by inserting midpoints
std::vector<cplx> refine_curve(std::span<const cplx> points);

// Monte Carlo half-plane capacity oracle, independent of MapChain.
struct HullSampler {
  std::function<bool(cplx)> contains;
  // distance lower bound to the hull (exact for the built-in samplers);
  // the walk-on-spheres oracle needs it to pick safe sphere radii
  std::function<double(cplx)> distance;
  double x_lo = 0.0, x_hi = 0.0, y_hi = 0.0;  // bounding box, hull subset of it
  double min_feature = 0.0;                   // thinnest hull scale
};

HullSampler slit_hull(double x, double height, double half_width = 1e-3);
HullSampler halfdisk_hull(double center, double radius);
HullSampler polyline_hull(std::vector<cplx> pts, double thickness);
HullSampler union_hull(std::vector<HullSampler> parts);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int walkers = 0;
  int leaked = 0;
  double launch_height = 0.0;
  double bias_scale = 0.0;  // finite-Y bias is O(value / Y); this is that ratio
};

// hcap(K) = lim_{Y->inf} Y * E^{iY}[Im B_tau], tau = hit of R or K.
// Walkers run walk-on-spheres: exact uniform sphere exits with radius
// min(Im z, dist(z, K)), absorbed within an eps band of R or the hull.
McEstimate hcap_mc_oracle(const HullSampler& hull, double launch_height, int walkers,
                          std::uint64_t seed);

} // namespace msle::conformal
