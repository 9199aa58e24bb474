#include "msle/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "msle/errors.hpp"
#include "msle/rng.hpp"

namespace msle::conformal {

namespace {

// i*sqrt(-(w^2 + t2)) with the branch continuous from the upper half plane.
// Boundary arguments (exactly real results of real-axis evaluation) land on
// the sqrt cut; they are resolved as limits from Im > 0, which selects the
// sign of the root by the sign of Re(w).
cplx slit_sqrt(cplx w, double t2) {
  const cplx s = -(w * w) - t2;
  if (s.imag() == 0.0) {
    const double v = s.real();
    if (v <= 0.0) {
      const double r = std::sqrt(-v);
      return w.real() > 0.0 ? cplx(r, 0.0) : cplx(-r, 0.0);
    }
    return cplx(0.0, std::sqrt(v));
  }
  const cplx r = std::sqrt(s);
  return cplx(-r.imag(), r.real());  // i*r
}

cplx mirror_in(cplx z) { return {-z.real(), z.imag()}; }
cplx mirror_out(cplx z) { return {-z.real(), z.imag()}; }

constexpr double kVerticalCut = 1e-13;  // |dx| below this * dy: treat as vertical
constexpr double kHalfdiskCut = 1e-9;   // dy below this * dx: treat as half-disk

} // namespace

SlitElement SlitElement::vertical_slit(double u, double height) {
  SlitElement e;
  e.kind = Kind::vertical;
  e.anchor = u;
  e.dx = 0.0;
  e.dy = height;
  e.t = height;
  e.delta = 0.25 * height * height;
  e.tip = 0.0;
  e.foot_lo = -height;
  e.foot_hi = height;
  return e;
}

SlitElement SlitElement::from_cap(double u, double cap_increment) {
  return vertical_slit(u, 2.0 * std::sqrt(0.5 * cap_increment));
}

SlitElement SlitElement::from_target(double u, cplx target) {
  double dx = target.real();
  double dy = target.imag();
  if (dy < 0.0) throw MalformedInput("slit target below the real axis");
  SlitElement e;
  e.anchor = u;
  e.mirrored = dx < 0.0;
  if (e.mirrored) dx = -dx;

  if (dx <= kVerticalCut * dy) {
    e = vertical_slit(u, dy);
    return e;
  }
  if (dy <= kHalfdiskCut * dx) {
    e.kind = Kind::halfdisk;
    e.dx = dx;
    e.dy = dy;
    e.c = 0.5 * dx;                // center offset; radius equals c here
    e.delta = dx * dx / 8.0;
    e.tip = 1.5 * dx;
    e.foot_lo = -0.5 * dx;
    e.foot_hi = 1.5 * dx;
    return e;
  }

  e.kind = Kind::geodesic;
  e.dx = dx;
  e.dy = dy;
  const double r2 = dx * dx + dy * dy;
  e.c = r2 / (2.0 * dx);
  e.t = r2 / dy;
  const double q2 = 4.0 * e.c * e.c + e.t * e.t;
  e.Q = std::sqrt(q2);
  e.A = e.c * (8.0 * e.c * e.c + 3.0 * e.t * e.t) / q2;
  e.B = 3.0 * e.c * e.t * e.t / e.Q;
  e.delta = (e.c * e.c / q2) * (8.0 * e.c * e.c + e.t * e.t) * (e.t * e.t / q2) * 0.5;
  e.tip = e.B / e.Q;
  e.foot_lo = (e.B - e.A * e.t) / (e.Q - e.t);
  e.foot_hi = (e.A * e.t + e.B) / (e.t + e.Q);
  return e;
}

cplx SlitElement::map(cplx z) const {
  cplx w = z - anchor;
  if (mirrored) w = mirror_in(w);
  switch (kind) {
    case Kind::vertical:
      w = slit_sqrt(w, t * t);
      break;
    case Kind::halfdisk:
      w = w + (c * c) / (w - c);
      break;
    case Kind::geodesic: {
      const cplx u = 2.0 * c * w / (2.0 * c - w);
      const cplx v = slit_sqrt(u, t * t);
      w = (A * v + B) / (v + Q);
      break;
    }
  }
  if (mirrored) w = mirror_out(w);
  return w + anchor;
}

cplx SlitElement::map_deriv(cplx z) const {
  cplx w = z - anchor;
  if (mirrored) w = mirror_in(w);
  cplx d;
  switch (kind) {
    case Kind::vertical: {
      const cplx v = slit_sqrt(w, t * t);
      d = w / v;
      break;
    }
    case Kind::halfdisk: {
      const cplx q = w - c;
      d = 1.0 - (c * c) / (q * q);
      break;
    }
    case Kind::geodesic: {
      const cplx den = 2.0 * c - w;
      const cplx u = 2.0 * c * w / den;
      const cplx du = 4.0 * c * c / (den * den);
      const cplx v = slit_sqrt(u, t * t);
      const cplx dv = u / v * du;
      d = (A * Q - B) / ((v + Q) * (v + Q)) * dv;
      break;
    }
  }
  if (mirrored) d = std::conj(d);
  return d;
}

cplx SlitElement::inverse(cplx w) const {
  cplx z = w - anchor;
  if (mirrored) z = mirror_in(z);
  switch (kind) {
    case Kind::vertical:
      z = slit_sqrt(z, -t * t);
      break;
    case Kind::halfdisk: {
      // solve z + c^2/(z-c) = w for z with z-c ~ (w-c) at infinity
      const cplx q = z - c;
      const cplx s = slit_sqrt(q, -4.0 * c * c);
      z = c + 0.5 * (q + s);
      break;
    }
    case Kind::geodesic: {
      const cplx v = (Q * z - B) / (A - z);
      const cplx u = slit_sqrt(v, -t * t);
      z = 2.0 * c * u / (2.0 * c + u);
      break;
    }
  }
  if (mirrored) z = mirror_out(z);
  return z + anchor;
}

bool SlitElement::near_slit(cplx z, double tol) const {
  cplx w = z - anchor;
  if (mirrored) w = mirror_in(w);
  const double scale = std::max(1e-300, std::hypot(dx, dy));
  const double band = tol * std::max(1.0, scale);
  switch (kind) {
    case Kind::vertical:
      return std::abs(w.real()) <= band && w.imag() >= -band && w.imag() <= t + band;
    case Kind::halfdisk:
      return std::abs(w - cplx(c, 0.0)) <= c + band && w.imag() >= -band;
    case Kind::geodesic: {
      // middle frame: slit is [0, i t]; map tolerance through |m'| locally
      const cplx den = 2.0 * c - w;
      if (std::abs(den) < 1e-300) return false;
      const cplx u = 2.0 * c * w / den;
      const double loc = std::abs(4.0 * c * c / (den * den));
      const double b = band * std::max(loc, 1e-300);
      return std::abs(u.real()) <= b && u.imag() >= -b && u.imag() <= t + b;
    }
  }
  return false;
}

cplx MapChain::apply_unchecked(cplx z) const {
  for (const auto& e : elements) z = e.map(z);
  return z;
}

cplx MapChain::apply(cplx z, double tol) const {
  for (const auto& e : elements) {
    if (e.near_slit(z, tol)) throw InsideHull("point lies on or inside the mapped-out hull");
    z = e.map(z);
  }
  return z;
}

cplx MapChain::invert(cplx w) const {
  for (auto it = elements.rbegin(); it != elements.rend(); ++it) w = it->inverse(w);
  return w;
}

std::pair<cplx, cplx> MapChain::apply_with_deriv(cplx z) const {
  cplx d = 1.0;
  for (const auto& e : elements) {
    d *= e.map_deriv(z);
    z = e.map(z);
  }
  return {z, d};
}

double MapChain::boundary_derivative(double x, double tol) const {
  double d = 1.0;
  cplx z(x, 0.0);
  for (const auto& e : elements) {
    const double lo = e.anchor + (e.mirrored ? -e.foot_hi : e.foot_lo);
    const double hi = e.anchor + (e.mirrored ? -e.foot_lo : e.foot_hi);
    const double band = tol * std::max({1.0, std::abs(lo), std::abs(hi)});
    if (z.real() > lo - band && z.real() < hi + band)
      throw AtFoot("boundary derivative requested at a hull foot");
    const cplx dd = e.map_deriv(z);
    d *= dd.real();
    z = e.map(z);
    z = cplx(z.real(), 0.0);  // stays on R; drop roundoff
  }
  return d;
}

ZipperResult map_out_curve(std::span<const cplx> points, double touch_tol) {
  if (points.empty()) throw MalformedInput("empty curve");
  double scale = 1.0;
  for (const auto& p : points) scale = std::max(scale, std::abs(p));
  if (std::abs(points[0].imag()) > 1e-9 * scale)
    throw MalformedInput("curve must start on the real axis");

  ZipperResult out;
  // self-touch scan on the inputs (non-adjacent pairs)
  for (std::size_t i = 0; i + 2 < points.size() && !out.self_touch; ++i)
    for (std::size_t j = i + 2; j < points.size(); ++j)
      if (std::abs(points[i] - points[j]) <= touch_tol * scale) {
        out.self_touch = true;
        break;
      }

  double beta = points[0].real();
  for (std::size_t k = 1; k < points.size(); ++k) {
    if (std::abs(points[k] - points[k - 1]) < 1e-15 * scale) {
      ++out.skipped_points;
      continue;
    }
    cplx w = out.chain.apply_unchecked(points[k]);
    cplx rel = w - beta;
    if (rel.imag() <= 0.0) {
      if (rel.imag() > -1e-9 * std::max(1.0, std::abs(rel))) {
        rel = cplx(rel.real(), 0.0);  // grazing R: half-disk element handles it
        if (std::abs(rel.real()) < 1e-15 * scale) {
          ++out.skipped_points;
          continue;
        }
      } else {
        // image dived below R: the point is separated from infinity by the
        // curve laid down so far (a sealed pocket); drop it and report
        out.self_touch = true;
        ++out.skipped_points;
        continue;
      }
    }
    const SlitElement e = SlitElement::from_target(beta, rel);
    out.chain.push(e);
    beta = e.tip_image();
  }
  out.tip_position = beta;
  return out;
}

std::vector<cplx> refine_curve(std::span<const cplx> points) {
  std::vector<cplx> out;
  if (points.empty()) return out;
  out.reserve(points.size() * 2);
  out.push_back(points[0]);
  for (std::size_t k = 1; k < points.size(); ++k) {
    out.push_back(0.5 * (points[k - 1] + points[k]));
    out.push_back(points[k]);
  }
  return out;
}

HullSampler slit_hull(double x, double height, double half_width) {
  HullSampler h;
  h.x_lo = x - half_width;
  h.x_hi = x + half_width;
  h.y_hi = height;
  h.min_feature = 2.0 * half_width;
  h.contains = [x, height, half_width](cplx z) {
    return std::abs(z.real() - x) <= half_width && z.imag() >= 0.0 && z.imag() <= height;
  };
  h.distance = [x, height, half_width](cplx z) {
    const double dx = std::max(0.0, std::abs(z.real() - x) - half_width);
    const double dy = std::max(0.0, z.imag() - height);
    return std::hypot(dx, dy);
  };
  return h;
}

HullSampler halfdisk_hull(double center, double radius) {
  HullSampler h;
  h.x_lo = center - radius;
  h.x_hi = center + radius;
  h.y_hi = radius;
  h.min_feature = radius;
  h.contains = [center, radius](cplx z) {
    return z.imag() >= 0.0 && std::abs(z - cplx(center, 0.0)) <= radius;
  };
  h.distance = [center, radius](cplx z) {
    return std::max(0.0, std::abs(z - cplx(center, 0.0)) - radius);
  };
  return h;
}

HullSampler polyline_hull(std::vector<cplx> pts, double thickness) {
  HullSampler h;
  h.x_lo = 1e300;
  h.x_hi = -1e300;
  h.y_hi = 0.0;
  for (const auto& p : pts) {
    h.x_lo = std::min(h.x_lo, p.real() - thickness);
    h.x_hi = std::max(h.x_hi, p.real() + thickness);
    h.y_hi = std::max(h.y_hi, p.imag() + thickness);
  }
  auto seg_dist2 = [](cplx p, cplx a, cplx b) {
    const cplx ab = b - a;
    const double l2 = std::norm(ab);
    double u = l2 > 0.0 ? ((p - a).real() * ab.real() + (p - a).imag() * ab.imag()) / l2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    return std::norm(p - (a + u * ab));
  };
  h.min_feature = 2.0 * thickness;
  const double t2 = thickness * thickness;
  auto min_d2 = [pts = std::move(pts), seg_dist2](cplx z) {
    double d2 = 1e300;
    for (std::size_t k = 1; k < pts.size(); ++k)
      d2 = std::min(d2, seg_dist2(z, pts[k - 1], pts[k]));
    return d2;
  };
  h.contains = [min_d2, t2](cplx z) { return min_d2(z) <= t2; };
  h.distance = [min_d2, thickness](cplx z) {
    return std::max(0.0, std::sqrt(min_d2(z)) - thickness);
  };
  return h;
}

HullSampler union_hull(std::vector<HullSampler> parts) {
  HullSampler h;
  h.x_lo = 1e300;
  h.x_hi = -1e300;
  h.y_hi = 0.0;
  for (const auto& p : parts) {
    h.x_lo = std::min(h.x_lo, p.x_lo);
    h.x_hi = std::max(h.x_hi, p.x_hi);
    h.y_hi = std::max(h.y_hi, p.y_hi);
  }
  h.min_feature = 0.0;
  for (const auto& p : parts)
    h.min_feature = h.min_feature == 0.0 ? p.min_feature : std::min(h.min_feature, p.min_feature);
  auto shared = std::make_shared<std::vector<HullSampler>>(std::move(parts));
  h.contains = [shared](cplx z) {
    for (const auto& p : *shared)
      if (p.contains(z)) return true;
    return false;
  };
  h.distance = [shared](cplx z) {
    double d = 1e300;
    for (const auto& p : *shared) d = std::min(d, p.distance(z));
    return d;
  };
  return h;
}

McEstimate hcap_mc_oracle(const HullSampler& hull, double launch_height, int walkers,
                          std::uint64_t seed) {
  const double Y = launch_height;
  const double span = std::max({hull.x_hi - hull.x_lo, hull.y_hi, 1e-6});
  double eps = 1e-4 * span;
  if (hull.min_feature > 0.0) eps = std::min(eps, 0.4 * hull.min_feature);
  constexpr long kMaxSteps = 20000;

  McEstimate est;
  est.walkers = walkers;
  est.launch_height = Y;

  double sum = 0.0, sum2 = 0.0;
  for (int w = 0; w < walkers; ++w) {
    CounterRng rng(seed, static_cast<std::uint64_t>(w));
    cplx z(0.0, Y);
    double record = 0.0;
    bool done = false;
    for (long step = 0; step < kMaxSteps; ++step) {
      const double d_r = z.imag();
      const double d_k = hull.distance(z);
      const double r = std::min(d_r, d_k);
      if (r < eps) {
        record = (d_k <= d_r) ? z.imag() : 0.0;
        done = true;
        break;
      }
      const double th = 6.283185307179586476925286766559 * rng.uniform();
      z += cplx(r * std::cos(th), r * std::sin(th));
    }
    if (!done) ++est.leaked;
    const double v = Y * record;
    sum += v;
    sum2 += v * v;
  }
  if (est.leaked > 0) throw WalkerLeak("hcap walkers exceeded the step budget");

  const double n = static_cast<double>(walkers);
  est.value = sum / n;
  const double var = std::max(0.0, (sum2 - sum * sum / n) / (n - 1.0));
  est.std_error = std::sqrt(var / n);
  est.bias_scale = 1.0 / Y;
  return est;
}

} // namespace msle::conformal
