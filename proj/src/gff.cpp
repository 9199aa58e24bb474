#include "msle/gff.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>

#include "msle/errors.hpp"
#include "msle/loewner.hpp"
#include "msle/rng.hpp"
#include "msle/stats.hpp"
#include "msle/util.hpp"

namespace msle::gff {

double greens_fn(cplx z, cplx w) {
  return std::log(std::abs(z - std::conj(w))) - std::log(std::abs(z - w));
}

int GridDomain::nx() const { return static_cast<int>(std::lround(2.0 * half_width / mesh)) - 1; }
int GridDomain::ny() const { return static_cast<int>(std::lround(height / mesh)) - 1; }

cplx GridDomain::node(int ix, int iy) const {
  return {-half_width + (ix + 1) * mesh, (iy + 1) * mesh};
}

int GridDomain::nearest(cplx z) const {
  const int ix = static_cast<int>(std::lround((z.real() + half_width) / mesh)) - 1;
  const int iy = static_cast<int>(std::lround(z.imag() / mesh)) - 1;
  if (ix < 0 || ix >= nx() || iy < 0 || iy >= ny()) return -1;
  return index(ix, iy);
}

struct GffSampler::Impl {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
};

GffSampler::GffSampler(const GridDomain& dom, std::size_t node_budget)
    : dom_(dom), impl_(std::make_unique<Impl>()) {
  const int nx = dom_.nx();
  const int ny = dom_.ny();
  if (nx < 2 || ny < 2) throw MeshTooLarge("grid has too few interior nodes");
  const std::size_t n = dom_.size();
  if (n > node_budget)
    throw MeshTooLarge("factorization budget exceeded; use a coarser mesh");

  // 5-point graph Laplacian with Dirichlet boundary (rows scaled by a^-2
  // cancel against the delta normalization; the unscaled matrix inverse
  // approximates the Laplace Green's function directly)
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * n);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const int k = dom_.index(ix, iy);
      trip.emplace_back(k, k, 4.0);
      if (ix > 0) trip.emplace_back(k, dom_.index(ix - 1, iy), -1.0);
      if (ix + 1 < nx) trip.emplace_back(k, dom_.index(ix + 1, iy), -1.0);
      if (iy > 0) trip.emplace_back(k, dom_.index(ix, iy - 1), -1.0);
      if (iy + 1 < ny) trip.emplace_back(k, dom_.index(ix, iy + 1), -1.0);
    }
  m.setFromTriplets(trip.begin(), trip.end());
  impl_->llt.compute(m);
  if (impl_->llt.info() != Eigen::Success) throw MeshTooLarge("Cholesky factorization failed");

  // calibrate against the continuum Green's function at two bulk pairs
  const cplx za = dom_.node(nx / 2, ny / 2);
  const cplx zb = dom_.node(nx / 2 + std::max(1, nx / 8), ny / 2);
  const cplx zc = dom_.node(nx / 2, ny / 2 + std::max(1, ny / 8));
  calib_ = 1.0;
  const double r1 = greens_fn(za, zb) / covariance(dom_.nearest(za), dom_.nearest(zb));
  const double r2 = greens_fn(za, zc) / covariance(dom_.nearest(za), dom_.nearest(zc));
  calib_ = 0.5 * (r1 + r2);
}

GffSampler::~GffSampler() = default;
GffSampler::GffSampler(GffSampler&&) noexcept = default;
GffSampler& GffSampler::operator=(GffSampler&&) noexcept = default;

std::vector<double> GffSampler::sample(std::uint64_t seed) const {
  const auto n = static_cast<Eigen::Index>(dom_.size());
  CounterRng rng(seed, 0x67666653616d70ULL);
  Eigen::VectorXd xi(n);
  for (Eigen::Index i = 0; i < n; ++i) xi[i] = rng.gauss();
  // cov(P^-1 U^-1 xi) = (P^-1 L L^T P)^-1 = M^-1
  Eigen::VectorXd y = impl_->llt.matrixU().solve(xi);
  Eigen::VectorXd x = impl_->llt.permutationPinv() * y;
  const double s = std::sqrt(calib_);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = s * x[i];
  return out;
}

double GffSampler::covariance(int idx_a, int idx_b) const {
  const auto n = static_cast<Eigen::Index>(dom_.size());
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e[idx_b] = 1.0;
  Eigen::VectorXd col = impl_->llt.solve(e);
  return calib_ * col[idx_a];
}

double harmonic_offset(const BoundaryData& bdata, cplx z) {
  if (z.imag() < 0.0) throw OnBoundary("point below the real axis");
  double acc = 0.0;
  for (double x : bdata.positions) {
    const cplx q = z - x;
    if (z.imag() == 0.0 && q.real() == 0.0)
      throw OnBoundary("evaluation at a marked boundary point");
    double a = std::arg(q);
    if (z.imag() == 0.0 && q.real() < 0.0) a = 3.14159265358979323846;  // arg in (0, pi]
    acc += a;
  }
  return bdata.a_coeff() * acc;
}

double evolved_field(const sde::DrivingPaths& drivers, double t,
                     const conformal::MapChain& chain, const BoundaryData& bdata, cplx z) {
  const auto [g, d] = chain.apply_with_deriv(z);
  if (g.imag() <= 0.0) throw InsideHull("point swallowed by the chain");
  double acc = 0.0;
  const int n = drivers.n_particles;
  for (int i = 0; i < n; ++i) acc += std::arg(g - drivers.value(i, t));
  return bdata.a_coeff() * acc - bdata.chi() * std::arg(d);
}

double evolved_field_flow(const sde::DrivingPaths& drivers, double t,
                          const BoundaryData& bdata, cplx z) {
  const auto s = loewner::flow_with_deriv(drivers, z, t);
  if (!s.alive) throw InsideHull("point swallowed before the requested time");
  double acc = 0.0;
  for (int i = 0; i < drivers.n_particles; ++i) acc += std::arg(s.g - drivers.value(i, t));
  return bdata.a_coeff() * acc - bdata.chi() * s.log_deriv.imag();
}

namespace {

sde::SdeParams field_params(double kappa, const std::vector<double>& positions, double t,
                            double dt, std::uint64_t seed) {
  sde::SdeParams p;
  p.kappa = kappa;
  p.initial_positions = positions;
  p.dt = dt;
  p.horizon = t + 2.0 * dt;
  p.seed = seed;
  return p;
}

} // namespace

MartingaleReport martingale_test(double kappa, std::vector<double> positions, cplx z,
                                 double t, int n_paths, std::uint64_t seed, double dt,
                                 int workers) {
  const BoundaryData bdata{kappa, positions};
  const double h0 = harmonic_offset(bdata, z);
  const auto params = field_params(kappa, positions, t, dt, seed);
  if (workers <= 0) workers = default_workers();

  // fill by path index so the compacted order (hence every reported digit)
  // does not depend on thread scheduling
  std::vector<double> slot(n_paths);
  std::vector<char> ok(n_paths, 0);
  parallel_for(n_paths, workers, [&](int k) {
    try {
      const auto drv = sde::simulate_dyson(params, static_cast<std::uint64_t>(k));
      slot[k] = evolved_field_flow(drv, t, bdata, z) - h0;
      ok[k] = 1;
    } catch (const Error&) {
    }
  });
  std::vector<double> drifts;
  drifts.reserve(n_paths);
  int excluded = 0;
  for (int k = 0; k < n_paths; ++k)
    ok[k] ? drifts.push_back(slot[k]) : void(++excluded);

  MartingaleReport r;
  r.used = static_cast<int>(drifts.size());
  r.excluded = excluded;
  r.mean_drift = stats::mean(drifts);
  r.std_error = stats::std_error(drifts);
  r.pass = std::abs(r.mean_drift) <= 3.0 * r.std_error;
  return r;
}

CrossVariationReport cross_variation_test(double kappa, std::vector<double> positions,
                                          cplx z, cplx w, double t, int n_paths,
                                          std::uint64_t seed, double dt, int workers) {
  const BoundaryData bdata{kappa, positions};
  const double hz0 = harmonic_offset(bdata, z);
  const double hw0 = harmonic_offset(bdata, w);
  const double g0 = greens_fn(z, w);
  const auto params = field_params(kappa, positions, t, dt, seed);
  if (workers <= 0) workers = default_workers();

  std::vector<double> sz_slot(n_paths), sw_slot(n_paths), gd_slot(n_paths);
  std::vector<char> ok(n_paths, 0);
  parallel_for(n_paths, workers, [&](int k) {
    try {
      const auto drv = sde::simulate_dyson(params, static_cast<std::uint64_t>(k));
      const auto sz = loewner::flow_with_deriv(drv, z, t);
      const auto sw = loewner::flow_with_deriv(drv, w, t);
      if (!sz.alive || !sw.alive) return;
      double hz = 0.0, hw = 0.0;
      for (int i = 0; i < drv.n_particles; ++i) {
        const double xi = drv.value(i, t);
        hz += std::arg(sz.g - xi);
        hw += std::arg(sw.g - xi);
      }
      hz = bdata.a_coeff() * hz - bdata.chi() * sz.log_deriv.imag();
      hw = bdata.a_coeff() * hw - bdata.chi() * sw.log_deriv.imag();
      sz_slot[k] = hz - hz0;
      sw_slot[k] = hw - hw0;
      gd_slot[k] = g0 - greens_fn(sz.g, sw.g);
      ok[k] = 1;
    } catch (const Error&) {
    }
  });
  std::vector<double> az, aw, gdiff;
  az.reserve(n_paths);
  aw.reserve(n_paths);
  gdiff.reserve(n_paths);
  int excluded = 0;
  for (int k = 0; k < n_paths; ++k) {
    if (!ok[k]) {
      ++excluded;
      continue;
    }
    az.push_back(sz_slot[k]);
    aw.push_back(sw_slot[k]);
    gdiff.push_back(gd_slot[k]);
  }

  CrossVariationReport r;
  r.used = static_cast<int>(az.size());
  r.excluded = excluded;
  const double ma = stats::mean(az);
  const double mb = stats::mean(aw);
  // joint statistic: centered product minus the pathwise Green's difference,
  // so the standard error accounts for their correlation
  std::vector<double> e(az.size());
  double cov = 0.0;
  for (std::size_t k = 0; k < az.size(); ++k) {
    const double prod = (az[k] - ma) * (aw[k] - mb);
    cov += prod;
    e[k] = prod - gdiff[k];
  }
  if (az.size() > 1) cov /= static_cast<double>(az.size() - 1);
  r.empirical_cov = cov;
  r.target = stats::mean(gdiff);
  r.std_error = stats::std_error(e);
  r.pass = std::abs(r.empirical_cov - r.target) <= 3.0 * r.std_error;
  return r;
}

} // namespace msle::gff
