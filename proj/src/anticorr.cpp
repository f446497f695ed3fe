#include "acg/anticorr.hpp"

#include <cmath>
#include <sstream>

namespace acg {

double bound_of(const SymMatrix& m, BoundKind kind) {
  return kind == BoundKind::kFrobenius ? frobenius_bound(m)
                                       : spectral_upper_bound(m);
}

double choose_d(double bound, double epsilon) {
  if (!(bound >= 0.0) || !std::isfinite(bound))
    throw InvalidInputError("choose_d: bound must be finite and >= 0");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw InvalidInputError("choose_d: epsilon must be finite and > 0");
  return bound + epsilon;
}

RegressionOmega::RegressionOmega(Vector diag) : omega_diag(std::move(diag)) {
  if (omega_diag.size() == 0)
    throw InvalidInputError("RegressionOmega: empty diagonal");
  if (!omega_diag.allFinite() || (omega_diag.array() <= 0.0).any())
    throw InvalidInputError("RegressionOmega: entries must be finite and > 0");
  b_omega = 1.0 / omega_diag.maxCoeff();
}

namespace detail {

double degenerate_clamp(double variance, const char* context) {
  if (variance < -1e-12) {
    std::ostringstream msg;
    msg << context << ": negative Gaussian variance " << variance
        << " (d below its spectral precondition)";
    throw InvalidInputError(msg.str());
  }
  return variance <= 1e-12 ? 0.0 : variance;
}

}  // namespace detail

namespace {

// Draw from N(mean, variance) with the degenerate-variance contract applied.
double clamped_normal(double mean, double variance, const char* context,
                      Rng& rng) {
  const double v = detail::degenerate_clamp(variance, context);
  return v == 0.0 ? mean : mean + std::sqrt(v) * rng.normal();
}

}  // namespace

Vector sample_anticorr_direct(const SymMatrix& m, const AntiCorrSpec& spec,
                              const Vector& theta, Rng& rng) {
  DirectAnticorrSampler sampler(m, spec.d);
  return sampler.draw(theta, rng);
}

DirectAnticorrSampler::DirectAnticorrSampler(const SymMatrix& m, double d)
    : m_(m.mat()), d_(d) {
  if (!(d > 0.0) || !std::isfinite(d))
    throw InvalidInputError("anticorr direct: d must be finite and > 0");
  Matrix cov = -m_;
  cov.diagonal().array() += d;
  chol_ = cholesky_strict(cov, "anticorr direct (dI - M)");
}

Vector DirectAnticorrSampler::draw(const Vector& theta, Rng& rng) const {
  if (theta.size() != m_.rows())
    throw InvalidInputError("anticorr direct: theta dimension mismatch");
  const Vector z = rng.normal_vector(theta.size());
  return chol_ * z + d_ * theta - m_ * theta;
}

RegressionPartsDraw sample_anticorr_regression_parts(
    const SvdFactors& svd, const RegressionOmega& omega, double d,
    const Vector& theta, Rng& rng) {
  const Eigen::Index n = svd.n(), p = svd.p(), k = svd.k();
  if (omega.omega_diag.size() != n)
    throw InvalidInputError("anticorr regression: omega length != n");
  if (theta.size() != p)
    throw InvalidInputError("anticorr regression: theta length != p");
  if (!(d > 0.0) || !std::isfinite(d))
    throw InvalidInputError("anticorr regression: d must be finite and > 0");
  const Vector& sv = svd.singular_values;
  const double top_sv = k > 0 ? sv[0] : 0.0;
  // Requires d > max(omega) * sv_max^2, i.e. b_omega - sv_max^2/d >= 0; the
  // clamp below turns a hard violation into an invalid-input error.
  detail::degenerate_clamp(omega.b_omega - top_sv * top_sv / d,
                           "anticorr regression precondition");

  const double sqrt_d = std::sqrt(d);
  const Vector g1 = sqrt_d * rng.normal_vector(k);

  // gamma3 spans all n rotated coordinates: the leading k carry the coupling
  // to g1, the complement block (present when p < n) is pure b_omega noise.
  Vector g3(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lam = i < k ? sv[i] : 0.0;
    g3[i] = clamped_normal(lam * (i < k ? g1[i] : 0.0) / d,
                           omega.b_omega - lam * lam / d,
                           "anticorr regression (gamma3)", rng);
  }

  Vector eta(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    eta[i] = clamped_normal(0.0, 1.0 / omega.omega_diag[i] - omega.b_omega,
                            "anticorr regression (eta)", rng);
  }

  RegressionPartsDraw out;
  out.top = svd.v * g1;
  if (p > k) out.top += svd.v_complement * (sqrt_d * rng.normal_vector(p - k));

  out.bottom = svd.u * g3.head(k) + eta;
  if (n > k) out.bottom += svd.u_complement * g3.tail(n - k);

  // Xᵀ Omega w and (dI - M) theta, both through the factors.
  auto xt_omega = [&](const Vector& w) -> Vector {
    const Vector t = svd.u.transpose() * (omega.omega_diag.asDiagonal() * w);
    return svd.v * sv.cwiseProduct(t);
  };
  const Vector x_theta = svd.u * sv.cwiseProduct(svd.v.transpose() * theta);
  out.r = out.top - xt_omega(out.bottom) + d * theta - xt_omega(x_theta);
  return out;
}

Vector sample_anticorr_regression(const SvdFactors& svd,
                                  const RegressionOmega& omega, double d,
                                  const Vector& theta, Rng& rng) {
  return sample_anticorr_regression_parts(svd, omega, d, theta, rng).r;
}

SeriesPlan series_plan(double eps, double rho) {
  if (!(eps > 0.0 && eps < 1.0))
    throw InvalidInputError("series_plan: eps must be in (0, 1)");
  if (!(rho > 0.0 && rho < 1.0))
    throw InvalidInputError("series_plan: rho must be in (0, 1)");
  SeriesPlan plan;
  plan.k_hat =
      std::max(1, static_cast<int>(std::floor(std::log(eps) / std::log(rho))));
  // After j passes the accumulated series order is 2j - 1, so the smallest j
  // with 2j - 1 >= k_hat is ceil((k_hat + 1)/2).
  plan.passes = (plan.k_hat + 2) / 2;
  return plan;
}

Vector sample_anticorr_series(const Matrix& x, const RegressionOmega& omega,
                              double d, double rho_target, double eps,
                              const Vector& theta, Rng& rng,
                              SeriesStats* stats,
                              std::optional<double> m_bound) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (omega.omega_diag.size() != n)
    throw InvalidInputError("anticorr series: omega length != n");
  if (theta.size() != p)
    throw InvalidInputError("anticorr series: theta length != p");
  if (!(d > 0.0) || !std::isfinite(d))
    throw InvalidInputError("anticorr series: d must be finite and > 0");
  const double bound =
      m_bound ? *m_bound : gram_spectral_upper_bound(x, omega.omega_diag);
  const double rho = bound / d;
  if (rho >= 1.0)
    throw InvalidInputError("anticorr series: spectral ratio rho >= 1");
  if (rho > rho_target * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "anticorr series: spectral ratio " << rho
        << " exceeds rho_target " << rho_target;
    throw InvalidInputError(msg.str());
  }

  const SeriesPlan plan = series_plan(eps, rho_target);
  const double inv_sqrt_d = 1.0 / std::sqrt(d);
  const Vector omega_sqrt = omega.omega_diag.cwiseSqrt();

  Vector gamma = Vector::Zero(p);
  for (int pass = 0; pass < plan.passes; ++pass) {
    const Vector eta1 = rng.normal_vector(p);
    const Vector eta2 = rng.normal_vector(n);
    gamma = (eta1 +
             inv_sqrt_d * (x.transpose() * omega_sqrt.cwiseProduct(eta2)) +
             (x.transpose() *
              omega.omega_diag.cwiseProduct(x * gamma).eval()) /
                 d)
                .eval();
  }
  if (stats != nullptr) {
    stats->k_hat = plan.k_hat;
    stats->passes_executed = plan.passes;
  }

  // r = (dI - M)(d^{-1/2} gamma + theta)
  const Vector w = inv_sqrt_d * gamma + theta;
  return d * w - x.transpose() * omega.omega_diag.cwiseProduct(x * w).eval();
}

HomoscedasticGramSampler::HomoscedasticGramSampler(
    std::shared_ptr<const Matrix> x, double eps_tilde, BoundKind bound_kind)
    : x_(std::move(x)), eps_tilde_(eps_tilde) {
  if (x_ == nullptr || x_->size() == 0)
    throw InvalidInputError("homoscedastic sampler: empty design matrix");
  if (!(eps_tilde_ > 0.0))
    throw InvalidInputError("homoscedastic sampler: eps_tilde must be > 0");
  const Vector ones = Vector::Ones(x_->rows());
  bound_ = bound_kind == BoundKind::kFrobenius
               ? gram_frobenius_bound(*x_, ones)
               : gram_spectral_upper_bound(*x_, ones);
  Matrix shifted = -(x_->transpose() * (*x_));
  shifted.diagonal().array() += bound_ + eps_tilde_;
  chol_ = cholesky_strict(shifted, "homoscedastic sampler ((b+eps)I - XtX)");
}

Vector HomoscedasticGramSampler::draw(double sigma2, const Vector& theta,
                                      Rng& rng) const {
  if (!(sigma2 > 0.0))
    throw InvalidInputError("homoscedastic sampler: sigma2 must be > 0");
  if (theta.size() != x_->cols())
    throw InvalidInputError("homoscedastic sampler: theta dimension mismatch");
  const double sigma = std::sqrt(sigma2);
  const Vector z = rng.normal_vector(theta.size());
  // r = L z / sigma + (dI - M) theta with sigma2 (dI - M) = (b+eps)I - XᵀX.
  return chol_ * z / sigma +
         ((bound_ + eps_tilde_) * theta -
          x_->transpose() * ((*x_) * theta).eval()) /
             sigma2;
}

}  // namespace acg
