#pragma once

#include <memory>
#include <optional>

#include "acg/linalg.hpp"
#include "acg/rng.hpp"

namespace acg {

// Which spectral-norm upper bound feeds the augmentation level.
enum class BoundKind { kSpectral, kFrobenius };

double bound_of(const SymMatrix& m, BoundKind kind);

// Augmentation level d = bound + epsilon, where bound must dominate the
// spectral norm of the quadratic-form matrix. The margin keeps dI - M
// strictly positive definite; mixing is insensitive to it across many orders
// of magnitude.
double choose_d(double bound, double epsilon = 1e-6);

struct AntiCorrSpec {
  double d = 0.0;
  double epsilon_margin = 1e-6;

  static AntiCorrSpec from_bound(double bound, double epsilon = 1e-6) {
    return {choose_d(bound, epsilon), epsilon};
  }
};

// Diagonal observation precision Omega for the regression-structured scheme.
struct RegressionOmega {
  Vector omega_diag;
  double b_omega = 0.0;  // 1 / max(omega)

  explicit RegressionOmega(Vector diag);
};

namespace detail {
// Gaussian variances that should be nonnegative may come out as tiny
// negatives in floating point. Values in [-1e-12, 1e-12] are collapsed to an
// exact zero (the coordinate becomes deterministic at its mean); anything
// below -1e-12 means the caller's d violates its spectral precondition.
double degenerate_clamp(double variance, const char* context);
}  // namespace detail

// One draw from N((dI - M) theta, dI - M) by direct Cholesky factorization.
// No jitter is applied: a failed factorization signals that d is not above
// the spectral norm of M and surfaces as a DefinitenessError.
Vector sample_anticorr_direct(const SymMatrix& m, const AntiCorrSpec& spec,
                              const Vector& theta, Rng& rng);

// Same distribution with M = Xᵀ Omega X, factorization-free, via the
// SVD-based three-Gaussian construction. `parts` additionally exposes the
// stacked pair whose joint covariance is [[dI_p, Xᵀ], [X, Omega^-1]]:
//   top    = V g1 + V(comp) g2                    (p-vector)
//   bottom = [U U(comp)] g3 + eta                 (n-vector)
//   r      = top - XᵀOmega bottom + (dI - M) theta.
struct RegressionPartsDraw {
  Vector r;
  Vector top;
  Vector bottom;
};

RegressionPartsDraw sample_anticorr_regression_parts(const SvdFactors& svd,
                                                     const RegressionOmega& omega,
                                                     double d,
                                                     const Vector& theta,
                                                     Rng& rng);

Vector sample_anticorr_regression(const SvdFactors& svd,
                                  const RegressionOmega& omega, double d,
                                  const Vector& theta, Rng& rng);

// Truncation plan for the von-Neumann-series sampler: the series order K̂
// needed so the neglected covariance tail is below eps when the spectral
// ratio is rho, and the number of recursion passes that reach it (each pass
// raises the accumulated order by 2).
struct SeriesPlan {
  int k_hat = 0;
  int passes = 0;
};

SeriesPlan series_plan(double eps, double rho);

struct SeriesStats {
  int k_hat = 0;
  int passes_executed = 0;
};

// One draw from N((dI - M) theta, dI - M), M = XᵀOmega X, via the truncated
// matrix-series recursion
//   gamma <- eta1 + d^{-1/2} Xᵀ Omega^{1/2} eta2 + (d^{-1} XᵀOmega X) gamma,
// run for series_plan(eps, rho_target).passes passes, then
//   r = (dI - M)(d^{-1/2} gamma + theta).
// Requires spectral-norm(M)/d <= rho_target < 1; `m_bound` may pass a
// precomputed spectral-norm upper bound to skip the internal power iteration.
Vector sample_anticorr_series(const Matrix& x, const RegressionOmega& omega,
                              double d, double rho_target, double eps,
                              const Vector& theta, Rng& rng,
                              SeriesStats* stats = nullptr,
                              std::optional<double> m_bound = std::nullopt);

// Cached direct sampler: factors dI - M once, then draws are O(p^2).
class DirectAnticorrSampler {
 public:
  DirectAnticorrSampler(const SymMatrix& m, double d);

  double d() const { return d_; }
  Vector draw(const Vector& theta, Rng& rng) const;

 private:
  Matrix m_;
  double d_;
  Matrix chol_;
};

// Cached sampler for the homoscedastic regression case Omega = I/sigma2:
// with d = (bound(XᵀX) + eps_tilde)/sigma2 the matrix
// sigma2 * (dI - M) = (bound + eps_tilde) I - XᵀX is free of sigma2, so its
// Cholesky factor is computed once and reused as sigma2 moves.
class HomoscedasticGramSampler {
 public:
  HomoscedasticGramSampler(std::shared_ptr<const Matrix> x, double eps_tilde,
                           BoundKind bound_kind);

  double d(double sigma2) const { return (bound_ + eps_tilde_) / sigma2; }
  Vector draw(double sigma2, const Vector& theta, Rng& rng) const;
  double gram_bound() const { return bound_; }

 private:
  std::shared_ptr<const Matrix> x_;
  double eps_tilde_;
  double bound_;
  Matrix chol_;  // L with L Lᵀ = (bound + eps_tilde) I - XᵀX
};

}  // namespace acg
