#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "acg/gibbs.hpp"

namespace acg {

// --- Sparse linear regression ---
// Likelihood precision M = XᵀX/σ², φ = Xᵀy/σ²; precursor prior
// β_j ~ N(0, τ_j) so H = diag(1/τ_j), ψ = 0; τ_j and σ² are inverse-gamma,
// the global threshold κ₀ is exponential.
struct LinRegModel {
  std::shared_ptr<const Matrix> x;
  Vector y;
  Vector tau;           // precursor variances τ_j
  double sigma2 = 1.0;
  double kappa0 = 1.0;
  double a_tau = 5.0;
  double b_tau = 1.0;
  double a_sigma = 1.0;
  double b_sigma = 1.0;
  double exp_rate_kappa = 1.0;

  void validate() const;
  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return tau.size(); }
};

QuadTarget linreg_target(const LinRegModel& model);

// Joint log posterior (up to an additive constant) of (beta, tau, sigma2,
// kappa0) given y, with theta = soft_threshold(beta, kappa0) supplied by the
// caller. Shared by the blocked sampler's trace hook and the slice baseline.
double linreg_log_joint(const LinRegModel& model, const Vector& beta,
                        const Vector& theta, const Vector& tau, double sigma2,
                        double kappa0);

// Conjugate full-conditional draws.
double update_sigma2(const Matrix& x, const Vector& y, const Vector& theta,
                     double a_sigma, double b_sigma, Rng& rng);
Vector update_tau(const Vector& beta, double a_tau, double b_tau, Rng& rng);

enum class AnticorrMethod { kDirect, kSvd, kSeries };

struct LinRegOptions {
  AnticorrMethod method = AnticorrMethod::kDirect;
  double epsilon = 1e-6;      // additive margin for d
  double eps_series = 1e-8;   // series truncation tolerance
  double rho_target = 2.0 / 3.0;
  BoundKind bound_kind = BoundKind::kSpectral;
  bool sample_sigma2 = true;
  bool sample_tau = true;
  bool sample_kappa = true;
};

// Wires the model into a runnable handle: the r draw uses the selected
// anti-correlation scheme, t reduces to the diagonal shortcut, and the
// hyperparameter hook refreshes (σ², τ, κ₀) plus the target pieces they
// enter. Retained row = [theta, kappa0, sigma2].
ModelHandle make_linreg_handle(LinRegModel model, const LinRegOptions& options);

struct LinRegSim {
  Matrix x;
  Vector y;
  Vector theta_true;
};

// AR(1)-correlated design (corr(x_j, x_j') = rho^|j-j'|), first ten true
// coefficients c*sqrt(log(p)/n)*(2,-3,2,2,-3,3,-2,3,-2,3), unit noise.
LinRegSim simulate_regression(Eigen::Index n, Eigen::Index p, double rho,
                              double c, std::uint64_t seed);

// --- Soft-thresholded Gaussian process on a pixel grid ---
// M = I/σ², φ = y/σ²; precursor β is a GP with covariance
// τ·exp(-||s-s'||²/(2ξ²)) over the grid, so H = (τ K̃_ξ)⁻¹, held in the
// eigenbasis of each candidate K̃_ξ so that H's spectral norm and the t draw
// are exact for every (τ, ξ).
Matrix make_grid(Eigen::Index n1, Eigen::Index n2);

Matrix squared_exponential_kernel(const Matrix& grid, double xi);

struct StgpBasis {
  std::shared_ptr<const Matrix> q;  // eigenvectors of K̃_ξ + jitter
  Vector evals;                     // eigenvalues, ascending, all > 0
  double logdet = 0.0;
  double xi = 0.0;
};

struct StgpPrecompute {
  Eigen::Index p = 0;
  std::vector<StgpBasis> bases;  // one per candidate ξ
};

StgpPrecompute build_stgp_precompute(const Matrix& grid,
                                     const Vector& xi_grid);

// betaᵀ (K̃_ξ + jitter)⁻¹ beta evaluated in the eigenbasis.
double kernel_quad(const StgpBasis& basis, const Vector& beta);

Vector default_xi_grid();  // 0.5 * t for t = 1..20

struct StgpModel {
  Matrix grid;
  Vector y;
  StgpPrecompute precompute;
  Vector xi_grid;
  int xi_index = 3;
  double tau_gp = 1.0;
  double sigma2 = 1.0;
  double kappa0 = 0.5;
  double a_tau = 0.1;
  double b_tau = 0.1;
  double a_sigma = 0.1;
  double b_sigma = 0.1;
  double exp_rate_kappa = 0.5;

  void validate() const;
  Eigen::Index p() const { return y.size(); }
};

QuadTarget stgp_target(const StgpModel& model);

// Categorical draw of the bandwidth index: log-weight of candidate l is
// -[p log(tau) + logdet_l]/2 - betaᵀK̃_l⁻¹beta/(2 tau) (uniform prior).
int update_xi(const StgpPrecompute& pre, const Vector& beta, double tau_gp,
              Rng& rng);

// tau ~ IG(a + p/2, b + betaᵀK̃_ξ⁻¹beta / 2).
double update_tau_gp(const StgpPrecompute& pre, int xi_index,
                     const Vector& beta, double a_tau, double b_tau, Rng& rng);

struct StgpOptions {
  double epsilon = 1e-6;
  BoundKind bound_kind = BoundKind::kSpectral;
  bool sample_sigma2 = true;
  bool sample_tau_gp = true;
  bool sample_xi = true;
  bool sample_kappa = true;
};

// Retained row = [theta, kappa0, sigma2, tau_gp, xi].
ModelHandle make_stgp_handle(std::shared_ptr<StgpModel> model,
                             const StgpOptions& options);

struct StgpSimParams {
  double tau = 1.0;
  double xi = 2.0;
  double kappa_star = 0.5;
  double sigma2 = 0.25;
};

struct StgpSim {
  Vector y;
  Vector theta_true;
  Vector beta_true;
};

StgpSim simulate_stgp_image(Eigen::Index n1, Eigen::Index n2,
                            const StgpSimParams& params, std::uint64_t seed);

}  // namespace acg
