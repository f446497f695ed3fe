#pragma once

#include <memory>

#include "acg/anticorr.hpp"
#include "acg/linalg.hpp"

namespace acg {

// Symmetric PSD matrix in one of four shapes chosen for how the samplers and
// quadratic forms need to touch it:
//   Dense      -- explicit p-by-p matrix,
//   Diagonal   -- diagonal entries only (no augmentation needed downstream),
//   Gram       -- Xᵀ diag(omega) X held as factors (regression likelihoods),
//   EigenBasis -- Q diag(weights) Qᵀ with orthonormal Q (kernel precisions;
//                 makes the spectral norm and augmented draws exact and cheap).
class QuadMat {
 public:
  enum class Kind { kDense, kDiagonal, kGram, kEigenBasis };

  static QuadMat dense(SymMatrix m);
  static QuadMat diagonal(Vector diag);
  static QuadMat gram(std::shared_ptr<const Matrix> x, Vector omega);
  static QuadMat eigen_basis(std::shared_ptr<const Matrix> q,
                             Vector weights);

  Kind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  bool is_diagonal() const { return kind_ == Kind::kDiagonal; }

  // Diagonal entries; Diagonal kind only.
  const Vector& diag_values() const;

  // M v and vᵀ M v; the Gram kind exploits sparsity of v (soft-thresholded
  // vectors are mostly exact zeros).
  Vector apply(const Vector& v) const;
  double quad(const Vector& v) const;

  Matrix to_dense() const;

  // Upper bound on the spectral norm, kind-aware (exact for Diagonal and
  // EigenBasis, power iteration otherwise).
  double spectral_norm_bound(BoundKind bound_kind) const;

  // Mutators used by hyperparameter hooks.
  void set_gram_omega(Vector omega);
  void set_diagonal(Vector diag);
  void set_eigen_weights(Vector weights);

  // Gram / EigenBasis accessors.
  const Matrix& gram_x() const;
  const Vector& gram_omega() const;
  const Matrix& eigen_q() const;
  const Vector& eigen_weights() const;

 private:
  QuadMat() = default;

  Kind kind_ = Kind::kDense;
  Eigen::Index dim_ = 0;
  Matrix dense_;
  Vector diag_;     // Diagonal: entries; Gram: omega; EigenBasis: weights
  std::shared_ptr<const Matrix> factor_;  // Gram: X; EigenBasis: Q
};

// Quadratic-form target
//   Pi(theta, beta) ∝ exp(-(thetaᵀM theta - 2 phiᵀtheta)/2)
//                   * exp(-(betaᵀH beta - 2 psiᵀbeta)/2),
// theta = soft_threshold(beta, kappa). M and H must be PSD (verified at
// construction: dense shapes by jittered Cholesky, factored shapes by their
// nonnegative spectra). `version` increments whenever a hook mutates m or h
// so cached factorizations downstream know to rebuild.
struct QuadTarget {
  QuadMat m;
  Vector phi;
  QuadMat h;
  Vector psi;
  Vector kappa;
  long version = 0;

  QuadTarget(QuadMat m_in, Vector phi_in, QuadMat h_in, Vector psi_in,
             Vector kappa_in);

  Eigen::Index dim() const { return phi.size(); }
  void bump_version() { ++version; }

  // thetaᵀ M theta / 2 - phiᵀ theta (the kappa-slice energy).
  double m_energy(const Vector& theta) const;
};

}  // namespace acg
