#pragma once

#include <Eigen/Dense>

#include "acg/errors.hpp"
#include "acg/rng.hpp"

namespace acg {

// Dense symmetric matrix, validated once at construction: entries finite,
// symmetric to 1e-12 relative tolerance. Everything downstream that needs a
// symmetric input takes this type so the check happens exactly once.
class SymMatrix {
 public:
  explicit SymMatrix(Matrix m);

  const Matrix& mat() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Matrix m_;
};

// Frobenius norm of m; always an upper bound on the spectral norm.
double frobenius_bound(const SymMatrix& m);

// Upper bound on the spectral norm max_i |lambda_i(m)| via power iteration on
// m*m (so negative eigenvalues are handled), inflated by a 1% safety factor
// and capped at the Frobenius bound. Falls back to the Frobenius bound when
// the iteration has not stabilized within max_iter steps.
double spectral_upper_bound(const SymMatrix& m, double tol = 1e-8,
                            int max_iter = 500);

// Same contract for a Gram matrix Xᵀ diag(omega) X (omega >= 0) without
// materializing it; the operator is PSD so the power iteration runs on it
// directly.
double gram_spectral_upper_bound(const Matrix& x, const Vector& omega,
                                 double tol = 1e-8, int max_iter = 500);
double gram_frobenius_bound(const Matrix& x, const Vector& omega);

// Full singular value decomposition of an n-by-p matrix, with the orthogonal
// complement of the short side retained:
//   x = u * diag(singular_values) * vᵀ,  k = min(n, p),
//   u: n-by-k, v: p-by-k (orthonormal columns, singular values nonincreasing),
//   v_complement: p-by-(p-k)  (empty when p <= n),
//   u_complement: n-by-(n-k)  (empty when p >= n).
// [v v_complement] and [u u_complement] are square orthogonal.
struct SvdFactors {
  Matrix u;
  Vector singular_values;
  Matrix v;
  Matrix u_complement;
  Matrix v_complement;

  Eigen::Index n() const { return u.rows(); }
  Eigen::Index p() const { return v.rows(); }
  Eigen::Index k() const { return singular_values.size(); }

  // u * diag(s) * vᵀ, for tests and diagnostics.
  Matrix reconstruct() const;
};

SvdFactors full_svd(const Matrix& x);

struct CholeskyResult {
  Matrix lower;           // L with L Lᵀ = m + applied_jitter * I
  double applied_jitter;  // 0 when the factorization succeeded untouched
};

// Cholesky factorization for matrices that should be positive (semi-)definite
// up to roundoff. On failure the diagonal jitter escalates geometrically from
// jitter_start up to 1e-6 * trace(m)/dim; past that the matrix is declared
// indefinite and a DefinitenessError is thrown.
CholeskyResult cholesky_psd(const SymMatrix& m, double jitter_start = 0.0);

// Strict Cholesky: no jitter at all. Used where a failure must surface as a
// definiteness error instead of being papered over (e.g. dI - M with a d that
// is too small).
Matrix cholesky_strict(const Matrix& m, const char* context);

}  // namespace acg
