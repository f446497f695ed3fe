#include "acg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace acg {

namespace {

// Deterministic, not-axis-aligned start vector for power iterations.
Vector power_start(Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = 1.0 + static_cast<double>(i % 7) / 8.0;
  v.normalize();
  return v;
}

// Shared power-iteration core on a PSD operator `apply`; returns the largest
// eigenvalue estimate or -1 when the iteration did not stabilize.
template <typename Apply>
double psd_power_iteration(Eigen::Index dim, const Apply& apply, double tol,
                           int max_iter) {
  Vector v = power_start(dim);
  double est = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = apply(v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;  // operator annihilates the iterate
    w /= norm;
    const double next = w.dot(apply(w));
    if (it > 0 && std::abs(next - est) <= tol * std::max(next, 1e-300)) {
      return next;
    }
    est = next;
    v = w;
  }
  return -1.0;
}

}  // namespace

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols())
    throw InvalidInputError("SymMatrix: matrix is not square");
  if (!m_.allFinite())
    throw InvalidInputError("SymMatrix: non-finite entries");
  const double scale = std::max(m_.cwiseAbs().maxCoeff(), 1.0);
  const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale)
    throw InvalidInputError("SymMatrix: asymmetry exceeds 1e-12 relative");
  // Symmetrize exactly so downstream factorizations see a clean input.
  m_ = ((m_ + m_.transpose()) / 2.0).eval();
}

double frobenius_bound(const SymMatrix& m) { return m.mat().norm(); }

double spectral_upper_bound(const SymMatrix& m, double tol, int max_iter) {
  const double frob = frobenius_bound(m);
  if (frob == 0.0) return 0.0;
  // Power iteration on m*m: eigenvalues lambda_i^2, so the square root of the
  // top one is the spectral norm regardless of eigenvalue signs.
  const Matrix& a = m.mat();
  auto apply = [&](const Vector& v) -> Vector { return a * (a * v).eval(); };
  const double top_sq = psd_power_iteration(m.dim(), apply, tol, max_iter);
  if (top_sq < 0.0) return frob;  // did not stabilize; Frobenius is always valid
  return std::min(1.01 * std::sqrt(std::max(top_sq, 0.0)), frob);
}

double gram_frobenius_bound(const Matrix& x, const Vector& omega) {
  // ||XᵀΩX||_F = ||sqrt(Ω)X Xᵀ sqrt(Ω)||_F via the n-by-n Gram of the rows.
  const Matrix xs = omega.cwiseSqrt().asDiagonal() * x;
  const Matrix g = xs * xs.transpose();
  return g.norm();
}

double gram_spectral_upper_bound(const Matrix& x, const Vector& omega,
                                 double tol, int max_iter) {
  if (omega.size() != x.rows())
    throw InvalidInputError("gram bound: omega length must equal rows of x");
  if ((omega.array() < 0.0).any())
    throw InvalidInputError("gram bound: omega must be nonnegative");
  const double frob = gram_frobenius_bound(x, omega);
  if (frob == 0.0) return 0.0;
  auto apply = [&](const Vector& v) -> Vector {
    return x.transpose() * (omega.asDiagonal() * (x * v)).eval();
  };
  const double top = psd_power_iteration(x.cols(), apply, tol, max_iter);
  if (top < 0.0) return frob;
  return std::min(1.01 * std::max(top, 0.0), frob);
}

Matrix SvdFactors::reconstruct() const {
  return u * singular_values.asDiagonal() * v.transpose();
}

SvdFactors full_svd(const Matrix& x) {
  if (x.size() == 0) throw InvalidInputError("full_svd: empty matrix");
  if (!x.allFinite()) throw InvalidInputError("full_svd: non-finite entries");
  const Eigen::Index n = x.rows(), p = x.cols(), k = std::min(n, p);
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "full_svd: decomposition failed for " << n << "x" << p
        << " input (largest entry " << x.cwiseAbs().maxCoeff() << ")";
    throw NumericError(msg.str());
  }
  SvdFactors f;
  f.singular_values = svd.singularValues().head(k);
  f.u = svd.matrixU().leftCols(k);
  f.v = svd.matrixV().leftCols(k);
  f.u_complement = svd.matrixU().rightCols(n - k);
  f.v_complement = svd.matrixV().rightCols(p - k);
  if (!f.singular_values.allFinite())
    throw NumericError("full_svd: non-finite singular values");
  return f;
}

CholeskyResult cholesky_psd(const SymMatrix& m, double jitter_start) {
  const Eigen::Index dim = m.dim();
  const double scale = m.mat().trace() / static_cast<double>(dim);
  const double jitter_max = 1e-6 * std::max(scale, 0.0);
  double jitter = jitter_start;
  for (;;) {
    Matrix trial = m.mat();
    if (jitter > 0.0) trial.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(trial);
    if (llt.info() == Eigen::Success) {
      Matrix lower = llt.matrixL();
      if (lower.allFinite()) return {std::move(lower), jitter};
    }
    // Escalate geometrically; the first nonzero rung is relative to the
    // matrix's own scale so absolute size does not matter.
    const double next =
        jitter == 0.0 ? std::max(scale, 1e-300) * 1e-12 : jitter * 10.0;
    if (next > jitter_max || next == jitter) {
      std::ostringstream msg;
      msg << "cholesky_psd: matrix of dim " << dim
          << " is not positive definite within jitter budget "
          << jitter_max << " (last tried " << jitter << ")";
      throw DefinitenessError(msg.str());
    }
    jitter = next;
  }
}

Matrix cholesky_strict(const Matrix& m, const char* context) {
  Eigen::LLT<Matrix> llt(m);
  Matrix lower = llt.matrixL();
  if (llt.info() != Eigen::Success || !lower.allFinite()) {
    std::ostringstream msg;
    msg << context << ": matrix is not positive definite (dim " << m.rows()
        << ", min diagonal " << m.diagonal().minCoeff() << ")";
    throw DefinitenessError(msg.str());
  }
  return lower;
}

}  // namespace acg
