#include "acg/quad_target.hpp"

#include <cmath>

namespace acg {

QuadMat QuadMat::dense(SymMatrix m) {
  QuadMat q;
  q.kind_ = Kind::kDense;
  q.dim_ = m.dim();
  q.dense_ = m.mat();
  return q;
}

QuadMat QuadMat::diagonal(Vector diag) {
  if (!diag.allFinite())
    throw InvalidInputError("QuadMat diagonal: non-finite entries");
  QuadMat q;
  q.kind_ = Kind::kDiagonal;
  q.dim_ = diag.size();
  q.diag_ = std::move(diag);
  return q;
}

QuadMat QuadMat::gram(std::shared_ptr<const Matrix> x, Vector omega) {
  if (x == nullptr || x->size() == 0)
    throw InvalidInputError("QuadMat gram: empty factor");
  if (omega.size() != x->rows())
    throw InvalidInputError("QuadMat gram: omega length != rows of x");
  if (!omega.allFinite() || (omega.array() < 0.0).any())
    throw InvalidInputError("QuadMat gram: omega must be finite and >= 0");
  QuadMat q;
  q.kind_ = Kind::kGram;
  q.dim_ = x->cols();
  q.factor_ = std::move(x);
  q.diag_ = std::move(omega);
  return q;
}

QuadMat QuadMat::eigen_basis(std::shared_ptr<const Matrix> q_basis,
                             Vector weights) {
  if (q_basis == nullptr || q_basis->rows() != q_basis->cols())
    throw InvalidInputError("QuadMat eigen_basis: basis must be square");
  if (weights.size() != q_basis->cols())
    throw InvalidInputError("QuadMat eigen_basis: weight length mismatch");
  if (!weights.allFinite() || (weights.array() < 0.0).any())
    throw InvalidInputError(
        "QuadMat eigen_basis: weights must be finite and >= 0");
  QuadMat q;
  q.kind_ = Kind::kEigenBasis;
  q.dim_ = q_basis->rows();
  q.factor_ = std::move(q_basis);
  q.diag_ = std::move(weights);
  return q;
}

const Vector& QuadMat::diag_values() const {
  if (kind_ != Kind::kDiagonal)
    throw InvalidInputError("QuadMat: diag_values on non-diagonal kind");
  return diag_;
}

Vector QuadMat::apply(const Vector& v) const {
  if (v.size() != dim_) throw InvalidInputError("QuadMat apply: bad dimension");
  switch (kind_) {
    case Kind::kDense:
      return dense_ * v;
    case Kind::kDiagonal:
      return diag_.cwiseProduct(v);
    case Kind::kGram: {
      const Matrix& x = *factor_;
      // Soft-thresholded vectors are mostly zero; accumulate by columns then.
      Eigen::Index nnz = 0;
      for (Eigen::Index j = 0; j < v.size(); ++j)
        if (v[j] != 0.0) ++nnz;
      Vector xv;
      if (nnz * 4 <= dim_) {
        xv = Vector::Zero(x.rows());
        for (Eigen::Index j = 0; j < v.size(); ++j)
          if (v[j] != 0.0) xv += x.col(j) * v[j];
      } else {
        xv = x * v;
      }
      return x.transpose() * diag_.cwiseProduct(xv).eval();
    }
    case Kind::kEigenBasis: {
      const Matrix& q = *factor_;
      return q * diag_.cwiseProduct(q.transpose() * v).eval();
    }
  }
  throw StateError("QuadMat: unknown kind");
}

double QuadMat::quad(const Vector& v) const {
  if (v.size() != dim_) throw InvalidInputError("QuadMat quad: bad dimension");
  switch (kind_) {
    case Kind::kDense:
      return v.dot(dense_ * v);
    case Kind::kDiagonal:
      return diag_.cwiseProduct(v).dot(v);
    case Kind::kGram: {
      const Matrix& x = *factor_;
      Eigen::Index nnz = 0;
      for (Eigen::Index j = 0; j < v.size(); ++j)
        if (v[j] != 0.0) ++nnz;
      Vector xv;
      if (nnz * 4 <= dim_) {
        xv = Vector::Zero(x.rows());
        for (Eigen::Index j = 0; j < v.size(); ++j)
          if (v[j] != 0.0) xv += x.col(j) * v[j];
      } else {
        xv = x * v;
      }
      return diag_.cwiseProduct(xv).dot(xv);
    }
    case Kind::kEigenBasis: {
      const Vector u = factor_->transpose() * v;
      return diag_.cwiseProduct(u).dot(u);
    }
  }
  throw StateError("QuadMat: unknown kind");
}

Matrix QuadMat::to_dense() const {
  switch (kind_) {
    case Kind::kDense:
      return dense_;
    case Kind::kDiagonal:
      return Matrix(diag_.asDiagonal());
    case Kind::kGram:
      return factor_->transpose() * diag_.asDiagonal() * (*factor_);
    case Kind::kEigenBasis:
      return (*factor_) * diag_.asDiagonal() * factor_->transpose();
  }
  throw StateError("QuadMat: unknown kind");
}

double QuadMat::spectral_norm_bound(BoundKind bound_kind) const {
  switch (kind_) {
    case Kind::kDense:
      return bound_of(SymMatrix(dense_), bound_kind);
    case Kind::kDiagonal:
    case Kind::kEigenBasis:
      // Spectrum is held explicitly; the max is the exact norm.
      return diag_.size() == 0 ? 0.0 : diag_.cwiseAbs().maxCoeff();
    case Kind::kGram:
      return bound_kind == BoundKind::kFrobenius
                 ? gram_frobenius_bound(*factor_, diag_)
                 : gram_spectral_upper_bound(*factor_, diag_);
  }
  throw StateError("QuadMat: unknown kind");
}

void QuadMat::set_gram_omega(Vector omega) {
  if (kind_ != Kind::kGram)
    throw InvalidInputError("QuadMat: set_gram_omega on non-gram kind");
  if (omega.size() != factor_->rows() || !omega.allFinite() ||
      (omega.array() < 0.0).any())
    throw InvalidInputError("QuadMat: invalid omega");
  diag_ = std::move(omega);
}

void QuadMat::set_diagonal(Vector diag) {
  if (kind_ != Kind::kDiagonal)
    throw InvalidInputError("QuadMat: set_diagonal on non-diagonal kind");
  if (diag.size() != dim_ || !diag.allFinite())
    throw InvalidInputError("QuadMat: invalid diagonal");
  diag_ = std::move(diag);
}

void QuadMat::set_eigen_weights(Vector weights) {
  if (kind_ != Kind::kEigenBasis)
    throw InvalidInputError("QuadMat: set_eigen_weights on non-eigen kind");
  if (weights.size() != dim_ || !weights.allFinite() ||
      (weights.array() < 0.0).any())
    throw InvalidInputError("QuadMat: invalid weights");
  diag_ = std::move(weights);
}

const Matrix& QuadMat::gram_x() const {
  if (kind_ != Kind::kGram)
    throw InvalidInputError("QuadMat: gram_x on non-gram kind");
  return *factor_;
}

const Vector& QuadMat::gram_omega() const {
  if (kind_ != Kind::kGram)
    throw InvalidInputError("QuadMat: gram_omega on non-gram kind");
  return diag_;
}

const Matrix& QuadMat::eigen_q() const {
  if (kind_ != Kind::kEigenBasis)
    throw InvalidInputError("QuadMat: eigen_q on non-eigen kind");
  return *factor_;
}

const Vector& QuadMat::eigen_weights() const {
  if (kind_ != Kind::kEigenBasis)
    throw InvalidInputError("QuadMat: eigen_weights on non-eigen kind");
  return diag_;
}

namespace {

// PSD verification at target construction: cheap spectral checks for factored
// kinds (their constructors already force nonnegative spectra), jittered
// Cholesky for dense ones.
void verify_psd(const QuadMat& m, const char* side) {
  if (m.kind() == QuadMat::Kind::kDense) {
    try {
      cholesky_psd(SymMatrix(m.to_dense()));
    } catch (const DefinitenessError&) {
      throw InvalidInputError(std::string("QuadTarget: ") + side +
                              " is not positive semi-definite");
    }
  } else if (m.kind() == QuadMat::Kind::kDiagonal) {
    if ((m.diag_values().array() < 0.0).any())
      throw InvalidInputError(std::string("QuadTarget: ") + side +
                              " has negative diagonal entries");
  }
  // Gram and EigenBasis kinds are PSD by construction.
}

}  // namespace

QuadTarget::QuadTarget(QuadMat m_in, Vector phi_in, QuadMat h_in,
                       Vector psi_in, Vector kappa_in)
    : m(std::move(m_in)),
      phi(std::move(phi_in)),
      h(std::move(h_in)),
      psi(std::move(psi_in)),
      kappa(std::move(kappa_in)) {
  const Eigen::Index p = phi.size();
  if (m.dim() != p || h.dim() != p || psi.size() != p || kappa.size() != p)
    throw InvalidInputError("QuadTarget: dimension mismatch");
  if (!phi.allFinite() || !psi.allFinite())
    throw InvalidInputError("QuadTarget: phi/psi must be finite");
  if (!kappa.allFinite() || (kappa.array() < 0.0).any())
    throw InvalidInputError("QuadTarget: kappa must be finite and >= 0");
  verify_psd(m, "M");
  verify_psd(h, "H");
}

double QuadTarget::m_energy(const Vector& theta) const {
  return 0.5 * m.quad(theta) - phi.dot(theta);
}

}  // namespace acg
