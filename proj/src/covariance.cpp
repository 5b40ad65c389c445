#include "mzzb/covariance.hpp"

#include <cmath>
#include <string>

#include "mzzb/error.hpp"

namespace mzzb {

Covariance Covariance::scaled_identity(std::size_t dim, double variance) {
  if (dim == 0) throw ModelError("covariance dimension must be positive");
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw ModelError("scaled identity covariance needs a positive finite variance, got " +
                     std::to_string(variance));
  }
  Covariance c;
  c.kind_ = Kind::ScaledIdentity;
  c.dim_ = dim;
  c.scale_ = variance;
  return c;
}

Covariance Covariance::diagonal(const Vec& variances) {
  if (variances.size() == 0) throw ModelError("covariance dimension must be positive");
  for (Eigen::Index k = 0; k < variances.size(); ++k) {
    if (!(variances[k] > 0.0) || !std::isfinite(variances[k])) {
      throw ModelError("diagonal covariance entry " + std::to_string(k) +
                       " is not positive: " + std::to_string(variances[k]));
    }
  }
  Covariance c;
  c.kind_ = Kind::Diagonal;
  c.dim_ = static_cast<std::size_t>(variances.size());
  c.diag_ = variances;
  return c;
}

Covariance Covariance::dense(const Mat& matrix) {
  if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
    throw ModelError("dense covariance must be square and nonempty");
  }
  if (!matrix.allFinite()) throw ModelError("dense covariance has non-finite entries");
  const double tol = 1e-12 * std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw ModelError("dense covariance is not symmetric");
  }
  Covariance c;
  c.kind_ = Kind::Dense;
  c.dim_ = static_cast<std::size_t>(matrix.rows());
  c.dense_ = 0.5 * (matrix + matrix.transpose());
  c.llt_.compute(c.dense_);
  if (c.llt_.info() != Eigen::Success) {
    throw ModelError("dense covariance is not positive definite (Cholesky failed)");
  }
  const Vec d = Mat(c.llt_.matrixL()).diagonal();
  if (d.minCoeff() <= 0.0) throw ModelError("dense covariance is not positive definite");
  return c;
}

double Covariance::variance(std::size_t k) const {
  switch (kind_) {
    case Kind::ScaledIdentity: return scale_;
    case Kind::Diagonal: return diag_[static_cast<Eigen::Index>(k)];
    case Kind::Dense: return dense_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  }
  return 0.0;
}

double Covariance::entry(std::size_t i, std::size_t j) const {
  if (kind_ == Kind::Dense) return dense_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return i == j ? variance(i) : 0.0;
}

Mat Covariance::to_dense() const {
  const auto n = static_cast<Eigen::Index>(dim_);
  switch (kind_) {
    case Kind::ScaledIdentity: return scale_ * Mat::Identity(n, n);
    case Kind::Diagonal: return Mat(diag_.asDiagonal());
    case Kind::Dense: return dense_;
  }
  return {};
}

Vec Covariance::whiten(const Vec& u) const {
  switch (kind_) {
    case Kind::ScaledIdentity: return u / std::sqrt(scale_);
    case Kind::Diagonal: return u.cwiseQuotient(diag_.cwiseSqrt());
    case Kind::Dense: return llt_.matrixL().solve(u);
  }
  return {};
}

Vec Covariance::color(const Vec& z) const {
  switch (kind_) {
    case Kind::ScaledIdentity: return z * std::sqrt(scale_);
    case Kind::Diagonal: return z.cwiseProduct(diag_.cwiseSqrt());
    case Kind::Dense: return llt_.matrixL() * z;
  }
  return {};
}

Vec Covariance::solve(const Vec& u) const {
  switch (kind_) {
    case Kind::ScaledIdentity: return u / scale_;
    case Kind::Diagonal: return u.cwiseQuotient(diag_);
    case Kind::Dense: return llt_.solve(u);
  }
  return {};
}

Vec Covariance::multiply(const Vec& u) const {
  switch (kind_) {
    case Kind::ScaledIdentity: return u * scale_;
    case Kind::Diagonal: return u.cwiseProduct(diag_);
    case Kind::Dense: return dense_ * u;
  }
  return {};
}

double Covariance::inv_quad(const Vec& u, const Vec& v) const {
  switch (kind_) {
    case Kind::ScaledIdentity: return u.dot(v) / scale_;
    case Kind::Diagonal: return u.cwiseQuotient(diag_).dot(v);
    case Kind::Dense: return whiten(u).dot(whiten(v));
  }
  return 0.0;
}

double Covariance::quad(const Vec& w) const {
  switch (kind_) {
    case Kind::ScaledIdentity: return scale_ * w.squaredNorm();
    case Kind::Diagonal: return w.cwiseAbs2().dot(diag_);
    case Kind::Dense: return (llt_.matrixU() * w).squaredNorm();
  }
  return 0.0;
}

bool Covariance::same_as(const Covariance& other) const {
  if (other.dim_ != dim_) return false;
  if (kind_ == Kind::ScaledIdentity && other.kind_ == Kind::ScaledIdentity) return scale_ == other.scale_;
  if (is_diagonal() && other.is_diagonal()) {
    for (std::size_t k = 0; k < dim_; ++k) {
      if (variance(k) != other.variance(k)) return false;
    }
    return true;
  }
  return to_dense() == other.to_dense();
}

Covariance Covariance::scaled(double factor) const {
  switch (kind_) {
    case Kind::ScaledIdentity: return scaled_identity(dim_, scale_ * factor);
    case Kind::Diagonal: return diagonal(diag_ * factor);
    case Kind::Dense: return dense(dense_ * factor);
  }
  return *this;
}

Covariance Covariance::plus(const Covariance& other) const {
  if (other.dim_ != dim_) throw ModelError("covariance dimensions differ in sum");
  if (kind_ == Kind::ScaledIdentity && other.kind_ == Kind::ScaledIdentity) {
    return scaled_identity(dim_, scale_ + other.scale_);
  }
  if (is_diagonal() && other.is_diagonal()) {
    Vec d(static_cast<Eigen::Index>(dim_));
    for (std::size_t k = 0; k < dim_; ++k) d[static_cast<Eigen::Index>(k)] = variance(k) + other.variance(k);
    return diagonal(d);
  }
  return dense(to_dense() + other.to_dense());
}

}  // namespace mzzb
