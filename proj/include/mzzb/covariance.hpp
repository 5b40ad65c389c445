#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstddef>

namespace mzzb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Symmetric positive definite covariance with a cached Cholesky factor.
///
/// Scaled-identity and diagonal structures are kept as such; everything that
/// touches Sigma^{-1} goes through the factor (triangular solves for dense
/// matrices, elementwise division for diagonal ones).
class Covariance {
 public:
  enum class Kind { ScaledIdentity, Diagonal, Dense };

  static Covariance scaled_identity(std::size_t dim, double variance);
  static Covariance diagonal(const Vec& variances);
  static Covariance dense(const Mat& matrix);

  Kind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  bool is_diagonal() const noexcept { return kind_ != Kind::Dense; }

  /// Diagonal entry k (valid for every kind).
  double variance(std::size_t k) const;
  double entry(std::size_t i, std::size_t j) const;
  Mat to_dense() const;

  /// L^{-1} u where Sigma = L L^T.
  Vec whiten(const Vec& u) const;
  /// L z, used to color standard normal draws.
  Vec color(const Vec& z) const;
  /// Sigma^{-1} u.
  Vec solve(const Vec& u) const;
  /// Sigma u.
  Vec multiply(const Vec& u) const;
  /// u^T Sigma^{-1} v computed as (L^{-1}u).(L^{-1}v).
  double inv_quad(const Vec& u, const Vec& v) const;
  /// w^T Sigma w.
  double quad(const Vec& w) const;

  /// Entrywise equality of the represented matrices.
  bool same_as(const Covariance& other) const;

  Covariance scaled(double factor) const;
  Covariance plus(const Covariance& other) const;

 private:
  Covariance() = default;
  Kind kind_ = Kind::ScaledIdentity;
  std::size_t dim_ = 0;
  double scale_ = 1.0;
  Vec diag_;
  Mat dense_;
  Eigen::LLT<Mat> llt_;
};

}  // namespace mzzb
