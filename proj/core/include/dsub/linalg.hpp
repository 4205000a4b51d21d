#pragma once

#include <cstddef>
#include <span>
#include <utility>

#include <Eigen/Dense>

namespace dsub::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Gram condition number above which an unloaded projector is rejected.
inline constexpr double kMaxGramCondition = 1e12;

/// Absolute floor used by every relative tolerance check.
inline constexpr double kToleranceFloor = 1e-14;

/// Builds a rows x cols matrix from row-major entries. Rejects empty shapes,
/// a wrong entry count, and non-finite values.
[[nodiscard]] Matrix make_matrix(Index rows, Index cols, std::span<const double> row_major);

[[nodiscard]] bool all_finite(const Matrix& m);

/// `tol * max(scale, floor)`: relative tolerance with an absolute floor.
[[nodiscard]] inline double relative_tolerance(double tol, double scale) {
  return tol * (scale > kToleranceFloor ? scale : kToleranceFloor);
}

/// Solves gram * X = rhs for symmetric positive definite gram using a
/// Cholesky factorization. Throws NotSpd when the factorization fails and
/// DimensionMismatch on shape errors.
[[nodiscard]] Matrix solve_spd(const Matrix& gram, const Matrix& rhs);

/// Ratio of extreme eigenvalues of a symmetric matrix; +inf when the
/// smallest one is not positive.
[[nodiscard]] double spd_condition(const Matrix& sym);

/// Orthogonal projector onto the row space of a coefficient matrix, or its
/// diagonally loaded contraction when loading > 0. Immutable.
class Projector {
 public:
  [[nodiscard]] Index dim() const noexcept { return matrix_.rows(); }
  [[nodiscard]] const Matrix& matrix() const noexcept { return matrix_; }
  [[nodiscard]] double loading() const noexcept { return loading_; }

  /// Identity projector of size m (no constraint).
  [[nodiscard]] static Projector identity(Index m);

 private:
  Projector(Matrix m, double loading) : matrix_(std::move(m)), loading_(loading) {}
  friend Projector projector_from_coefficients(const Matrix& theta, double loading);

  Matrix matrix_;
  double loading_ = 0.0;
};

/// Returns theta^T (theta theta^T + loading I)^{-1} theta for an r x m theta.
///
/// With loading == 0 the Gram matrix must be numerically invertible: a failed
/// factorization, r > m, or a condition number above kMaxGramCondition raises
/// SingularGram. Callers may retry with a positive loading.
[[nodiscard]] Projector projector_from_coefficients(const Matrix& theta, double loading);

/// Right-multiplies an L x m matrix by the projector, so every row of the
/// result lies in the projector's range.
[[nodiscard]] Matrix project_rows(const Matrix& psi, const Projector& proj);

}  // namespace dsub::linalg
