#include "dsub/linalg.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "dsub/errors.hpp"

namespace dsub::linalg {

Matrix make_matrix(Index rows, Index cols, std::span<const double> row_major) {
  if (rows < 1 || cols < 1) {
    throw InvalidArgument(fmt::format("matrix shape {}x{} must be at least 1x1", rows, cols));
  }
  if (static_cast<Index>(row_major.size()) != rows * cols) {
    throw DimensionMismatch(fmt::format("matrix {}x{} needs {} entries, got {}", rows, cols,
                                        rows * cols, row_major.size()));
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      m(i, j) = row_major[static_cast<std::size_t>(i * cols + j)];
    }
  }
  if (!all_finite(m)) throw InvalidArgument("matrix entries must be finite");
  return m;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

Matrix solve_spd(const Matrix& gram, const Matrix& rhs) {
  if (gram.rows() != gram.cols()) {
    throw DimensionMismatch(fmt::format("gram must be square, got {}x{}", gram.rows(), gram.cols()));
  }
  if (rhs.rows() != gram.rows()) {
    throw DimensionMismatch(
        fmt::format("rhs has {} rows, gram is {}x{}", rhs.rows(), gram.rows(), gram.cols()));
  }
  const double asym = (gram - gram.transpose()).norm();
  if (asym > relative_tolerance(1e-12, gram.norm())) {
    throw NotSpd(fmt::format("gram is not symmetric (asymmetry {:.3e})", asym));
  }
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw NotSpd("Cholesky factorization failed");
  const auto& factor = llt.matrixLLT();
  for (Index i = 0; i < factor.rows(); ++i) {
    if (!(factor(i, i) > 0.0) || !std::isfinite(factor(i, i))) {
      throw NotSpd("Cholesky factor has a non-positive pivot");
    }
  }
  return llt.solve(rhs);
}

double spd_condition(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

Projector Projector::identity(Index m) {
  if (m < 1) throw InvalidArgument("projector dimension must be >= 1");
  return Projector(Matrix::Identity(m, m), 0.0);
}

Projector projector_from_coefficients(const Matrix& theta, double loading) {
  if (theta.rows() < 1 || theta.cols() < 1) {
    throw InvalidArgument("coefficient matrix must be at least 1x1");
  }
  if (!(loading >= 0.0) || !std::isfinite(loading)) {
    throw InvalidArgument(fmt::format("loading must be finite and >= 0, got {}", loading));
  }
  if (!all_finite(theta)) throw InvalidArgument("coefficient matrix must be finite");

  const Index r = theta.rows();
  const Index m = theta.cols();
  Matrix gram = theta * theta.transpose();

  if (loading == 0.0) {
    if (r > m) {
      throw SingularGram(
          fmt::format("coefficient matrix {}x{} has more rows than columns; Gram is singular", r, m));
    }
    const double cond = spd_condition(gram);
    if (cond > kMaxGramCondition) {
      throw SingularGram(fmt::format("Gram condition {:.3e} exceeds {:.0e}", cond, kMaxGramCondition));
    }
    // Orthonormal basis of the row space avoids squaring the condition number.
    const Eigen::HouseholderQR<Matrix> qr(theta.transpose());
    const Matrix q = qr.householderQ() * Matrix::Identity(m, r);
    Matrix p = q * q.transpose();
    Matrix sym = 0.5 * (p + p.transpose());
    return Projector(std::move(sym), loading);
  }
  gram.diagonal().array() += loading;

  Matrix p;
  try {
    p = theta.transpose() * solve_spd(gram, theta);
  } catch (const NotSpd& e) {
    throw SingularGram(fmt::format("Gram factorization failed: {}", e.what()));
  }
  // Remove rounding asymmetry so the operator is exactly symmetric.
  Matrix sym = 0.5 * (p + p.transpose());
  return Projector(std::move(sym), loading);
}

Matrix project_rows(const Matrix& psi, const Projector& proj) {
  if (psi.cols() != proj.dim()) {
    throw DimensionMismatch(
        fmt::format("cannot project {}x{} rows with a {}x{} projector", psi.rows(), psi.cols(),
                    proj.dim(), proj.dim()));
  }
  return psi * proj.matrix();
}

}  // namespace dsub::linalg
