#pragma once

// Reference computations used only by tests. They avoid the library's own
// code paths (Cholesky, projector construction) on purpose.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace dsub::testing {

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const Eigen::MatrixXd& m) {
  Dense d(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
  }
  return d;
}

inline Eigen::MatrixXd from_dense(const Dense& d) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d[0].size()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d[0].size(); ++j) m(i, j) = d[i][j];
  }
  return m;
}

/// Gauss-Jordan elimination with partial pivoting on plain vectors.
inline Dense gauss_jordan_inverse(Dense a) {
  const std::size_t n = a.size();
  Dense inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (a[pivot][col] == 0.0) throw std::runtime_error("singular");
    std::swap(a[pivot], a[col]);
    std::swap(inv[pivot], inv[col]);
    const double scale = 1.0 / a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] *= scale;
      inv[col][j] *= scale;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

/// Orthogonal projector onto the row space of theta built from its SVD:
/// V_r V_r^T with V_r the right singular vectors of nonzero singular values.
inline Eigen::MatrixXd svd_row_space_projector(const Eigen::MatrixXd& theta) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(theta, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > 1e-12 * s(0)) ++r;
  }
  const Eigen::MatrixXd v = svd.matrixV().leftCols(r);
  return v * v.transpose();
}

/// Central finite difference of a scalar function.
inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd hi = x;
    Eigen::VectorXd lo = x;
    hi(i) += step;
    lo(i) -= step;
    g(i) = (f(hi) - f(lo)) / (2.0 * step);
  }
  return g;
}

}  // namespace dsub::testing
