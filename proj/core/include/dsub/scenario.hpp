#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dsub/linalg.hpp"
#include "dsub/network.hpp"
#include "dsub/random.hpp"

namespace dsub::scenario {

using linalg::Matrix;
using linalg::Vector;

/// Global low-rank model: the optimal parameters of all nodes, stacked as
/// columns of w_star, factor as basis * coefficients.
struct SubspaceModel {
  std::size_t dimension = 0;  // L
  std::size_t nodes = 0;      // N
  std::size_t rank = 0;       // r*
  std::uint64_t seed = 0;
  Matrix basis;         // L x r*, orthonormal columns
  Matrix coefficients;  // r* x N, column k holds node k's weights
  Matrix w_star;        // L x N

  [[nodiscard]] Vector optimum(std::size_t k) const {
    return w_star.col(static_cast<linalg::Index>(k));
  }
};

/// Recomputes w_star from basis and coefficients.
void refresh_optimum(SubspaceModel& model);

/// Random orthonormal basis and i.i.d. standard normal coefficients,
/// redrawn until the smallest singular value of the coefficients exceeds
/// 1e-3. Deterministic in the seed. Throws InvalidRank unless
/// 1 <= rank <= min(dimension, nodes).
[[nodiscard]] SubspaceModel generate_global_subspace(std::size_t dimension, std::size_t nodes,
                                                     std::size_t rank, std::uint64_t seed);

/// Like generate_global_subspace, but coefficient rows are confined to
/// clusters of contiguous nodes: nodes split into `clusters` contiguous
/// groups, rows split into as many contiguous groups, and cluster j's
/// columns are nonzero only on row group j. Entries are redrawn until
/// every neighborhood's support-restricted coefficients have full row rank
/// (Gram condition <= 1e10). Throws GenerationFailed after `max_attempts`.
/// With clusters == 1 and neighborhoods no smaller than the rank, the result
/// equals generate_global_subspace for the same seed.
[[nodiscard]] SubspaceModel generate_clustered_coefficients(
    std::size_t dimension, std::size_t nodes, std::size_t rank, const network::Topology& topo,
    std::uint64_t seed, std::size_t clusters, std::size_t max_attempts = 100);

/// Cluster id of each node for a contiguous split of `nodes` into `clusters`.
[[nodiscard]] std::vector<std::size_t> contiguous_clusters(std::size_t nodes,
                                                           std::size_t clusters);

enum class LocalMode { kDense, kSupport };

/// Coefficients and projector that node k uses for its neighborhood.
struct LocalSubspace {
  std::size_t node = 0;
  std::vector<std::size_t> basis_rows;  // S_k: 0-based global row ids, ascending
  Matrix coefficients;                  // |S_k| x |N_k|, columns in neighborhood order
  linalg::Projector projector;

  [[nodiscard]] std::size_t rank() const noexcept { return basis_rows.size(); }
};

/// Local basis C_k: the columns of the global basis selected by basis_rows.
[[nodiscard]] Matrix local_basis(const SubspaceModel& model, const LocalSubspace& local);

/// Optimal matrix of a neighborhood: columns of w_star in neighborhood order.
[[nodiscard]] Matrix local_optimum(const SubspaceModel& model, const network::Topology& topo,
                                   std::size_t k);

/// Support rows used by node k in support mode: rows of the global
/// coefficients with a nonzero entry in one of k's neighborhood columns.
[[nodiscard]] std::vector<std::size_t> support_rows(const SubspaceModel& model,
                                                    const network::Topology& topo,
                                                    std::size_t k);

/// Builds one LocalSubspace per node by row-subsetting the global
/// coefficients. Dense mode keeps every row; support mode keeps
/// support_rows(). With loading == 0, dense mode throws NeighborhoodTooSmall
/// when a neighborhood has fewer members than the global rank, and a
/// rank-deficient local Gram raises SingularGram carrying the node id.
[[nodiscard]] std::vector<LocalSubspace> derive_local_subspaces(const SubspaceModel& model,
                                                                const network::Topology& topo,
                                                                LocalMode mode, double loading);

/// R[i][j] = rho^|i - j|; rho = 0 gives the identity.
[[nodiscard]] Matrix ar1_covariance(std::size_t dimension, double rho);

/// Streaming least-squares task of one node: d = u^T w* + v with
/// u ~ N(0, R_u) and v ~ N(0, noise_variance).
class RegressionTask {
 public:
  RegressionTask(std::size_t node, Vector w_star, Matrix input_covariance, double noise_variance);

  [[nodiscard]] std::size_t node() const noexcept { return node_; }
  [[nodiscard]] const Vector& w_star() const noexcept { return w_star_; }
  [[nodiscard]] const Matrix& input_covariance() const noexcept { return covariance_; }
  [[nodiscard]] double noise_variance() const noexcept { return noise_variance_; }
  /// Lower Cholesky factor of the input covariance.
  [[nodiscard]] const Matrix& covariance_factor() const noexcept { return factor_; }

 private:
  std::size_t node_;
  Vector w_star_;
  Matrix covariance_;
  Matrix factor_;
  double noise_variance_;
};

[[nodiscard]] std::vector<RegressionTask> make_tasks(const SubspaceModel& model,
                                                     const Matrix& input_covariance,
                                                     double noise_variance);

struct DataSample {
  std::size_t node = 0;
  std::size_t time = 0;
  Vector u;
  double d = 0.0;
};

/// Draws one regression sample; consumes dimension + 1 normal variates.
[[nodiscard]] DataSample draw_sample(const RegressionTask& task, Rng& rng, std::size_t time = 0);

/// Gradient of (d - u^T w)^2, i.e. -2 u (d - u^T w).
[[nodiscard]] Vector stochastic_gradient(const Vector& w, const DataSample& sample);

/// Gradient of the expected squared error, 2 R_u (w - w*).
[[nodiscard]] Vector exact_gradient(const Vector& w, const RegressionTask& task);

}  // namespace dsub::scenario
