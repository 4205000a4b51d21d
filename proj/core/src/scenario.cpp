#include "dsub/scenario.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dsub/errors.hpp"

namespace dsub::scenario {

namespace {

constexpr double kMinCoefficientSingularValue = 1e-3;
constexpr double kMaxLocalGramCondition = 1e10;
constexpr std::size_t kGlobalAttempts = 1000;

void check_shape(std::size_t dimension, std::size_t nodes, std::size_t rank) {
  if (dimension < 1 || nodes < 1) {
    throw InvalidArgument(fmt::format("dimension ({}) and node count ({}) must be >= 1",
                                      dimension, nodes));
  }
  if (rank < 1 || rank > std::min(dimension, nodes)) {
    throw InvalidRank(fmt::format("rank {} outside 1..min(L={}, N={})", rank, dimension, nodes));
  }
}

Matrix draw_basis(std::size_t dimension, std::size_t rank, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto rows = static_cast<linalg::Index>(dimension);
  const auto cols = static_cast<linalg::Index>(rank);
  Matrix g(rows, cols);
  for (linalg::Index i = 0; i < rows; ++i) {
    for (linalg::Index j = 0; j < cols; ++j) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

void fill_normal(Matrix& m, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (linalg::Index i = 0; i < m.rows(); ++i) {
    for (linalg::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(rng);
  }
}

double smallest_singular_value(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().minCoeff();
}

Matrix select(const Matrix& m, const std::vector<std::size_t>& rows,
              std::span<const std::size_t> cols) {
  Matrix out(static_cast<linalg::Index>(rows.size()), static_cast<linalg::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<linalg::Index>(i), static_cast<linalg::Index>(j)) =
          m(static_cast<linalg::Index>(rows[i]), static_cast<linalg::Index>(cols[j]));
    }
  }
  return out;
}

std::vector<std::size_t> all_rows(std::size_t rank) {
  std::vector<std::size_t> rows(rank);
  for (std::size_t i = 0; i < rank; ++i) rows[i] = i;
  return rows;
}

}  // namespace

void refresh_optimum(SubspaceModel& model) { model.w_star = model.basis * model.coefficients; }

SubspaceModel generate_global_subspace(std::size_t dimension, std::size_t nodes, std::size_t rank,
                                       std::uint64_t seed) {
  check_shape(dimension, nodes, rank);
  Rng rng = make_stream(seed, StreamRole::kModel, 0, 0);

  SubspaceModel model;
  model.dimension = dimension;
  model.nodes = nodes;
  model.rank = rank;
  model.seed = seed;
  model.basis = draw_basis(dimension, rank, rng);
  model.coefficients.resize(static_cast<linalg::Index>(rank), static_cast<linalg::Index>(nodes));
  for (std::size_t attempt = 0;; ++attempt) {
    if (attempt == kGlobalAttempts) {
      throw GenerationFailed("could not draw well-conditioned coefficients");
    }
    fill_normal(model.coefficients, rng);
    if (smallest_singular_value(model.coefficients) > kMinCoefficientSingularValue) break;
  }
  refresh_optimum(model);
  return model;
}

std::vector<std::size_t> contiguous_clusters(std::size_t nodes, std::size_t clusters) {
  if (clusters < 1 || clusters > nodes) {
    throw InvalidArgument(fmt::format("cluster count {} outside 1..{}", clusters, nodes));
  }
  std::vector<std::size_t> id(nodes);
  for (std::size_t k = 0; k < nodes; ++k) id[k] = k * clusters / nodes;
  return id;
}

SubspaceModel generate_clustered_coefficients(std::size_t dimension, std::size_t nodes,
                                              std::size_t rank, const network::Topology& topo,
                                              std::uint64_t seed, std::size_t clusters,
                                              std::size_t max_attempts) {
  check_shape(dimension, nodes, rank);
  if (topo.node_count() != nodes) {
    throw DimensionMismatch(
        fmt::format("topology has {} nodes, model needs {}", topo.node_count(), nodes));
  }
  if (clusters < 1 || clusters > rank) {
    throw InvalidArgument(fmt::format("cluster count {} outside 1..rank={}", clusters, rank));
  }
  const auto node_cluster = contiguous_clusters(nodes, clusters);
  const auto row_cluster = contiguous_clusters(rank, clusters);

  Rng rng = make_stream(seed, StreamRole::kModel, 0, 0);
  SubspaceModel model;
  model.dimension = dimension;
  model.nodes = nodes;
  model.rank = rank;
  model.seed = seed;
  model.basis = draw_basis(dimension, rank, rng);
  model.coefficients.resize(static_cast<linalg::Index>(rank), static_cast<linalg::Index>(nodes));

  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    fill_normal(model.coefficients, rng);
    for (std::size_t i = 0; i < rank; ++i) {
      for (std::size_t k = 0; k < nodes; ++k) {
        if (row_cluster[i] != node_cluster[k]) {
          model.coefficients(static_cast<linalg::Index>(i), static_cast<linalg::Index>(k)) = 0.0;
        }
      }
    }
    if (smallest_singular_value(model.coefficients) <= kMinCoefficientSingularValue) continue;

    bool ok = true;
    for (std::size_t k = 0; k < nodes && ok; ++k) {
      const Matrix local = select(model.coefficients, support_rows(model, topo, k),
                                  topo.neighborhood(k));
      ok = local.rows() >= 1 && local.rows() <= local.cols() &&
           linalg::spd_condition(local * local.transpose()) <= kMaxLocalGramCondition;
    }
    if (ok) {
      refresh_optimum(model);
      return model;
    }
  }
  throw GenerationFailed(fmt::format(
      "no clustered coefficients with full-rank neighborhoods after {} attempts", max_attempts));
}

Matrix local_basis(const SubspaceModel& model, const LocalSubspace& local) {
  Matrix c(model.basis.rows(), static_cast<linalg::Index>(local.basis_rows.size()));
  for (std::size_t i = 0; i < local.basis_rows.size(); ++i) {
    c.col(static_cast<linalg::Index>(i)) =
        model.basis.col(static_cast<linalg::Index>(local.basis_rows[i]));
  }
  return c;
}

Matrix local_optimum(const SubspaceModel& model, const network::Topology& topo, std::size_t k) {
  const auto hood = topo.neighborhood(k);
  Matrix w(model.w_star.rows(), static_cast<linalg::Index>(hood.size()));
  for (std::size_t j = 0; j < hood.size(); ++j) {
    w.col(static_cast<linalg::Index>(j)) = model.w_star.col(static_cast<linalg::Index>(hood[j]));
  }
  return w;
}

std::vector<std::size_t> support_rows(const SubspaceModel& model, const network::Topology& topo,
                                      std::size_t k) {
  std::vector<std::size_t> rows;
  const auto hood = topo.neighborhood(k);
  for (std::size_t i = 0; i < model.rank; ++i) {
    const bool active = std::any_of(hood.begin(), hood.end(), [&](std::size_t l) {
      return model.coefficients(static_cast<linalg::Index>(i), static_cast<linalg::Index>(l)) != 0.0;
    });
    if (active) rows.push_back(i);
  }
  return rows;
}

std::vector<LocalSubspace> derive_local_subspaces(const SubspaceModel& model,
                                                  const network::Topology& topo, LocalMode mode,
                                                  double loading) {
  if (topo.node_count() != model.nodes) {
    throw DimensionMismatch(fmt::format("topology has {} nodes, model has {}", topo.node_count(),
                                        model.nodes));
  }
  std::vector<LocalSubspace> out;
  out.reserve(model.nodes);
  for (std::size_t k = 0; k < model.nodes; ++k) {
    const auto hood = topo.neighborhood(k);
    if (mode == LocalMode::kDense && loading == 0.0 && hood.size() < model.rank) {
      throw NeighborhoodTooSmall(
          fmt::format("node {} has {} neighborhood members, dense mode needs >= rank {}", k + 1,
                      hood.size(), model.rank),
          k);
    }
    auto rows = mode == LocalMode::kDense ? all_rows(model.rank) : support_rows(model, topo, k);
    if (rows.empty()) {
      throw SingularGram(fmt::format("node {}: neighborhood has no active coefficient rows", k + 1),
                         k);
    }
    Matrix theta = select(model.coefficients, rows, hood);
    if (loading == 0.0 && theta.rows() <= theta.cols()) {
      const double cond = linalg::spd_condition(theta * theta.transpose());
      if (cond > kMaxLocalGramCondition) {
        throw SingularGram(
            fmt::format("node {}: local Gram condition {:.3e} exceeds {:.0e}; use loading > 0",
                        k + 1, cond, kMaxLocalGramCondition),
            k);
      }
    }
    try {
      auto proj = linalg::projector_from_coefficients(theta, loading);
      out.push_back(LocalSubspace{k, std::move(rows), std::move(theta), std::move(proj)});
    } catch (const SingularGram& e) {
      throw SingularGram(fmt::format("node {}: {}", k + 1, e.what()), k);
    }
  }
  return out;
}

Matrix ar1_covariance(std::size_t dimension, double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw InvalidArgument(fmt::format("correlation {} outside [0, 1)", rho));
  }
  const auto n = static_cast<linalg::Index>(dimension);
  Matrix r(n, n);
  for (linalg::Index i = 0; i < n; ++i) {
    for (linalg::Index j = 0; j < n; ++j) {
      r(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
  }
  return r;
}

RegressionTask::RegressionTask(std::size_t node, Vector w_star, Matrix input_covariance,
                               double noise_variance)
    : node_(node),
      w_star_(std::move(w_star)),
      covariance_(std::move(input_covariance)),
      noise_variance_(noise_variance) {
  if (covariance_.rows() != w_star_.size() || covariance_.cols() != w_star_.size()) {
    throw DimensionMismatch(fmt::format("covariance {}x{} does not match dimension {}",
                                        covariance_.rows(), covariance_.cols(), w_star_.size()));
  }
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw InvalidArgument(fmt::format("noise variance {} must be finite and >= 0", noise_variance));
  }
  if ((covariance_ - covariance_.transpose()).norm() >
      linalg::relative_tolerance(1e-12, covariance_.norm())) {
    throw InvalidArgument("input covariance must be symmetric");
  }
  Eigen::LLT<Matrix> llt(covariance_);
  if (llt.info() != Eigen::Success) throw NotSpd("input covariance is not positive definite");
  factor_ = llt.matrixL();
}

std::vector<RegressionTask> make_tasks(const SubspaceModel& model, const Matrix& input_covariance,
                                       double noise_variance) {
  std::vector<RegressionTask> tasks;
  tasks.reserve(model.nodes);
  for (std::size_t k = 0; k < model.nodes; ++k) {
    tasks.emplace_back(k, model.optimum(k), input_covariance, noise_variance);
  }
  return tasks;
}

DataSample draw_sample(const RegressionTask& task, Rng& rng, std::size_t time) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(task.w_star().size());
  for (linalg::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  const double v = normal(rng);
  DataSample s;
  s.node = task.node();
  s.time = time;
  s.u = task.covariance_factor() * z;
  s.d = s.u.dot(task.w_star()) + std::sqrt(task.noise_variance()) * v;
  return s;
}

Vector stochastic_gradient(const Vector& w, const DataSample& sample) {
  if (w.size() != sample.u.size()) {
    throw DimensionMismatch(
        fmt::format("estimate length {} vs regressor length {}", w.size(), sample.u.size()));
  }
  return -2.0 * (sample.d - sample.u.dot(w)) * sample.u;
}

Vector exact_gradient(const Vector& w, const RegressionTask& task) {
  if (w.size() != task.w_star().size()) {
    throw DimensionMismatch(
        fmt::format("estimate length {} vs optimum length {}", w.size(), task.w_star().size()));
  }
  return 2.0 * task.input_covariance() * (w - task.w_star());
}

}  // namespace dsub::scenario
