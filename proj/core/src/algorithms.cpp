#include "dsub/algorithms.hpp"

#include <cmath>

#include <fmt/format.h>

#include "dsub/errors.hpp"

namespace dsub::algorithms {

namespace {

using linalg::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

void check_estimate(const Vector& w, std::size_t node) {
  if (!w.allFinite()) {
    throw DivergenceDetected(fmt::format("node {} estimate became non-finite", node + 1), node);
  }
  const double norm = w.norm();
  if (norm > kDivergenceBound) {
    throw DivergenceDetected(
        fmt::format("node {} estimate norm {:.3e} exceeds {:.0e}", node + 1, norm,
                    kDivergenceBound),
        node);
  }
}

void check_inputs(std::span<const AgentState> states, const GradientInput& grads) {
  if (states.empty()) throw InvalidArgument("no agents");
  if (grads.size() != states.size()) {
    throw DimensionMismatch(
        fmt::format("{} agents but {} gradient inputs", states.size(), grads.size()));
  }
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k].node != k) {
      throw InvalidArgument(fmt::format("agent at position {} is node {}", k, states[k].node));
    }
    if (states[k].w.size() != states.front().w.size()) {
      throw DimensionMismatch("agents disagree on parameter dimension");
    }
  }
}

void check_combination(const network::CombinationMatrix& a, std::size_t n) {
  if (a.size() != n || static_cast<std::size_t>(a.matrix().cols()) != n) {
    throw DimensionMismatch(fmt::format("combination matrix is {}x{}, network has {} nodes",
                                        a.matrix().rows(), a.matrix().cols(), n));
  }
}

std::vector<Vector> adapt(std::span<const AgentState> states, const GradientInput& grads) {
  std::vector<Vector> psi(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    psi[k] = states[k].w - states[k].mu * grads.gradient(k, states[k].w);
  }
  return psi;
}

std::vector<std::size_t> processing_order(std::span<const std::size_t> order, std::size_t n) {
  std::vector<std::size_t> out;
  if (order.empty()) {
    out.resize(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = k;
    return out;
  }
  if (order.size() != n) throw InvalidArgument("processing order must list every node once");
  std::vector<bool> seen(n, false);
  for (std::size_t k : order) {
    if (k >= n || seen[k]) throw InvalidArgument("processing order must be a permutation");
    seen[k] = true;
  }
  return {order.begin(), order.end()};
}

std::vector<AgentState> with_estimates(std::span<const AgentState> states,
                                       std::vector<Vector> estimates) {
  std::vector<AgentState> out(states.begin(), states.end());
  for (std::size_t k = 0; k < out.size(); ++k) {
    check_estimate(estimates[k], k);
    out[k].w = std::move(estimates[k]);
  }
  return out;
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kCSubspace:
      return "c_subspace";
    case Algorithm::kDSubspace:
      return "d_subspace";
    case Algorithm::kDiffusion:
      return "diffusion_baseline";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "c_subspace") return Algorithm::kCSubspace;
  if (name == "d_subspace") return Algorithm::kDSubspace;
  if (name == "diffusion_baseline") return Algorithm::kDiffusion;
  return std::nullopt;
}

GradientInput GradientInput::stochastic(std::span<const scenario::DataSample> samples) {
  GradientInput g;
  g.samples_ = samples;
  return g;
}

GradientInput GradientInput::exact(std::span<const scenario::RegressionTask> tasks) {
  GradientInput g;
  g.tasks_ = tasks;
  g.exact_ = true;
  return g;
}

std::size_t GradientInput::size() const noexcept {
  return exact_ ? tasks_.size() : samples_.size();
}

Vector GradientInput::gradient(std::size_t k, const Vector& w) const {
  return exact_ ? scenario::exact_gradient(w, tasks_[k])
                : scenario::stochastic_gradient(w, samples_[k]);
}

std::vector<AgentState> c_subspace_step(std::span<const AgentState> states,
                                        const GradientInput& grads,
                                        const linalg::Projector& global) {
  check_inputs(states, grads);
  const std::size_t n = states.size();
  if (static_cast<std::size_t>(global.dim()) != n) {
    throw DimensionMismatch(fmt::format("global projector is {}x{}, network has {} nodes",
                                        global.dim(), global.dim(), n));
  }
  const auto psi = adapt(states, grads);
  Matrix stacked(psi.front().size(), idx(n));
  for (std::size_t k = 0; k < n; ++k) stacked.col(idx(k)) = psi[k];
  const Matrix projected = linalg::project_rows(stacked, global);

  std::vector<Vector> next(n);
  for (std::size_t k = 0; k < n; ++k) next[k] = projected.col(idx(k));
  return with_estimates(states, std::move(next));
}

std::vector<AgentState> d_subspace_step(std::span<const AgentState> states,
                                        const GradientInput& grads,
                                        const network::Topology& topo,
                                        std::span<const scenario::LocalSubspace> locals,
                                        const network::CombinationMatrix& combination,
                                        DSubspaceWorkspace* workspace,
                                        std::span<const std::size_t> order) {
  check_inputs(states, grads);
  const std::size_t n = states.size();
  if (topo.node_count() != n || locals.size() != n) {
    throw DimensionMismatch(fmt::format("{} agents, {} topology nodes, {} local subspaces", n,
                                        topo.node_count(), locals.size()));
  }
  check_combination(combination, n);
  const auto sequence = processing_order(order, n);

  const auto psi = adapt(states, grads);
  const Index dim = psi.front().size();

  std::vector<Matrix> stacked(n);
  std::vector<Matrix> projected(n);
  for (std::size_t k : sequence) {
    const auto hood = topo.neighborhood(k);
    if (locals[k].node != k || static_cast<std::size_t>(locals[k].projector.dim()) != hood.size()) {
      throw DimensionMismatch(fmt::format(
          "local subspace of node {} does not match its neighborhood of size {}", k + 1,
          hood.size()));
    }
    stacked[k].resize(dim, idx(hood.size()));
    for (std::size_t j = 0; j < hood.size(); ++j) stacked[k].col(idx(j)) = psi[hood[j]];
    projected[k] = linalg::project_rows(stacked[k], locals[k].projector);
  }

  std::vector<std::vector<Vector>> extracted(n);
  std::vector<Vector> next(n);
  for (std::size_t k : sequence) {
    const auto hood = topo.neighborhood(k);
    extracted[k].resize(hood.size());
    Vector w = Vector::Zero(dim);
    for (std::size_t j = 0; j < hood.size(); ++j) {
      const std::size_t l = hood[j];
      extracted[k][j] = projected[l].col(idx(topo.column_index(l, k)));
      w += combination.weight(l, k) * extracted[k][j];
    }
    next[k] = std::move(w);
  }

  if (workspace != nullptr) {
    workspace->psi = psi;
    workspace->stacked = std::move(stacked);
    workspace->projected = std::move(projected);
    workspace->extracted = std::move(extracted);
  }
  return with_estimates(states, std::move(next));
}

std::vector<AgentState> diffusion_baseline_step(std::span<const AgentState> states,
                                                const GradientInput& grads,
                                                const network::Topology& topo,
                                                const network::CombinationMatrix& combination) {
  check_inputs(states, grads);
  const std::size_t n = states.size();
  if (topo.node_count() != n) {
    throw DimensionMismatch(
        fmt::format("{} agents but topology has {} nodes", n, topo.node_count()));
  }
  check_combination(combination, n);
  const auto psi = adapt(states, grads);
  std::vector<Vector> next(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vector w = Vector::Zero(psi.front().size());
    for (std::size_t l : topo.neighborhood(k)) w += combination.weight(l, k) * psi[l];
    next[k] = std::move(w);
  }
  return with_estimates(states, std::move(next));
}

Matrix stack_estimates(std::span<const AgentState> states) {
  if (states.empty()) return {};
  Matrix w(states.front().w.size(), idx(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k) w.col(idx(k)) = states[k].w;
  return w;
}

std::size_t transfers_per_iteration(Algorithm a, const network::Topology& topo,
                                    std::size_t dimension) {
  std::size_t neighbors = 0;
  for (std::size_t k = 0; k < topo.node_count(); ++k) neighbors += topo.neighborhood(k).size() - 1;
  switch (a) {
    case Algorithm::kDSubspace:
      return 2 * dimension * neighbors;
    case Algorithm::kDiffusion:
      return dimension * neighbors;
    case Algorithm::kCSubspace:
      return 2 * dimension * topo.node_count();
  }
  return 0;
}

}  // namespace dsub::algorithms
