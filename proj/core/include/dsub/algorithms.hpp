#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsub/linalg.hpp"
#include "dsub/network.hpp"
#include "dsub/scenario.hpp"

namespace dsub::algorithms {

using linalg::Matrix;
using linalg::Vector;

/// Estimates beyond this norm are treated as divergence.
inline constexpr double kDivergenceBound = 1e9;

struct AgentState {
  std::size_t node = 0;
  Vector w;
  double mu = 0.0;
};

enum class Algorithm { kCSubspace, kDSubspace, kDiffusion };

[[nodiscard]] std::string to_string(Algorithm a);
[[nodiscard]] std::optional<Algorithm> parse_algorithm(std::string_view name);

/// Per-node gradient source for one iteration: either the stochastic
/// gradient at each node's current sample or the exact gradient of each
/// node's expected cost. Holds views; the referenced data must outlive it.
class GradientInput {
 public:
  [[nodiscard]] static GradientInput stochastic(std::span<const scenario::DataSample> samples);
  [[nodiscard]] static GradientInput exact(std::span<const scenario::RegressionTask> tasks);

  [[nodiscard]] std::size_t size() const noexcept;
  [[nodiscard]] Vector gradient(std::size_t k, const Vector& w) const;

 private:
  std::span<const scenario::DataSample> samples_;
  std::span<const scenario::RegressionTask> tasks_;
  bool exact_ = false;
};

/// Intermediate quantities of one distributed step, indexed by node.
struct DSubspaceWorkspace {
  std::vector<Vector> psi;        // adapted estimates
  std::vector<Matrix> stacked;    // L x |N_k|, neighbor psi in ascending order
  std::vector<Matrix> projected;  // stacked * local projector
  /// extracted[k][j]: node k's own column taken from the projected matrix
  /// of its j-th neighbor.
  std::vector<std::vector<Vector>> extracted;
};

/// Centralized step: adapt every node, stack the adapted estimates as
/// columns, and right-multiply by the global projector.
[[nodiscard]] std::vector<AgentState> c_subspace_step(std::span<const AgentState> states,
                                                      const GradientInput& grads,
                                                      const linalg::Projector& global);

/// Distributed step. Synchronous: every adapted estimate is computed from
/// the iteration-n states before any stacking. Each node k stacks its
/// neighbors' adapted estimates, projects with its local projector, and
/// then combines the column that belongs to k from every neighbor's
/// projected matrix with weights a(l, k).
///
/// `order` permutes the node processing order inside each phase; the
/// result does not depend on it.
[[nodiscard]] std::vector<AgentState> d_subspace_step(
    std::span<const AgentState> states, const GradientInput& grads,
    const network::Topology& topo, std::span<const scenario::LocalSubspace> locals,
    const network::CombinationMatrix& combination, DSubspaceWorkspace* workspace = nullptr,
    std::span<const std::size_t> order = {});

/// Adapt-then-combine diffusion without projection.
[[nodiscard]] std::vector<AgentState> diffusion_baseline_step(
    std::span<const AgentState> states, const GradientInput& grads,
    const network::Topology& topo, const network::CombinationMatrix& combination);

/// Columns are node estimates: L x N.
[[nodiscard]] Matrix stack_estimates(std::span<const AgentState> states);

/// Scalars exchanged per iteration across the whole network.
///   d_subspace: each node sends L(|N_k|-1) and receives L(|N_k|-1)
///   diffusion:  one exchange, L(|N_k|-1) per node
///   c_subspace: each node uploads L and downloads L from a fusion center
[[nodiscard]] std::size_t transfers_per_iteration(Algorithm a, const network::Topology& topo,
                                                  std::size_t dimension);

}  // namespace dsub::algorithms
