#pragma once

#include <cstddef>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dsub/linalg.hpp"

namespace dsub::network {

/// Undirected edge between two 0-based node ids.
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Connected undirected graph with closed neighborhoods.
///
/// Node ids are 0-based in the API. Every neighborhood contains the node
/// itself and is sorted ascending; the position of a neighbor inside that
/// sorted list is the column it occupies in the node's stacked matrices.
/// External text formats use 1-based ids.
class Topology {
 public:
  /// Throws InvalidNodeIndex for ids >= node_count and DisconnectedGraph
  /// when the graph is not connected. Self-loops and duplicate edges are
  /// accepted and ignored.
  [[nodiscard]] static Topology from_edges(std::span<const Edge> edges, std::size_t node_count);

  [[nodiscard]] std::size_t node_count() const noexcept { return neighborhoods_.size(); }

  /// Sorted closed neighborhood of k (includes k).
  [[nodiscard]] std::span<const std::size_t> neighborhood(std::size_t k) const;

  [[nodiscard]] bool is_neighbor(std::size_t k, std::size_t l) const;

  /// 0-based position of l inside the sorted neighborhood of k.
  /// Throws NotANeighbor when l is not in the neighborhood of k.
  [[nodiscard]] std::size_t column_index(std::size_t k, std::size_t l) const;

  /// Edges with u < v in lexicographic order; self-loops are not listed.
  [[nodiscard]] std::vector<Edge> edges() const;

  [[nodiscard]] std::size_t max_neighborhood() const;
  [[nodiscard]] std::size_t min_neighborhood() const;

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  explicit Topology(std::vector<std::vector<std::size_t>> hoods)
      : neighborhoods_(std::move(hoods)) {}
  void check_node(std::size_t k) const;

  std::vector<std::vector<std::size_t>> neighborhoods_;
};

// Standard shapes.
[[nodiscard]] Topology ring(std::size_t n);
[[nodiscard]] Topology path(std::size_t n);
[[nodiscard]] Topology star(std::size_t n);
[[nodiscard]] Topology fully_connected(std::size_t n);

/// Random connected graph: a random spanning tree, plus each remaining pair
/// joined with probability edge_probability, then extra random edges until
/// every neighborhood has at least min_neighborhood members.
[[nodiscard]] Topology random_connected(std::size_t n, double edge_probability,
                                        std::size_t min_neighborhood, std::mt19937_64& rng);

/// Edge list text: one `u v` pair per line, 1-based, `#` starts a comment.
/// Returns 0-based edges; node_count receives the largest id seen.
[[nodiscard]] std::vector<Edge> read_edge_list(std::istream& in, std::size_t* node_count = nullptr);
void write_edge_list(std::ostream& out, std::span<const Edge> edges);

/// Combination weights: entry (l, k) is the weight node k gives to the
/// contribution of neighbor l.
class CombinationMatrix {
 public:
  explicit CombinationMatrix(linalg::Matrix a) : weights_(std::move(a)) {}
  [[nodiscard]] const linalg::Matrix& matrix() const noexcept { return weights_; }
  [[nodiscard]] double weight(std::size_t l, std::size_t k) const {
    return weights_(static_cast<linalg::Index>(l), static_cast<linalg::Index>(k));
  }
  [[nodiscard]] std::size_t size() const noexcept {
    return static_cast<std::size_t>(weights_.rows());
  }

 private:
  linalg::Matrix weights_;
};

[[nodiscard]] CombinationMatrix uniform_combination(const Topology& topo);
[[nodiscard]] CombinationMatrix metropolis_combination(const Topology& topo);
[[nodiscard]] CombinationMatrix identity_combination(const Topology& topo);

enum class ConstraintKind { kShape, kNegative, kColumnSum, kOutsideNeighborhood };

[[nodiscard]] std::string to_string(ConstraintKind kind);

struct Violation {
  ConstraintKind kind;
  std::size_t l = 0;  // row; unused for column sums
  std::size_t k = 0;  // column
  double magnitude = 0.0;
};

/// Lists every breach of: non-negative weights, unit column sums, and zero
/// weight outside the neighborhood. Empty means valid (tolerance 1e-12).
[[nodiscard]] std::vector<Violation> validate_combination(const linalg::Matrix& a,
                                                          const Topology& topo);

}  // namespace dsub::network
