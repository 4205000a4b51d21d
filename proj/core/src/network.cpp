#include "dsub/network.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>

#include <fmt/format.h>

#include "dsub/errors.hpp"

namespace dsub::network {

namespace {

constexpr double kWeightTolerance = 1e-12;

bool connected(const std::vector<std::vector<std::size_t>>& hoods) {
  if (hoods.empty()) return true;
  std::vector<bool> seen(hoods.size(), false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t visited = 1;
  while (!frontier.empty()) {
    const std::size_t k = frontier.front();
    frontier.pop();
    for (std::size_t l : hoods[k]) {
      if (!seen[l]) {
        seen[l] = true;
        ++visited;
        frontier.push(l);
      }
    }
  }
  return visited == hoods.size();
}

}  // namespace

Topology Topology::from_edges(std::span<const Edge> edges, std::size_t node_count) {
  if (node_count == 0) throw InvalidNodeIndex("network needs at least one node");
  std::vector<std::vector<std::size_t>> hoods(node_count);
  for (std::size_t k = 0; k < node_count; ++k) hoods[k].push_back(k);
  for (const Edge& e : edges) {
    if (e.u >= node_count || e.v >= node_count) {
      throw InvalidNodeIndex(fmt::format("edge ({}, {}) references a node outside 1..{}",
                                         e.u + 1, e.v + 1, node_count));
    }
    if (e.u == e.v) continue;
    hoods[e.u].push_back(e.v);
    hoods[e.v].push_back(e.u);
  }
  for (auto& h : hoods) {
    std::sort(h.begin(), h.end());
    h.erase(std::unique(h.begin(), h.end()), h.end());
  }
  if (!connected(hoods)) {
    throw DisconnectedGraph(fmt::format("graph with {} nodes and {} edges is not connected",
                                        node_count, edges.size()));
  }
  return Topology(std::move(hoods));
}

void Topology::check_node(std::size_t k) const {
  if (k >= node_count()) {
    throw InvalidNodeIndex(fmt::format("node {} outside 0..{}", k, node_count() - 1));
  }
}

std::span<const std::size_t> Topology::neighborhood(std::size_t k) const {
  check_node(k);
  return neighborhoods_[k];
}

bool Topology::is_neighbor(std::size_t k, std::size_t l) const {
  check_node(k);
  check_node(l);
  return std::binary_search(neighborhoods_[k].begin(), neighborhoods_[k].end(), l);
}

std::size_t Topology::column_index(std::size_t k, std::size_t l) const {
  check_node(k);
  const auto& h = neighborhoods_[k];
  const auto it = std::lower_bound(h.begin(), h.end(), l);
  if (it == h.end() || *it != l) {
    throw NotANeighbor(fmt::format("node {} is not in the neighborhood of node {}", l, k));
  }
  return static_cast<std::size_t>(it - h.begin());
}

std::vector<Edge> Topology::edges() const {
  std::vector<Edge> out;
  for (std::size_t k = 0; k < node_count(); ++k) {
    for (std::size_t l : neighborhoods_[k]) {
      if (l > k) out.push_back({k, l});
    }
  }
  return out;
}

std::size_t Topology::max_neighborhood() const {
  std::size_t best = 0;
  for (const auto& h : neighborhoods_) best = std::max(best, h.size());
  return best;
}

std::size_t Topology::min_neighborhood() const {
  std::size_t best = neighborhoods_.empty() ? 0 : neighborhoods_.front().size();
  for (const auto& h : neighborhoods_) best = std::min(best, h.size());
  return best;
}

Topology ring(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t k = 0; k + 1 < n; ++k) e.push_back({k, k + 1});
  if (n > 2) e.push_back({n - 1, 0});
  return Topology::from_edges(e, n);
}

Topology path(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t k = 0; k + 1 < n; ++k) e.push_back({k, k + 1});
  return Topology::from_edges(e, n);
}

Topology star(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t k = 1; k < n; ++k) e.push_back({0, k});
  return Topology::from_edges(e, n);
}

Topology fully_connected(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k + 1; l < n; ++l) e.push_back({k, l});
  }
  return Topology::from_edges(e, n);
}

Topology random_connected(std::size_t n, double edge_probability, std::size_t min_neighborhood,
                          std::mt19937_64& rng) {
  if (n == 0) throw InvalidNodeIndex("network needs at least one node");
  if (!(edge_probability >= 0.0 && edge_probability <= 1.0)) {
    throw InvalidArgument(fmt::format("edge probability {} outside [0, 1]", edge_probability));
  }
  if (min_neighborhood > n) {
    throw InvalidArgument(
        fmt::format("minimum neighborhood {} exceeds node count {}", min_neighborhood, n));
  }
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  std::vector<std::size_t> degree(n, 0);
  auto link = [&](std::size_t a, std::size_t b) {
    if (a == b || adj[a][b]) return;
    adj[a][b] = adj[b][a] = true;
    ++degree[a];
    ++degree[b];
  };

  // Random spanning tree: attach each node of a shuffled order to an
  // earlier one.
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    link(order[i], order[pick(rng)]);
  }

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (coin(rng) < edge_probability) link(a, b);
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    while (degree[k] + 1 < min_neighborhood) {
      std::vector<std::size_t> candidates;
      for (std::size_t l = 0; l < n; ++l) {
        if (l != k && !adj[k][l]) candidates.push_back(l);
      }
      std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
      link(k, candidates[pick(rng)]);
    }
  }

  std::vector<Edge> edges;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (adj[a][b]) edges.push_back({a, b});
    }
  }
  return Topology::from_edges(edges, n);
}

std::vector<Edge> read_edge_list(std::istream& in, std::size_t* node_count) {
  std::vector<Edge> edges;
  std::size_t max_id = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long u = 0;
    long long v = 0;
    if (!(fields >> u)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw FormatError(fmt::format("edge list line {}: expected `u v`", line_no));
    }
    std::string extra;
    if (!(fields >> v) || (fields >> extra)) {
      throw FormatError(fmt::format("edge list line {}: expected exactly two node ids", line_no));
    }
    if (u < 1 || v < 1) {
      throw InvalidNodeIndex(fmt::format("edge list line {}: node ids are 1-based", line_no));
    }
    edges.push_back({static_cast<std::size_t>(u - 1), static_cast<std::size_t>(v - 1)});
    max_id = std::max({max_id, static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
  }
  if (node_count != nullptr) *node_count = max_id;
  return edges;
}

void write_edge_list(std::ostream& out, std::span<const Edge> edges) {
  for (const Edge& e : edges) out << e.u + 1 << ' ' << e.v + 1 << '\n';
}

CombinationMatrix uniform_combination(const Topology& topo) {
  const auto n = static_cast<linalg::Index>(topo.node_count());
  linalg::Matrix a = linalg::Matrix::Zero(n, n);
  for (std::size_t k = 0; k < topo.node_count(); ++k) {
    const auto hood = topo.neighborhood(k);
    const double w = 1.0 / static_cast<double>(hood.size());
    for (std::size_t l : hood) a(static_cast<linalg::Index>(l), static_cast<linalg::Index>(k)) = w;
  }
  return CombinationMatrix(std::move(a));
}

CombinationMatrix metropolis_combination(const Topology& topo) {
  const auto n = static_cast<linalg::Index>(topo.node_count());
  linalg::Matrix a = linalg::Matrix::Zero(n, n);
  for (std::size_t k = 0; k < topo.node_count(); ++k) {
    const auto hood_k = topo.neighborhood(k);
    double off = 0.0;
    for (std::size_t l : hood_k) {
      if (l == k) continue;
      const double w =
          1.0 / static_cast<double>(std::max(hood_k.size(), topo.neighborhood(l).size()));
      a(static_cast<linalg::Index>(l), static_cast<linalg::Index>(k)) = w;
      off += w;
    }
    a(static_cast<linalg::Index>(k), static_cast<linalg::Index>(k)) = 1.0 - off;
  }
  return CombinationMatrix(std::move(a));
}

CombinationMatrix identity_combination(const Topology& topo) {
  const auto n = static_cast<linalg::Index>(topo.node_count());
  return CombinationMatrix(linalg::Matrix::Identity(n, n));
}

std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::kShape:
      return "shape";
    case ConstraintKind::kNegative:
      return "negative-weight";
    case ConstraintKind::kColumnSum:
      return "column-sum";
    case ConstraintKind::kOutsideNeighborhood:
      return "outside-neighborhood";
  }
  return "unknown";
}

std::vector<Violation> validate_combination(const linalg::Matrix& a, const Topology& topo) {
  std::vector<Violation> out;
  const auto n = static_cast<linalg::Index>(topo.node_count());
  if (a.rows() != n || a.cols() != n) {
    out.push_back({ConstraintKind::kShape, 0, 0,
                   static_cast<double>(std::abs(a.rows() - n) + std::abs(a.cols() - n))});
    return out;
  }
  for (linalg::Index k = 0; k < n; ++k) {
    double sum = 0.0;
    for (linalg::Index l = 0; l < n; ++l) {
      const double w = a(l, k);
      sum += w;
      const auto lu = static_cast<std::size_t>(l);
      const auto ku = static_cast<std::size_t>(k);
      if (!(w >= -kWeightTolerance)) out.push_back({ConstraintKind::kNegative, lu, ku, std::abs(w)});
      if (std::abs(w) > kWeightTolerance && !topo.is_neighbor(ku, lu)) {
        out.push_back({ConstraintKind::kOutsideNeighborhood, lu, ku, std::abs(w)});
      }
    }
    const double dev = std::abs(sum - 1.0);
    if (!(dev <= kWeightTolerance)) {
      out.push_back({ConstraintKind::kColumnSum, 0, static_cast<std::size_t>(k), dev});
    }
  }
  return out;
}

}  // namespace dsub::network
