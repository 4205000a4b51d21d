#include "dsub/scenario_io.hpp"

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "dsub/errors.hpp"

namespace dsub::scenario {

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-blank, non-comment line split into tokens.
  std::vector<std::string> next(const char* expecting) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream fields(line);
      std::vector<std::string> tokens;
      for (std::string t; fields >> t;) tokens.push_back(std::move(t));
      if (!tokens.empty()) return tokens;
    }
    throw FormatError(fmt::format("scenario dump: unexpected end of input, expected {}", expecting));
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError(fmt::format("scenario dump line {}: {}", line_no_, msg));
  }

  std::uint64_t to_uint(const std::string& tok) const {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) fail("bad integer '" + tok + "'");
    return v;
  }

  double to_real(const std::string& tok) const {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) fail("bad real '" + tok + "'");
    return v;
  }

  std::uint64_t keyed(const char* key) {
    const auto t = next(key);
    if (t.size() != 2 || t[0] != key) fail(fmt::format("expected `{} <value>`", key));
    return to_uint(t[1]);
  }

  Matrix block(const char* key, std::size_t rows, std::size_t cols) {
    const auto header = next(key);
    if (header.size() != 1 || header[0] != key) fail(fmt::format("expected `{}`", key));
    Matrix m(static_cast<linalg::Index>(rows), static_cast<linalg::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
      const auto t = next(key);
      if (t.size() != cols) fail(fmt::format("{} row needs {} values, got {}", key, cols, t.size()));
      for (std::size_t j = 0; j < cols; ++j) {
        m(static_cast<linalg::Index>(i), static_cast<linalg::Index>(j)) = to_real(t[j]);
      }
    }
    return m;
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

void write_block(std::ostream& out, const char* key, const Matrix& m) {
  out << key << '\n';
  for (linalg::Index i = 0; i < m.rows(); ++i) {
    for (linalg::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      out << fmt::format("{:.17g}", m(i, j));
    }
    out << '\n';
  }
}

}  // namespace

std::string to_string(LocalMode mode) {
  return mode == LocalMode::kDense ? "dense" : "support";
}

void write_scenario(std::ostream& out, const SubspaceModel& model, const network::Topology& topo,
                    LocalMode mode, const std::vector<LocalSubspace>& locals) {
  out << "# dsubspace scenario v1\n";
  out << "dimension " << model.dimension << '\n';
  out << "nodes " << model.nodes << '\n';
  out << "rank " << model.rank << '\n';
  out << "seed " << model.seed << '\n';
  out << "local_mode " << to_string(mode) << '\n';
  write_block(out, "basis", model.basis);
  write_block(out, "coefficients", model.coefficients);
  const auto edges = topo.edges();
  out << "edges " << edges.size() << '\n';
  network::write_edge_list(out, edges);
  for (const auto& local : locals) {
    out << "support " << local.node + 1;
    for (std::size_t row : local.basis_rows) out << ' ' << row + 1;
    out << '\n';
  }
}

ScenarioDump read_scenario(std::istream& in) {
  LineReader reader(in);
  ScenarioDump dump;
  auto& m = dump.model;
  m.dimension = reader.keyed("dimension");
  m.nodes = reader.keyed("nodes");
  m.rank = reader.keyed("rank");
  m.seed = reader.keyed("seed");
  if (m.dimension < 1 || m.nodes < 1 || m.rank < 1) reader.fail("sizes must be >= 1");

  const auto mode = reader.next("local_mode");
  if (mode.size() != 2 || mode[0] != "local_mode") reader.fail("expected `local_mode <mode>`");
  if (mode[1] == "dense") {
    dump.mode = LocalMode::kDense;
  } else if (mode[1] == "support") {
    dump.mode = LocalMode::kSupport;
  } else {
    reader.fail("unknown local_mode '" + mode[1] + "'");
  }

  m.basis = reader.block("basis", m.dimension, m.rank);
  m.coefficients = reader.block("coefficients", m.rank, m.nodes);
  refresh_optimum(m);

  const std::size_t edge_count = reader.keyed("edges");
  for (std::size_t e = 0; e < edge_count; ++e) {
    const auto t = reader.next("edge");
    if (t.size() != 2) reader.fail("expected `u v`");
    const auto u = reader.to_uint(t[0]);
    const auto v = reader.to_uint(t[1]);
    if (u < 1 || v < 1 || u > m.nodes || v > m.nodes) reader.fail("edge node id out of range");
    dump.edges.push_back({u - 1, v - 1});
  }

  dump.supports.resize(m.nodes);
  for (std::size_t k = 0; k < m.nodes; ++k) {
    const auto t = reader.next("support");
    if (t.size() < 2 || t[0] != "support") reader.fail("expected `support <node> <rows...>`");
    if (reader.to_uint(t[1]) != k + 1) reader.fail("support lines must list nodes in order");
    for (std::size_t i = 2; i < t.size(); ++i) {
      const auto row = reader.to_uint(t[i]);
      if (row < 1 || row > m.rank) reader.fail("support row out of range");
      dump.supports[k].push_back(row - 1);
    }
  }
  return dump;
}

}  // namespace dsub::scenario
