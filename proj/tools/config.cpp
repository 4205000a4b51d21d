#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include <fmt/format.h>

namespace dsub::cli {

namespace {

using experiment::CombinationRule;
using experiment::ExperimentConfig;
using experiment::Generator;
using experiment::GradientMode;
using experiment::InitMode;
using experiment::TopologyKind;

struct Entry {
  std::string value;
  std::size_t line = 0;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) out.push_back(trim(item));
  return out;
}

std::string where(const std::string& key, std::size_t line) {
  return line == 0 ? key : fmt::format("line {}: {}", line, key);
}

class Reader {
 public:
  Reader(std::string key, const Entry& e) : key_(std::move(key)), entry_(e) {}

  [[noreturn]] void bad(std::string_view expected) const {
    throw ParseError(fmt::format("{}: expected {}, got '{}'", where(key_, entry_.line), expected,
                                 entry_.value));
  }

  std::size_t count() const { return parse_count(entry_.value); }

  std::uint64_t u64() const {
    std::uint64_t v = 0;
    const auto& s = entry_.value;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) bad("an unsigned integer");
    return v;
  }

  double real() const { return parse_real(entry_.value); }

  std::vector<double> reals() const {
    std::vector<double> out;
    for (const auto& item : split_list(entry_.value)) out.push_back(parse_real(item));
    if (out.empty()) bad("a comma-separated list of reals");
    return out;
  }

  bool boolean() const {
    if (entry_.value == "true" || entry_.value == "1") return true;
    if (entry_.value == "false" || entry_.value == "0") return false;
    bad("true or false");
  }

  template <typename T>
  T choice(std::initializer_list<std::pair<std::string_view, T>> options) const {
    for (const auto& [name, value] : options) {
      if (entry_.value == name) return value;
    }
    std::string names;
    for (const auto& [name, value] : options) {
      if (!names.empty()) names += " | ";
      names += name;
    }
    bad(names);
  }

  const std::string& text() const { return entry_.value; }

 private:
  std::size_t parse_count(const std::string& s) const {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) bad("a non-negative integer");
    return v;
  }

  double parse_real(const std::string& s) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) bad("a finite real");
    return v;
  }

  std::string key_;
  const Entry& entry_;
};

using Setter = std::function<void(ExperimentConfig&, const Reader&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"scenario.dimension", [](auto& c, const Reader& r) { c.scenario.dimension = r.count(); }},
      {"scenario.nodes", [](auto& c, const Reader& r) { c.scenario.nodes = r.count(); }},
      {"scenario.rank", [](auto& c, const Reader& r) { c.scenario.rank = r.count(); }},
      {"scenario.generator",
       [](auto& c, const Reader& r) {
         c.scenario.generator =
             r.choice<Generator>({{"global", Generator::kGlobal}, {"clustered", Generator::kClustered}});
       }},
      {"scenario.clusters", [](auto& c, const Reader& r) { c.scenario.clusters = r.count(); }},
      {"scenario.local_mode",
       [](auto& c, const Reader& r) {
         c.scenario.local_mode = r.choice<scenario::LocalMode>(
             {{"dense", scenario::LocalMode::kDense}, {"support", scenario::LocalMode::kSupport}});
       }},
      {"scenario.rho", [](auto& c, const Reader& r) { c.scenario.rho = r.real(); }},
      {"scenario.noise_variance",
       [](auto& c, const Reader& r) { c.scenario.noise_variance = r.real(); }},
      {"scenario.topology",
       [](auto& c, const Reader& r) {
         c.scenario.topology = r.choice<TopologyKind>({{"ring", TopologyKind::kRing},
                                                       {"path", TopologyKind::kPath},
                                                       {"star", TopologyKind::kStar},
                                                       {"full", TopologyKind::kFull},
                                                       {"random", TopologyKind::kRandom},
                                                       {"file", TopologyKind::kFile}});
       }},
      {"scenario.edge_file", [](auto& c, const Reader& r) { c.scenario.edge_file = r.text(); }},
      {"scenario.edge_probability",
       [](auto& c, const Reader& r) { c.scenario.edge_probability = r.real(); }},
      {"scenario.min_neighborhood",
       [](auto& c, const Reader& r) { c.scenario.min_neighborhood = r.count(); }},
      {"scenario.seed", [](auto& c, const Reader& r) { c.scenario.seed = r.u64(); }},
      {"scenario.dump_file", [](auto& c, const Reader& r) { c.scenario.dump_file = r.text(); }},
      {"algorithm.list",
       [](auto& c, const Reader& r) {
         c.algorithm.algorithms.clear();
         for (const auto& name : split_list(r.text())) {
           const auto a = algorithms::parse_algorithm(name);
           if (!a) r.bad("c_subspace, d_subspace or diffusion_baseline");
           c.algorithm.algorithms.push_back(*a);
         }
       }},
      {"algorithm.mu", [](auto& c, const Reader& r) { c.algorithm.mu = r.reals(); }},
      {"algorithm.combination",
       [](auto& c, const Reader& r) {
         c.algorithm.combination =
             r.choice<CombinationRule>({{"uniform", CombinationRule::kUniform},
                                        {"metropolis", CombinationRule::kMetropolis},
                                        {"identity", CombinationRule::kIdentity}});
       }},
      {"algorithm.loading", [](auto& c, const Reader& r) { c.algorithm.loading = r.real(); }},
      {"algorithm.gradient",
       [](auto& c, const Reader& r) {
         c.algorithm.gradient = r.choice<GradientMode>(
             {{"stochastic", GradientMode::kStochastic}, {"exact", GradientMode::kExact}});
       }},
      {"algorithm.init",
       [](auto& c, const Reader& r) {
         c.algorithm.init = r.choice<InitMode>({{"zero", InitMode::kZero},
                                                {"gaussian", InitMode::kGaussian},
                                                {"optimal", InitMode::kOptimal}});
       }},
      {"run.iterations", [](auto& c, const Reader& r) { c.run.iterations = r.count(); }},
      {"run.runs", [](auto& c, const Reader& r) { c.run.runs = r.count(); }},
      {"run.window", [](auto& c, const Reader& r) { c.run.window = r.count(); }},
      {"run.threads", [](auto& c, const Reader& r) { c.run.threads = r.count(); }},
      {"output.dir", [](auto& c, const Reader& r) { c.output.dir = r.text(); }},
      {"output.per_node", [](auto& c, const Reader& r) { c.output.per_node = r.boolean(); }},
  };
  return table;
}

using EntryMap = std::map<std::string, Entry, std::less<>>;

// Anchors validation messages to the line a key was set on; keys left at
// their defaults report without a line.
class Checker {
 public:
  explicit Checker(const EntryMap* entries) : entries_(entries) {}

  void require(bool ok, const std::string& key, const std::string& message) const {
    if (!ok) throw ValidationError(fmt::format("{}: {}", anchor(key), message));
  }

 private:
  std::string anchor(const std::string& key) const {
    if (entries_ != nullptr) {
      if (const auto it = entries_->find(key); it != entries_->end()) {
        return where(key, it->second.line);
      }
    }
    return key;
  }

  const EntryMap* entries_;
};

void validate(const ExperimentConfig& c, const Checker& check) {
  const auto require = [&check](bool ok, const std::string& key, const std::string& message) {
    check.require(ok, key, message);
  };
  const auto& s = c.scenario;
  const auto& a = c.algorithm;
  const bool from_dump = !s.dump_file.empty();

  if (!from_dump) {
    require(s.dimension >= 1, "scenario.dimension", "must be >= 1");
    require(s.nodes >= 1, "scenario.nodes", "must be >= 1");
    require(s.rank >= 1, "scenario.rank", "must be >= 1");
    require(s.rank <= std::min(s.dimension, s.nodes), "scenario.rank",
            fmt::format("rank {} exceeds min(dimension={}, nodes={})", s.rank, s.dimension,
                        s.nodes));
    if (s.generator == Generator::kClustered) {
      require(s.clusters <= s.rank, "scenario.clusters",
              fmt::format("at most rank ({}) clusters", s.rank));
    }
    require(s.topology != TopologyKind::kFile || !s.edge_file.empty(), "scenario.edge_file",
            "required when scenario.topology = file");
    require(s.edge_probability >= 0.0 && s.edge_probability <= 1.0, "scenario.edge_probability",
            fmt::format("must lie in [0, 1], got {}", s.edge_probability));
    require(s.topology != TopologyKind::kRandom || s.min_neighborhood <= s.nodes,
            "scenario.min_neighborhood",
            fmt::format("cannot exceed scenario.nodes ({})", s.nodes));
  }
  require(s.rho >= 0.0 && s.rho < 1.0, "scenario.rho",
          fmt::format("must satisfy 0 <= rho < 1, got {}", s.rho));
  require(s.noise_variance >= 0.0, "scenario.noise_variance",
          fmt::format("must be >= 0, got {}", s.noise_variance));

  require(!a.algorithms.empty(), "algorithm.list", "must name at least one algorithm");
  for (std::size_t i = 0; i < a.algorithms.size(); ++i) {
    for (std::size_t j = i + 1; j < a.algorithms.size(); ++j) {
      require(a.algorithms[i] != a.algorithms[j], "algorithm.list",
              fmt::format("'{}' listed twice", algorithms::to_string(a.algorithms[i])));
    }
  }
  require(!a.mu.empty(), "algorithm.mu", "must not be empty");
  for (double mu : a.mu) {
    require(mu > 0.0, "algorithm.mu", fmt::format("must be > 0, got {}", mu));
  }
  if (!from_dump) {
    require(a.mu.size() == 1 || a.mu.size() == s.nodes, "algorithm.mu",
            fmt::format("give one step size or one per node ({}), got {}", s.nodes, a.mu.size()));
  }
  require(a.loading >= 0.0, "algorithm.loading", fmt::format("must be >= 0, got {}", a.loading));

  require(c.run.runs >= 1, "run.runs", "must be >= 1");
  require(c.run.threads >= 1, "run.threads", "must be >= 1");
  require(c.run.window <= c.run.iterations + 1, "run.window",
          fmt::format("cannot exceed iterations + 1 ({})", c.run.iterations + 1));
}

}  // namespace

void validate_config(const ExperimentConfig& config) { validate(config, Checker(nullptr)); }

ExperimentConfig parse_config(std::string_view text, bool strict) {
  EntryMap entries;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ParseError(fmt::format("line {}: expected `section.key = value`", line_no));
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || key.find('.') == std::string::npos) {
      throw ParseError(fmt::format("line {}: key '{}' must look like section.key", line_no, key));
    }
    if (value.empty()) throw ParseError(fmt::format("line {}: {} has no value", line_no, key));
    if (const auto it = entries.find(key); it != entries.end()) {
      throw ParseError(fmt::format("line {}: {} already set on line {}", line_no, key,
                                   it->second.line));
    }
    entries.emplace(key, Entry{value, line_no});
  }

  ExperimentConfig config;
  for (const auto& [key, entry] : entries) {
    const auto it = setters().find(key);
    if (it == setters().end()) {
      if (strict) throw UnknownKey(fmt::format("line {}: unknown key '{}'", entry.line, key));
      continue;
    }
    it->second(config, Reader(key, entry));
  }

  validate(config, Checker(&entries));
  return config;
}

}  // namespace dsub::cli
