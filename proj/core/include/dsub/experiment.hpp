#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dsub/algorithms.hpp"
#include "dsub/linalg.hpp"
#include "dsub/metrics.hpp"
#include "dsub/network.hpp"
#include "dsub/scenario.hpp"

namespace dsub::experiment {

enum class Generator { kGlobal, kClustered };
enum class TopologyKind { kRing, kPath, kStar, kFull, kRandom, kFile };
enum class CombinationRule { kUniform, kMetropolis, kIdentity };
enum class GradientMode { kStochastic, kExact };
enum class InitMode { kZero, kGaussian, kOptimal };

struct ScenarioConfig {
  std::size_t dimension = 10;
  std::size_t nodes = 10;
  std::size_t rank = 2;
  Generator generator = Generator::kGlobal;
  std::size_t clusters = 0;  // 0: one cluster per rank
  scenario::LocalMode local_mode = scenario::LocalMode::kDense;
  double rho = 0.0;
  double noise_variance = 0.01;
  TopologyKind topology = TopologyKind::kRing;
  std::string edge_file;
  double edge_probability = 0.3;
  std::size_t min_neighborhood = 3;
  std::uint64_t seed = 1;
  std::string dump_file;  // when set, model and topology come from a dump
};

struct AlgorithmConfig {
  std::vector<algorithms::Algorithm> algorithms = {algorithms::Algorithm::kCSubspace,
                                                   algorithms::Algorithm::kDSubspace,
                                                   algorithms::Algorithm::kDiffusion};
  std::vector<double> mu = {0.01};  // one value, or one per node
  CombinationRule combination = CombinationRule::kUniform;
  double loading = 0.0;
  GradientMode gradient = GradientMode::kStochastic;
  InitMode init = InitMode::kZero;
};

struct RunConfig {
  std::size_t iterations = 1000;
  std::size_t runs = 10;
  std::size_t window = 0;  // 0: metrics::default_window
  std::size_t threads = 1;
};

struct OutputConfig {
  std::string dir = ".";
  bool per_node = false;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  AlgorithmConfig algorithm;
  RunConfig run;
  OutputConfig output;
};

/// Structures shared by every run of an experiment.
struct PreparedScenario {
  scenario::SubspaceModel model;
  network::Topology topology;
  scenario::LocalMode mode;
  std::vector<scenario::LocalSubspace> locals;
  std::vector<linalg::Projector> global;  // empty unless c_subspace is requested
  network::CombinationMatrix combination;
  std::vector<scenario::RegressionTask> tasks;
  std::vector<double> mu;  // one per node
};

[[nodiscard]] std::string to_string(CombinationRule rule);

/// Builds model, topology, local subspaces and projectors. Every structural
/// error surfaces here, before any iteration runs.
[[nodiscard]] PreparedScenario prepare_scenario(const ExperimentConfig& config);

[[nodiscard]] network::Topology build_topology(const ScenarioConfig& config);

[[nodiscard]] network::CombinationMatrix make_combination(CombinationRule rule,
                                                          const network::Topology& topo);

struct AlgorithmResult {
  algorithms::Algorithm algorithm;
  metrics::MsdTrace trace;  // averaged over all runs
  std::size_t window = 0;
  double steady_state_db = 0.0;
  std::size_t transfers_per_iteration = 0;
};

struct ExperimentResult {
  std::vector<AlgorithmResult> results;
};

/// Monte-Carlo simulation. Run r draws node k's samples from the stream
/// (seed, data, r, k); all algorithms in a run consume the same samples and
/// start from the same estimates. Traces are averaged in ascending run
/// order, so the output does not depend on the thread count. Divergence is
/// reported for the lowest failing run as DivergenceDetected carrying the
/// algorithm, run and iteration.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config);
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config,
                                              const PreparedScenario& prepared);

/// One Monte-Carlo run; returns one single-run trace per configured algorithm.
[[nodiscard]] std::vector<metrics::MsdTrace> run_single(const ExperimentConfig& config,
                                                        const PreparedScenario& prepared,
                                                        std::size_t run);

}  // namespace dsub::experiment
