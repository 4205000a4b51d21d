#include "dsub/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <future>

#include <fmt/format.h>

#include "dsub/errors.hpp"
#include "dsub/random.hpp"
#include "dsub/scenario_io.hpp"

namespace dsub::experiment {

namespace {

using algorithms::AgentState;
using algorithms::Algorithm;

std::vector<AgentState> initial_states(const ExperimentConfig& config,
                                       const PreparedScenario& prepared, std::size_t run) {
  const auto& model = prepared.model;
  std::vector<AgentState> states(model.nodes);
  Rng rng = make_stream(model.seed, StreamRole::kInit, run, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < model.nodes; ++k) {
    states[k].node = k;
    states[k].mu = prepared.mu[k];
    switch (config.algorithm.init) {
      case InitMode::kZero:
        states[k].w = linalg::Vector::Zero(static_cast<linalg::Index>(model.dimension));
        break;
      case InitMode::kGaussian:
        states[k].w.resize(static_cast<linalg::Index>(model.dimension));
        for (auto& x : states[k].w) x = normal(rng);
        break;
      case InitMode::kOptimal:
        states[k].w = model.optimum(k);
        break;
    }
  }
  return states;
}

void record(metrics::MsdTrace& trace, const std::vector<AgentState>& states,
            const linalg::Matrix& w_star, bool per_node) {
  const linalg::Vector dev = metrics::node_msd(algorithms::stack_estimates(states), w_star);
  trace.linear.push_back(dev.mean());
  if (per_node) trace.per_node.insert(trace.per_node.end(), dev.begin(), dev.end());
}

}  // namespace

std::string to_string(CombinationRule rule) {
  switch (rule) {
    case CombinationRule::kUniform:
      return "uniform";
    case CombinationRule::kMetropolis:
      return "metropolis";
    case CombinationRule::kIdentity:
      return "identity";
  }
  return "unknown";
}

network::Topology build_topology(const ScenarioConfig& config) {
  const std::size_t n = config.nodes;
  switch (config.topology) {
    case TopologyKind::kRing:
      return network::ring(n);
    case TopologyKind::kPath:
      return network::path(n);
    case TopologyKind::kStar:
      return network::star(n);
    case TopologyKind::kFull:
      return network::fully_connected(n);
    case TopologyKind::kRandom: {
      Rng rng = make_stream(config.seed, StreamRole::kTopology, 0, 0);
      return network::random_connected(n, config.edge_probability, config.min_neighborhood, rng);
    }
    case TopologyKind::kFile: {
      std::ifstream in(config.edge_file);
      if (!in) throw FormatError(fmt::format("cannot open edge list '{}'", config.edge_file));
      std::size_t seen = 0;
      const auto edges = network::read_edge_list(in, &seen);
      if (seen > n) {
        throw InvalidNodeIndex(
            fmt::format("edge list '{}' references node {} but the network has {} nodes",
                        config.edge_file, seen, n));
      }
      return network::Topology::from_edges(edges, n);
    }
  }
  throw InvalidArgument("unknown topology kind");
}

network::CombinationMatrix make_combination(CombinationRule rule, const network::Topology& topo) {
  switch (rule) {
    case CombinationRule::kUniform:
      return network::uniform_combination(topo);
    case CombinationRule::kMetropolis:
      return network::metropolis_combination(topo);
    case CombinationRule::kIdentity:
      return network::identity_combination(topo);
  }
  throw InvalidArgument("unknown combination rule");
}

PreparedScenario prepare_scenario(const ExperimentConfig& config) {
  const auto& sc = config.scenario;
  scenario::SubspaceModel model;
  std::vector<network::Edge> edges;
  scenario::LocalMode mode = sc.local_mode;
  std::vector<std::vector<std::size_t>> dumped_supports;

  std::optional<network::Topology> topo;
  if (!sc.dump_file.empty()) {
    std::ifstream in(sc.dump_file);
    if (!in) throw FormatError(fmt::format("cannot open scenario dump '{}'", sc.dump_file));
    auto dump = scenario::read_scenario(in);
    model = std::move(dump.model);
    mode = dump.mode;
    dumped_supports = std::move(dump.supports);
    topo = network::Topology::from_edges(dump.edges, model.nodes);
  } else {
    topo = build_topology(sc);
    if (sc.generator == Generator::kGlobal) {
      model = scenario::generate_global_subspace(sc.dimension, sc.nodes, sc.rank, sc.seed);
    } else {
      const std::size_t clusters = sc.clusters == 0 ? sc.rank : sc.clusters;
      model = scenario::generate_clustered_coefficients(sc.dimension, sc.nodes, sc.rank, *topo,
                                                        sc.seed, clusters);
    }
  }

  const double loading = config.algorithm.loading;
  auto locals = scenario::derive_local_subspaces(model, *topo, mode, loading);
  if (!dumped_supports.empty()) {
    for (std::size_t k = 0; k < locals.size(); ++k) {
      if (locals[k].basis_rows != dumped_supports[k]) {
        throw FormatError(
            fmt::format("scenario dump support of node {} disagrees with its coefficients", k + 1));
      }
    }
  }

  std::vector<linalg::Projector> global;
  const auto& algs = config.algorithm.algorithms;
  if (std::find(algs.begin(), algs.end(), Algorithm::kCSubspace) != algs.end()) {
    global.push_back(linalg::projector_from_coefficients(model.coefficients, loading));
  }

  std::vector<double> mu = config.algorithm.mu;
  if (mu.size() == 1) {
    mu.assign(model.nodes, mu.front());
  } else if (mu.size() != model.nodes) {
    throw DimensionMismatch(
        fmt::format("{} step sizes given for {} nodes", mu.size(), model.nodes));
  }

  auto combination = make_combination(config.algorithm.combination, *topo);
  auto tasks = scenario::make_tasks(model, scenario::ar1_covariance(model.dimension, sc.rho),
                                    sc.noise_variance);
  return PreparedScenario{std::move(model), std::move(*topo), mode,
                          std::move(locals), std::move(global), std::move(combination),
                          std::move(tasks), std::move(mu)};
}

std::vector<metrics::MsdTrace> run_single(const ExperimentConfig& config,
                                          const PreparedScenario& prepared, std::size_t run) {
  const auto& algs = config.algorithm.algorithms;
  const auto& model = prepared.model;
  const bool per_node = config.output.per_node;
  const std::size_t iterations = config.run.iterations;

  const auto init = initial_states(config, prepared, run);
  std::vector<std::vector<AgentState>> states(algs.size(), init);
  std::vector<metrics::MsdTrace> traces(algs.size());
  for (std::size_t a = 0; a < algs.size(); ++a) {
    traces[a].label = algorithms::to_string(algs[a]);
    traces[a].first_run = run;
    traces[a].run_count = 1;
    traces[a].node_count = model.nodes;
    traces[a].linear.reserve(iterations + 1);
    record(traces[a], states[a], model.w_star, per_node);
  }

  const bool exact = config.algorithm.gradient == GradientMode::kExact;
  std::vector<Rng> streams;
  std::vector<scenario::DataSample> samples(model.nodes);
  if (!exact) {
    streams.reserve(model.nodes);
    for (std::size_t k = 0; k < model.nodes; ++k) {
      streams.push_back(make_stream(model.seed, StreamRole::kData, run, k));
    }
  }

  for (std::size_t n = 0; n < iterations; ++n) {
    if (!exact) {
      for (std::size_t k = 0; k < model.nodes; ++k) {
        samples[k] = scenario::draw_sample(prepared.tasks[k], streams[k], n);
      }
    }
    const auto grads = exact ? algorithms::GradientInput::exact(prepared.tasks)
                             : algorithms::GradientInput::stochastic(samples);
    for (std::size_t a = 0; a < algs.size(); ++a) {
      try {
        switch (algs[a]) {
          case Algorithm::kCSubspace:
            states[a] = algorithms::c_subspace_step(states[a], grads, prepared.global.front());
            break;
          case Algorithm::kDSubspace:
            states[a] = algorithms::d_subspace_step(states[a], grads, prepared.topology,
                                                    prepared.locals, prepared.combination);
            break;
          case Algorithm::kDiffusion:
            states[a] = algorithms::diffusion_baseline_step(states[a], grads, prepared.topology,
                                                            prepared.combination);
            break;
        }
      } catch (const DivergenceDetected& e) {
        throw DivergenceDetected(
            fmt::format("{} diverged in run {} at iteration {}: {}", traces[a].label, run + 1,
                        n + 1, e.what()),
            traces[a].label, run, n + 1, e.node());
      }
      record(traces[a], states[a], model.w_star, per_node);
    }
  }
  return traces;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, prepare_scenario(config));
}

ExperimentResult run_experiment(const ExperimentConfig& config, const PreparedScenario& prepared) {
  const std::size_t runs = config.run.runs;
  if (runs == 0) throw InvalidArgument("at least one Monte-Carlo run is required");
  const std::size_t threads = std::max<std::size_t>(1, config.run.threads);

  std::vector<std::vector<metrics::MsdTrace>> per_run(runs);
  for (std::size_t start = 0; start < runs; start += threads) {
    const std::size_t stop = std::min(runs, start + threads);
    if (threads == 1) {
      per_run[start] = run_single(config, prepared, start);
      continue;
    }
    std::vector<std::future<std::vector<metrics::MsdTrace>>> batch;
    for (std::size_t r = start; r < stop; ++r) {
      batch.push_back(std::async(std::launch::async, [&config, &prepared, r] {
        return run_single(config, prepared, r);
      }));
    }
    // get() in run order rethrows the lowest failing run first.
    for (std::size_t r = start; r < stop; ++r) per_run[r] = batch[r - start].get();
  }

  ExperimentResult result;
  const auto& algs = config.algorithm.algorithms;
  for (std::size_t a = 0; a < algs.size(); ++a) {
    std::vector<metrics::MsdTrace> traces;
    traces.reserve(runs);
    for (std::size_t r = 0; r < runs; ++r) traces.push_back(std::move(per_run[r][a]));
    AlgorithmResult ar{algs[a], metrics::average_traces(traces), 0, 0.0, 0};
    ar.window = config.run.window == 0 ? metrics::default_window(ar.trace.size())
                                       : config.run.window;
    ar.steady_state_db = metrics::steady_state_msd(ar.trace, ar.window);
    ar.transfers_per_iteration = algorithms::transfers_per_iteration(
        algs[a], prepared.topology, prepared.model.dimension);
    result.results.push_back(std::move(ar));
  }
  return result;
}

}  // namespace dsub::experiment
