#include <benchmark/benchmark.h>

#include "dsub/algorithms.hpp"
#include "dsub/network.hpp"
#include "dsub/scenario.hpp"

namespace {

using namespace dsub;

struct Setup {
  explicit Setup(std::size_t nodes)
      : model(scenario::generate_global_subspace(10, nodes, 2, 5)),
        topo(network::ring(nodes)),
        locals(scenario::derive_local_subspaces(model, topo, scenario::LocalMode::kDense, 0.0)),
        global(linalg::projector_from_coefficients(model.coefficients, 0.0)),
        combination(network::uniform_combination(topo)),
        tasks(scenario::make_tasks(model, linalg::Matrix::Identity(10, 10), 0.01)) {
    for (std::size_t k = 0; k < nodes; ++k) states.push_back({k, linalg::Vector::Zero(10), 0.05});
  }
  scenario::SubspaceModel model;
  network::Topology topo;
  std::vector<scenario::LocalSubspace> locals;
  linalg::Projector global;
  network::CombinationMatrix combination;
  std::vector<scenario::RegressionTask> tasks;
  std::vector<algorithms::AgentState> states;
};

void BM_CSubspaceStep(benchmark::State& state) {
  Setup s(static_cast<std::size_t>(state.range(0)));
  const auto g = algorithms::GradientInput::exact(s.tasks);
  for (auto _ : state) s.states = algorithms::c_subspace_step(s.states, g, s.global);
}
BENCHMARK(BM_CSubspaceStep)->Arg(10)->Arg(40);

void BM_DSubspaceStep(benchmark::State& state) {
  Setup s(static_cast<std::size_t>(state.range(0)));
  const auto g = algorithms::GradientInput::exact(s.tasks);
  algorithms::DSubspaceWorkspace ws;
  for (auto _ : state) {
    s.states = algorithms::d_subspace_step(s.states, g, s.topo, s.locals, s.combination, &ws);
  }
}
BENCHMARK(BM_DSubspaceStep)->Arg(10)->Arg(40);

void BM_DiffusionStep(benchmark::State& state) {
  Setup s(static_cast<std::size_t>(state.range(0)));
  const auto g = algorithms::GradientInput::exact(s.tasks);
  for (auto _ : state) {
    s.states = algorithms::diffusion_baseline_step(s.states, g, s.topo, s.combination);
  }
}
BENCHMARK(BM_DiffusionStep)->Arg(10)->Arg(40);

}  // namespace
