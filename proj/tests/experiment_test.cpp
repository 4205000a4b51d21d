#include <gtest/gtest.h>

#include <cstring>

#include "dsub/errors.hpp"
#include "dsub/experiment.hpp"

namespace dsub::experiment {
namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.scenario.dimension = 6;
  c.scenario.nodes = 6;
  c.scenario.rank = 2;
  c.run.iterations = 50;
  c.run.runs = 3;
  return c;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

TEST(RunExperiment, ZeroIterationsRecordsInitialMsdOnly) {
  auto c = small_config();
  c.run.iterations = 0;
  c.run.runs = 1;
  const auto result = run_experiment(c);
  ASSERT_EQ(result.results.size(), 3u);
  for (const auto& r : result.results) {
    ASSERT_EQ(r.trace.size(), 1u);
    // Zero initialization: initial MSD is the mean squared norm of w*.
    const auto prepared = prepare_scenario(c);
    EXPECT_NEAR(r.trace.linear[0], prepared.model.w_star.colwise().squaredNorm().mean(), 1e-14);
  }
}

TEST(RunExperiment, DeterministicAndThreadIndependent) {
  auto c = small_config();
  c.output.per_node = true;
  const auto a = run_experiment(c);
  const auto b = run_experiment(c);
  c.run.threads = 3;
  const auto t = run_experiment(c);
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    EXPECT_TRUE(same_bits(a.results[i].trace.linear, b.results[i].trace.linear));
    EXPECT_TRUE(same_bits(a.results[i].trace.linear, t.results[i].trace.linear));
    EXPECT_TRUE(same_bits(a.results[i].trace.per_node, t.results[i].trace.per_node));
    EXPECT_EQ(a.results[i].trace.run_count, 3u);
  }
}

TEST(RunExperiment, AlgorithmsSharePairedStreams) {
  // The same run index gives the same learning curve whichever other
  // algorithms are enabled.
  auto c = small_config();
  const auto all = run_experiment(c);
  c.algorithm.algorithms = {algorithms::Algorithm::kDSubspace};
  const auto alone = run_experiment(c);
  EXPECT_TRUE(same_bits(all.results[1].trace.linear, alone.results[0].trace.linear));
}

TEST(RunExperiment, DivergenceCarriesLocation) {
  auto c = small_config();
  c.algorithm.mu = {10.0};
  c.algorithm.gradient = GradientMode::kExact;
  c.algorithm.init = InitMode::kGaussian;
  c.run.iterations = 500;
  try {
    (void)run_experiment(c);
    FAIL() << "expected divergence";
  } catch (const DivergenceDetected& e) {
    EXPECT_EQ(e.algorithm(), "c_subspace");
    ASSERT_TRUE(e.run().has_value());
    EXPECT_EQ(*e.run(), 0u);
    ASSERT_TRUE(e.iteration().has_value());
    EXPECT_GE(*e.iteration(), 1u);
    EXPECT_LE(*e.iteration(), 500u);
  }
}

TEST(RunExperiment, OptimalInitStaysPutInExactMode) {
  auto c = small_config();
  c.algorithm.gradient = GradientMode::kExact;
  c.algorithm.init = InitMode::kOptimal;
  c.algorithm.algorithms = {algorithms::Algorithm::kCSubspace, algorithms::Algorithm::kDSubspace};
  const auto result = run_experiment(c);
  for (const auto& r : result.results) {
    for (double v : r.trace.linear) EXPECT_LE(v, 1e-26);
  }
}

TEST(PrepareScenario, StructuralErrorsSurfaceEarly) {
  auto c = small_config();
  c.scenario.topology = TopologyKind::kStar;
  c.scenario.rank = 3;
  EXPECT_THROW((void)prepare_scenario(c), NeighborhoodTooSmall);

  c = small_config();
  c.algorithm.mu = {0.1, 0.2};
  EXPECT_THROW((void)prepare_scenario(c), DimensionMismatch);
}

TEST(PrepareScenario, PerNodeStepSizes) {
  auto c = small_config();
  c.algorithm.mu = {0.01, 0.02, 0.03, 0.04, 0.05, 0.06};
  const auto p = prepare_scenario(c);
  EXPECT_EQ(p.mu, c.algorithm.mu);
}

TEST(PrepareScenario, ClusteredSupportMode) {
  auto c = small_config();
  c.scenario.nodes = 10;
  c.scenario.generator = Generator::kClustered;
  c.scenario.local_mode = scenario::LocalMode::kSupport;
  const auto p = prepare_scenario(c);
  std::size_t rank_one = 0;
  for (const auto& l : p.locals) rank_one += l.rank() == 1 ? 1 : 0;
  EXPECT_EQ(rank_one, 6u);
}

TEST(PrepareScenario, RandomTopologyHonorsMinimumNeighborhood) {
  auto c = small_config();
  c.scenario.nodes = 12;
  c.scenario.topology = TopologyKind::kRandom;
  c.scenario.edge_probability = 0.05;
  c.scenario.min_neighborhood = 4;
  const auto p = prepare_scenario(c);
  EXPECT_GE(p.topology.min_neighborhood(), 4u);
}

}  // namespace
}  // namespace dsub::experiment
