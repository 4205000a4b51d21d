#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <set>
#include <sstream>

#include "dsub/errors.hpp"
#include "dsub/scenario.hpp"
#include "dsub/scenario_io.hpp"
#include "oracles.hpp"

namespace dsub::scenario {
namespace {

using linalg::Index;

Vector singular_values(const Matrix& m) { return Eigen::JacobiSVD<Matrix>(m).singularValues(); }

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Index i = 0; i < a.size(); ++i) {
    if (std::memcmp(&a.data()[i], &b.data()[i], sizeof(double)) != 0) return false;
  }
  return true;
}

TEST(GlobalSubspace, LowRankByConstruction) {
  const auto model = generate_global_subspace(4, 5, 2, 7);
  const Vector s = singular_values(model.w_star);
  EXPECT_LT(s(2) / s(0), 1e-10);
  EXPECT_GT(s(1) / s(0), 1e-8);
  EXPECT_LE((model.basis.transpose() * model.basis - Matrix::Identity(2, 2)).norm(), 1e-14);
  EXPECT_LE((model.w_star - model.basis * model.coefficients).norm(), 1e-13 * model.w_star.norm());
  EXPECT_GT(singular_values(model.coefficients).minCoeff(), 1e-3);
}

TEST(GlobalSubspace, FullRankWhenRankIsMaximal) {
  const auto model = generate_global_subspace(3, 6, 3, 1);
  const Vector s = singular_values(model.w_star);
  EXPECT_GT(s(2) / s(0), 1e-8);
}

TEST(GlobalSubspace, DeterministicInSeed) {
  const auto a = generate_global_subspace(8, 6, 3, 123);
  const auto b = generate_global_subspace(8, 6, 3, 123);
  const auto c = generate_global_subspace(8, 6, 3, 124);
  EXPECT_TRUE(bitwise_equal(a.w_star, b.w_star));
  EXPECT_TRUE(bitwise_equal(a.basis, b.basis));
  EXPECT_FALSE(bitwise_equal(a.w_star, c.w_star));
}

TEST(GlobalSubspace, InvalidRank) {
  EXPECT_THROW((void)generate_global_subspace(4, 5, 0, 1), InvalidRank);
  EXPECT_THROW((void)generate_global_subspace(4, 5, 5, 1), InvalidRank);
  EXPECT_THROW((void)generate_global_subspace(6, 3, 4, 1), InvalidRank);
}

TEST(LocalSubspaces, FullyConnectedDenseMatchesGlobal) {
  const auto model = generate_global_subspace(6, 5, 2, 3);
  const auto topo = network::fully_connected(5);
  const auto locals = derive_local_subspaces(model, topo, LocalMode::kDense, 0.0);
  const auto global = linalg::projector_from_coefficients(model.coefficients, 0.0);
  for (const auto& l : locals) {
    EXPECT_EQ(l.coefficients, model.coefficients);
    EXPECT_LE((l.projector.matrix() - global.matrix()).norm(), 1e-15);
    EXPECT_EQ(l.rank(), 2u);
  }
}

TEST(LocalSubspaces, SingletonSupportIsScalarOne) {
  SubspaceModel model;
  model.dimension = 3;
  model.nodes = 1;
  model.rank = 1;
  model.basis = Matrix::Zero(3, 1);
  model.basis(1, 0) = 1.0;
  model.coefficients = Matrix::Constant(1, 1, -2.5);
  refresh_optimum(model);
  const auto topo = network::Topology::from_edges({}, 1);
  const auto locals = derive_local_subspaces(model, topo, LocalMode::kSupport, 0.0);
  ASSERT_EQ(locals.size(), 1u);
  EXPECT_EQ(locals[0].rank(), 1u);
  EXPECT_DOUBLE_EQ(locals[0].projector.matrix()(0, 0), 1.0);
}

TEST(LocalSubspaces, DenseModeNeedsLargeEnoughNeighborhoods) {
  const auto model = generate_global_subspace(6, 5, 3, 3);
  const auto topo = network::star(5);
  try {
    (void)derive_local_subspaces(model, topo, LocalMode::kDense, 0.0);
    FAIL() << "expected NeighborhoodTooSmall";
  } catch (const NeighborhoodTooSmall& e) {
    EXPECT_EQ(e.node(), 1u);
  }
  // Diagonal loading admits the rank-deficient neighborhoods.
  const auto loaded = derive_local_subspaces(model, topo, LocalMode::kDense, 1e-3);
  EXPECT_EQ(loaded.size(), 5u);
}

TEST(LocalSubspaces, RankDeficientNeighborhoodReportsNode) {
  auto model = generate_global_subspace(4, 4, 2, 9);
  // Columns 1, 2 and 3 become collinear, so node 2's neighborhood {1,2,3}
  // has rank 1 while nodes 0 and 1 still see two independent columns.
  model.coefficients.col(2) = 2.0 * model.coefficients.col(1);
  model.coefficients.col(3) = -1.0 * model.coefficients.col(1);
  refresh_optimum(model);
  try {
    (void)derive_local_subspaces(model, network::path(4), LocalMode::kDense, 0.0);
    FAIL() << "expected SingularGram";
  } catch (const SingularGram& e) {
    ASSERT_TRUE(e.node().has_value());
    EXPECT_EQ(*e.node(), 2u);
  }
}

TEST(LocalSubspaces, ConsistencyInvariants) {
  const auto model = generate_global_subspace(10, 10, 2, 21);
  const auto topo = network::ring(10);
  const auto locals = derive_local_subspaces(model, topo, LocalMode::kDense, 0.0);
  for (std::size_t k = 0; k < 10; ++k) {
    const Matrix wk = local_optimum(model, topo, k);
    const Matrix ck = local_basis(model, locals[k]);
    EXPECT_LE((wk - ck * locals[k].coefficients).norm(), 1e-12 * wk.norm());
    EXPECT_LE((linalg::project_rows(wk, locals[k].projector) - wk).norm(), 1e-10);
  }
}

TEST(ClusteredCoefficients, InteriorNodesHaveRankOne) {
  const auto topo = network::ring(10);
  const auto model = generate_clustered_coefficients(10, 10, 2, topo, 5, 2);
  const auto locals = derive_local_subspaces(model, topo, LocalMode::kSupport, 0.0);

  // Oracle: node k (0-based) is in cluster k / 5 and cluster j owns row j;
  // S_k is the set of clusters its neighborhood touches.
  for (std::size_t k = 0; k < 10; ++k) {
    std::set<std::size_t> expected;
    for (std::size_t l : topo.neighborhood(k)) expected.insert(l / 5);
    const std::vector<std::size_t> want(expected.begin(), expected.end());
    EXPECT_EQ(locals[k].basis_rows, want) << "node " << k;
  }
  for (std::size_t k : {1, 2, 3, 6, 7, 8}) EXPECT_EQ(locals[k].rank(), 1u) << "node " << k;
  for (std::size_t k : {0, 4, 5, 9}) EXPECT_EQ(locals[k].rank(), 2u) << "node " << k;

  const Vector s = singular_values(model.w_star);
  EXPECT_LT(s(2) / s(0), 1e-10);
  EXPECT_GT(s(1) / s(0), 1e-8);
}

TEST(ClusteredCoefficients, UniquenessByRowSubset) {
  const auto topo = network::ring(12);
  const auto model = generate_clustered_coefficients(8, 12, 3, topo, 77, 3);
  const auto locals = derive_local_subspaces(model, topo, LocalMode::kSupport, 0.0);
  for (std::size_t k = 0; k < 12; ++k) {
    const auto hood = topo.neighborhood(k);
    const auto& l = locals[k];
    for (std::size_t i = 0; i < l.rank(); ++i) {
      for (std::size_t j = 0; j < hood.size(); ++j) {
        EXPECT_EQ(l.coefficients(static_cast<Index>(i), static_cast<Index>(j)),
                  model.coefficients(static_cast<Index>(l.basis_rows[i]),
                                     static_cast<Index>(hood[j])));
      }
    }
    const Matrix wk = local_optimum(model, topo, k);
    EXPECT_LE((wk - local_basis(model, l) * l.coefficients).norm(), 1e-12 * wk.norm());
    EXPECT_LE((linalg::project_rows(wk, l.projector) - wk).norm(), 1e-10);
  }
}

TEST(ClusteredCoefficients, SingleClusterMatchesGlobalGenerator) {
  const auto topo = network::fully_connected(6);
  const auto clustered = generate_clustered_coefficients(5, 6, 3, topo, 31, 1);
  const auto global = generate_global_subspace(5, 6, 3, 31);
  EXPECT_TRUE(bitwise_equal(clustered.w_star, global.w_star));
}

TEST(ClusteredCoefficients, DeterministicAndFailsWhenImpossible) {
  const auto topo = network::ring(9);
  const auto a = generate_clustered_coefficients(6, 9, 3, topo, 4, 3);
  const auto b = generate_clustered_coefficients(6, 9, 3, topo, 4, 3);
  EXPECT_TRUE(bitwise_equal(a.coefficients, b.coefficients));
  // One cluster of rank 4 cannot fit 3-member ring neighborhoods.
  EXPECT_THROW((void)generate_clustered_coefficients(6, 9, 4, topo, 4, 1, 5), GenerationFailed);
}

TEST(Samples, NoiselessZeroOptimumGivesZeroResponse) {
  const RegressionTask task(0, Vector::Zero(3), Matrix::Identity(3, 3), 0.0);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(draw_sample(task, rng).d, 0.0);
}

TEST(Samples, StatisticsMatchModel) {
  Vector w(4);
  w << 0.5, -1.0, 0.25, 2.0;
  const Matrix cov = ar1_covariance(4, 0.5);
  const RegressionTask task(0, w, cov, 0.1);
  Rng rng(2);
  constexpr int kDraws = 100000;
  double sum_d = 0.0;
  Matrix sum_uu = Matrix::Zero(4, 4);
  for (int i = 0; i < kDraws; ++i) {
    const auto s = draw_sample(task, rng, static_cast<std::size_t>(i));
    sum_d += s.d;
    sum_uu += s.u * s.u.transpose();
  }
  const double sigma_d = std::sqrt(w.dot(cov * w) + 0.1);
  EXPECT_LE(std::abs(sum_d / kDraws), 4.0 * sigma_d / std::sqrt(double(kDraws)));
  EXPECT_LE((sum_uu / kDraws - cov).norm(), 0.05 * cov.norm());
}

TEST(Samples, RejectsBadTask) {
  EXPECT_THROW(RegressionTask(0, Vector::Zero(3), Matrix::Identity(2, 2), 0.1), DimensionMismatch);
  EXPECT_THROW(RegressionTask(0, Vector::Zero(2), Matrix::Identity(2, 2), -0.1), InvalidArgument);
  Matrix indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(RegressionTask(0, Vector::Zero(2), indefinite, 0.1), NotSpd);
}

TEST(Covariance, Ar1Structure) {
  const Matrix r = ar1_covariance(3, 0.5);
  EXPECT_DOUBLE_EQ(r(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(r(0, 2), 0.25);
  EXPECT_EQ(ar1_covariance(3, 0.0), Matrix::Identity(3, 3));
  EXPECT_THROW((void)ar1_covariance(3, 1.0), InvalidArgument);
}

TEST(Gradients, StochasticExamples) {
  DataSample s;
  s.u = Vector::Unit(2, 0);
  s.d = 1.0;
  const Vector g = stochastic_gradient(Vector::Zero(2), s);
  EXPECT_DOUBLE_EQ(g(0), -2.0);
  EXPECT_DOUBLE_EQ(g(1), 0.0);

  Vector w(2);
  w << 1.0, 5.0;
  EXPECT_EQ(stochastic_gradient(w, s), Vector::Zero(2));
  EXPECT_THROW((void)stochastic_gradient(Vector::Zero(3), s), DimensionMismatch);
}

TEST(Gradients, StochasticMatchesFiniteDifferences) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    DataSample s;
    s.u = Vector::NullaryExpr(3, [&] { return normal(rng); });
    s.d = normal(rng);
    const Vector w = Vector::NullaryExpr(3, [&] { return normal(rng); });
    const auto loss = [&s](const Vector& x) {
      const double e = s.d - s.u.dot(x);
      return e * e;
    };
    const Vector fd = dsub::testing::central_difference(loss, w, 1e-6);
    const Vector g = stochastic_gradient(w, s);
    EXPECT_LE((g - fd).norm(), 1e-6 * std::max(1.0, g.norm()));
  }
}

TEST(Gradients, ExactExamples) {
  Vector w_star(3);
  w_star << 1.0, 2.0, 3.0;
  const RegressionTask task(0, w_star, Matrix::Identity(3, 3), 0.01);
  EXPECT_EQ(exact_gradient(w_star, task), Vector::Zero(3));
  const Vector g = exact_gradient(w_star + Vector::Unit(3, 0), task);
  EXPECT_DOUBLE_EQ(g(0), 2.0);
  EXPECT_DOUBLE_EQ(g(1), 0.0);
}

TEST(Gradients, StochasticAveragesToExact) {
  Vector w_star(3);
  w_star << 0.3, -0.7, 1.1;
  const RegressionTask task(0, w_star, ar1_covariance(3, 0.3), 0.05);
  Vector w(3);
  w << 1.0, 0.5, -0.5;
  Rng rng(77);
  Vector mean = Vector::Zero(3);
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) mean += stochastic_gradient(w, draw_sample(task, rng));
  mean /= kDraws;
  const Vector exact = exact_gradient(w, task);
  EXPECT_LE((mean - exact).norm(), 0.02 * exact.norm());
}

TEST(ScenarioDump, RoundTripIsBitExact) {
  const auto topo = network::ring(8);
  const auto model = generate_clustered_coefficients(5, 8, 2, topo, 1234, 2);
  const auto locals = derive_local_subspaces(model, topo, LocalMode::kSupport, 0.0);
  std::ostringstream out;
  write_scenario(out, model, topo, LocalMode::kSupport, locals);
  std::istringstream in(out.str());
  const auto dump = read_scenario(in);
  EXPECT_TRUE(bitwise_equal(dump.model.w_star, model.w_star));
  EXPECT_TRUE(bitwise_equal(dump.model.basis, model.basis));
  EXPECT_EQ(dump.model.seed, 1234u);
  EXPECT_EQ(dump.mode, LocalMode::kSupport);
  EXPECT_EQ(network::Topology::from_edges(dump.edges, 8), topo);
  for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(dump.supports[k], locals[k].basis_rows);
}

TEST(ScenarioDump, RejectsMalformedInput) {
  std::istringstream truncated("dimension 2\nnodes 2\n");
  EXPECT_THROW((void)read_scenario(truncated), FormatError);
  std::istringstream bad_mode("dimension 1\nnodes 1\nrank 1\nseed 0\nlocal_mode sparse\n");
  EXPECT_THROW((void)read_scenario(bad_mode), FormatError);
}

}  // namespace
}  // namespace dsub::scenario
