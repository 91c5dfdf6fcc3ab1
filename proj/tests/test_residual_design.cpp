#include "sfdi/residual_design.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sfdi;
using sfdi::testing::names;

namespace {

void expect_feasible(const IsolationModel& m) {
  for (Eigen::Index i = 0; i < m.nx(); ++i) EXPECT_EQ(m.W(i, i), -1.0) << "diagonal " << i;
  for (Eigen::Index i = 0; i < m.nx(); ++i)
    for (Eigen::Index j = i + 1; j < m.nx(); ++j)
      EXPECT_LT(std::abs(m.unit_signature(i).dot(m.unit_signature(j))), 1e-6) << i << "," << j;
  EXPECT_LE(m.objective, m.initial_objective * (1.0 + 1e-12));
}

// Residual energy of each sensor regressed on the inputs alone.
double input_regression_energy(const Dataset& ds) {
  const Eigen::MatrixXd U = ds.u();
  const Eigen::MatrixXd X = ds.x();
  const Eigen::MatrixXd B = (U.transpose() * U).ldlt().solve(U.transpose() * X);
  return (X - U * B).norm();
}

Dataset analytic_dataset() {
  // x1 = u1, x2 = 2 u1: every feasible W' admits a zero residual.
  const Eigen::MatrixXd u = sfdi::testing::gaussian_matrix(100, 1, 31);
  Eigen::MatrixXd Z(100, 3);
  Z.col(0) = u;
  Z.col(1) = 2.0 * u;
  Z.col(2) = u;
  return Dataset(Z, names("x", 2), names("u", 1));
}

}  // namespace

TEST(FaultDirections, FeasibleOnSyntheticFlight) {
  const IsolationModel m = optimize_fault_directions(generate_synthetic_flight(sfdi::testing::small_flight(1)));
  EXPECT_EQ(m.nx(), 8);
  EXPECT_EQ(m.n(), 12);
  expect_feasible(m);
  EXPECT_TRUE(m.converged);
}

TEST(FaultDirections, FeasibleOnFullRankNoise) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const IsolationModel m = optimize_fault_directions(sfdi::testing::random_dataset(300, 5, 2, seed));
    expect_feasible(m);
    EXPECT_GE(m.iterations, 1);
  }
}

TEST(FaultDirections, AnalyticZeroResidualDataset) {
  const Dataset ds = analytic_dataset();
  const IsolationModel m = optimize_fault_directions(ds);
  expect_feasible(m);
  EXPECT_LT(m.objective, 1e-6);
  EXPECT_LT((ds.samples() * m.W.transpose()).norm(), 1e-6);
}

TEST(FaultDirections, ObjectiveIsFrobeniusNormOfResiduals) {
  const Dataset ds = sfdi::testing::random_dataset(200, 4, 3, 12);
  const IsolationModel m = optimize_fault_directions(ds);
  EXPECT_NEAR(m.objective, (ds.samples() * m.W.transpose()).norm(), 1e-10 * m.objective);
}

// The reduced objective is sum_i S_ii / Q_ii^2 >= tr(S), so the optimum equals
// the energy left after regressing each sensor on the inputs.
TEST(FaultDirections, ReachesInputRegressionLowerBound) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Dataset ds = generate_synthetic_flight(sfdi::testing::small_flight(seed));
    const IsolationModel m = optimize_fault_directions(ds);
    EXPECT_NEAR(m.objective, input_regression_energy(ds), 1e-9 * m.objective);
  }
}

TEST(FaultDirections, RandomStartDescendsMonotonicallyToTheBound) {
  const Dataset ds = sfdi::testing::random_dataset(400, 4, 2, 17);
  SolverOptions opts;
  opts.random_start = true;
  opts.seed = 5;
  opts.max_iters = 2000;
  opts.tol = 1e-12;
  const IsolationModel m = optimize_fault_directions(ds, opts);
  expect_feasible(m);
  ASSERT_GE(m.objective_history.size(), 2u);
  EXPECT_NEAR(m.objective_history.front(), m.initial_objective, 1e-12 * m.initial_objective);
  for (std::size_t k = 1; k < m.objective_history.size(); ++k)
    EXPECT_LE(m.objective_history[k], m.objective_history[k - 1]) << "iterate " << k;
  EXPECT_GT(m.initial_objective, 1.01 * m.objective);
  EXPECT_NEAR(m.objective, input_regression_energy(ds), 1e-4 * m.objective);
}

TEST(FaultDirections, SeededRunsAreIdentical) {
  const Dataset ds = sfdi::testing::random_dataset(200, 4, 2, 19);
  SolverOptions opts;
  opts.random_start = true;
  opts.seed = 3;
  const IsolationModel a = optimize_fault_directions(ds, opts);
  const IsolationModel b = optimize_fault_directions(ds, opts);
  EXPECT_TRUE(a.W == b.W);
  EXPECT_EQ(a.objective_history, b.objective_history);
}

TEST(FaultDirections, RejectsUnusableInput) {
  EXPECT_THROW(optimize_fault_directions(sfdi::testing::random_dataset(100, 1, 2, 1)), std::invalid_argument);
  EXPECT_THROW(optimize_fault_directions(sfdi::testing::random_dataset(5, 3, 2, 1)), std::invalid_argument);
  SolverOptions bad;
  bad.max_iters = 0;
  EXPECT_THROW(optimize_fault_directions(sfdi::testing::random_dataset(100, 3, 2, 1), bad),
               std::invalid_argument);
}

TEST(AngularDistance, PureFaultMapsToItsChannel) {
  const IsolationModel m = optimize_fault_directions(generate_synthetic_flight(sfdi::testing::small_flight(4)));
  for (Eigen::Index i = 0; i < m.nx(); ++i) {
    for (double amp : {1e-3, 0.3, -5.0}) {
      Eigen::VectorXd z = Eigen::VectorXd::Zero(m.n());
      z(i) = amp;
      const Eigen::VectorXd d = angular_distances(directional_residual(z, m), m);
      Eigen::Index best;
      d.minCoeff(&best);
      EXPECT_EQ(best, i);
      EXPECT_LT(d(i), 1e-6);
      EXPECT_TRUE((d.array() >= 0.0).all() && (d.array() <= 90.0).all());
    }
  }
}

TEST(AngularDistance, RotatedSignaturesFromHandBuiltModel) {
  // Columns [-1, c] and [a, -1] are orthogonal when c = -a.
  IsolationModel m;
  const double a = 0.5;
  m.W.resize(2, 3);
  m.W << -1.0, a, 0.3, -a, -1.0, -0.2;
  EXPECT_NEAR(m.unit_signature(0).dot(m.unit_signature(1)), 0.0, 1e-15);

  const Eigen::VectorXd d0 = angular_distances(m.W.col(0) * 2.0, m);
  EXPECT_NEAR(d0(0), 0.0, 1e-6);
  EXPECT_NEAR(d0(1), 90.0, 1e-6);
  const Eigen::VectorXd mid = angular_distances(m.unit_signature(0) + m.unit_signature(1), m);
  EXPECT_NEAR(mid(0), 45.0, 1e-9);
  EXPECT_NEAR(mid(1), 45.0, 1e-9);
}

TEST(AngularDistance, ZeroResidualHasNoDirection) {
  IsolationModel m;
  m.W = -Eigen::MatrixXd::Identity(3, 4);
  EXPECT_TRUE(angular_distances(Eigen::VectorXd::Zero(3), m).isApprox(Eigen::VectorXd::Constant(3, 90.0)));
  EXPECT_THROW(angular_distances(Eigen::VectorXd::Zero(2), m), std::invalid_argument);
  EXPECT_THROW(directional_residual(Eigen::VectorXd::Zero(3), m), std::invalid_argument);
}
