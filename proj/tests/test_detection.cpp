#include "sfdi/detection.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace sfdi;
using sfdi::testing::names;

namespace {

// Order-statistic oracle: smallest sample t with #{x <= t} / N >= 1 - p.
double brute_force_quantile(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  for (double t : xs) {
    const auto count = std::count_if(xs.begin(), xs.end(), [t](double x) { return x <= t; });
    if (static_cast<double>(count) / n >= 1.0 - p) return t;
  }
  return xs.back();
}

}  // namespace

TEST(Quantile, MatchesBruteForceOrderStatistic) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> size(1, 60);
  std::uniform_real_distribution<double> prob(0.001, 0.99);
  std::uniform_int_distribution<int> coarse(0, 5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> xs(static_cast<std::size_t>(size(rng)));
    // Coarse values on odd trials to exercise ties.
    for (auto& x : xs) x = trial % 2 ? coarse(rng) : prob(rng) * 10.0;
    const double p = trial % 7 == 0 ? 0.1 : prob(rng);
    EXPECT_EQ(empirical_quantile_threshold(xs, p), brute_force_quantile(xs, p)) << "trial " << trial;
  }
}

TEST(Quantile, ExactFractionsAndExtremes) {
  std::vector<double> xs(10);
  for (int i = 0; i < 10; ++i) xs[static_cast<std::size_t>(i)] = 10.0 - i;  // unsorted input
  EXPECT_EQ(empirical_quantile_threshold(xs, 0.10), 9.0);
  EXPECT_EQ(empirical_quantile_threshold(xs, 0.01), 10.0);
  EXPECT_EQ(empirical_quantile_threshold(xs, 0.95), 1.0);
  std::vector<double> grid(1000);
  for (int i = 0; i < 1000; ++i) grid[static_cast<std::size_t>(i)] = i + 1;
  EXPECT_EQ(empirical_quantile_threshold(grid, 0.10), 900.0);
}

TEST(Quantile, RejectsBadInput) {
  const std::vector<double> empty;
  const std::vector<double> xs{1.0, 2.0};
  const std::vector<double> nan{1.0, std::nan("")};
  EXPECT_THROW(empirical_quantile_threshold(empty, 0.1), std::invalid_argument);
  EXPECT_THROW(empirical_quantile_threshold(xs, -0.1), std::invalid_argument);
  EXPECT_THROW(empirical_quantile_threshold(xs, 0.0), std::invalid_argument);
  EXPECT_THROW(empirical_quantile_threshold(xs, 1.0), std::invalid_argument);
  EXPECT_THROW(empirical_quantile_threshold(nan, 0.1), std::invalid_argument);
}

TEST(Versor, ExactNullSpaceOfTwoChannelRelation) {
  // x1 = u1 exactly: the null direction is (1, -1) / sqrt(2).
  Eigen::MatrixXd Z(50, 2);
  Z.col(1) = sfdi::testing::gaussian_matrix(50, 1, 1);
  Z.col(0) = Z.col(1);
  const DetectionModel m = fit_detection_versor(Dataset(Z, {"x1"}, {"u1"}));
  EXPECT_NEAR(m.v(0), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(m.v(1), -1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(m.sigma_min, 0.0, 1e-10);
  EXPECT_FALSE(m.threshold.has_value());
  EXPECT_THROW(m.th(), std::logic_error);
}

TEST(Versor, MatchesFullSvdOracleAndMinimizesEnergy) {
  const Dataset ds = generate_synthetic_flight(sfdi::testing::small_flight(2));
  const Eigen::MatrixXd& Z = ds.samples();
  const DetectionModel m = fit_detection_versor(ds);
  EXPECT_NEAR(m.v.norm(), 1.0, 1e-12);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z, Eigen::ComputeThinV);
  Eigen::VectorXd oracle = svd.matrixV().col(Z.cols() - 1);
  Eigen::Index first = 0;
  while (std::abs(oracle(first)) == 0.0) ++first;
  if (oracle(first) < 0) oracle = -oracle;
  EXPECT_LT((m.v - oracle).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(m.sigma_min, svd.singularValues().minCoeff(), 1e-9 * svd.singularValues().maxCoeff());

  const double energy = (Z * m.v).norm();
  const Eigen::MatrixXd W = sfdi::testing::gaussian_matrix(Z.cols(), 200, 4);
  for (Eigen::Index j = 0; j < W.cols(); ++j)
    EXPECT_LE(energy, (Z * W.col(j).normalized()).norm() * (1.0 + 1e-9));
}

TEST(Versor, FirstNonzeroComponentIsPositive) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const DetectionModel m = fit_detection_versor(sfdi::testing::random_dataset(100, 3, 2, seed));
    Eigen::Index first = 0;
    while (m.v(first) == 0.0) ++first;
    EXPECT_GT(m.v(first), 0.0);
  }
}

TEST(Detector, FractionAboveThresholdWithinFalseAlarmProbability) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Dataset ds = generate_synthetic_flight(sfdi::testing::small_flight(seed));
    for (double p : {0.01, 0.05, 0.10, 0.25}) {
      const DetectionModel m = design_detector(ds, p);
      const Eigen::VectorXd e = detection_residuals(ds, m);
      EXPECT_TRUE((e.array() >= 0.0).all());
      const double above = static_cast<double>((e.array() > m.th()).count()) / static_cast<double>(e.size());
      EXPECT_LE(above, p);
      EXPECT_DOUBLE_EQ(m.false_alarm_probability, p);
    }
  }
}

TEST(Detector, ResidualIsInnerProductWithVersor) {
  const Dataset ds = sfdi::testing::random_dataset(30, 2, 2, 6);
  const DetectionModel m = design_detector(ds);
  const Eigen::VectorXd z = ds.samples().row(3).transpose();
  EXPECT_DOUBLE_EQ(detection_residual(z, m), z.dot(m.v));
  EXPECT_DOUBLE_EQ(detection_residuals(ds, m)(3), std::abs(z.dot(m.v)));
  EXPECT_THROW(detection_residual(Eigen::VectorXd::Zero(3), m), std::invalid_argument);
}

TEST(Detector, StrictInequality) {
  EXPECT_EQ(detect(0.24, 0.24), DetectionState::Normal);
  EXPECT_EQ(detect(std::nextafter(0.24, 1.0), 0.24), DetectionState::FaultDetected);
  EXPECT_EQ(detect(-0.5, 0.24), DetectionState::FaultDetected);
  EXPECT_EQ(detect(0.0, 0.24), DetectionState::Normal);
}

TEST(Detector, BiasAlongTheVersorIsDetected) {
  const Dataset ds = generate_synthetic_flight(sfdi::testing::small_flight(3));
  const DetectionModel m = design_detector(ds);
  Eigen::Index strongest;
  m.v.head(ds.nx()).cwiseAbs().maxCoeff(&strongest);
  const double amp = 10.0 * m.th() / std::abs(m.v(strongest));
  const Dataset faulty = inject_fault(ds, {strongest, amp, 0, ds.rows()});
  const Eigen::VectorXd e = detection_residuals(faulty, m);
  EXPECT_GT(static_cast<double>((e.array() > m.th()).count()) / static_cast<double>(e.size()), 0.99);
}
