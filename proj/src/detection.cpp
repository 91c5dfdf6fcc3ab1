#include "sfdi/detection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sfdi {

using Eigen::Index;

double DetectionModel::th() const {
  if (!threshold) throw std::logic_error("detection threshold has not been calibrated");
  return *threshold;
}

DetectionModel fit_detection_versor(const Dataset& train) {
  const auto& Z = train.samples();
  // Z = QR, so the right singular pairs of Z are those of the small n x n R.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
  const Eigen::MatrixXd R =
      qr.matrixQR().topRows(Z.cols()).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "SVD of the " << Z.rows() << "x" << Z.cols()
        << " training matrix failed; singular values: " << svd.singularValues().transpose();
    throw std::runtime_error(msg.str());
  }
  const Index last = Z.cols() - 1;

  DetectionModel model;
  model.v = svd.matrixV().col(last).normalized();
  model.sigma_min = svd.singularValues()(last);
  for (Index i = 0; i < model.v.size(); ++i) {
    if (std::abs(model.v(i)) > 1e-12) {
      if (model.v(i) < 0.0) model.v = -model.v;
      break;
    }
  }
  return model;
}

double detection_residual(const Eigen::VectorXd& z, const DetectionModel& model) {
  if (z.size() != model.v.size())
    throw std::invalid_argument("detection_residual: sample has " + std::to_string(z.size()) +
                                " channels, versor has " + std::to_string(model.v.size()));
  return z.dot(model.v);
}

Eigen::VectorXd detection_residuals(const Dataset& ds, const DetectionModel& model) {
  if (ds.n() != model.v.size())
    throw std::invalid_argument("detection_residuals: channel count mismatch");
  return (ds.samples() * model.v).cwiseAbs();
}

double empirical_quantile_threshold(std::span<const double> values, double p) {
  if (values.empty()) throw std::invalid_argument("threshold calibration on an empty series");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("probability must lie in (0, 1)");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("threshold calibration on non-finite data");

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto N = static_cast<double>(sorted.size());
  const double level = 1.0 - p;

  // Smallest rank j (1-based) with j / N >= level, evaluated exactly as written.
  auto j = static_cast<std::size_t>(std::ceil(level * N));
  j = std::clamp<std::size_t>(j, 1, sorted.size());
  while (j > 1 && static_cast<double>(j - 1) / N >= level) --j;
  while (j < sorted.size() && static_cast<double>(j) / N < level) ++j;
  return sorted[j - 1];
}

double calibrate_threshold(std::span<const double> abs_residuals, double p_false_alarm) {
  for (double v : abs_residuals)
    if (v < 0.0) throw std::invalid_argument("calibrate_threshold expects |e_D| values");
  return empirical_quantile_threshold(abs_residuals, p_false_alarm);
}

DetectionModel design_detector(const Dataset& train, double p_false_alarm) {
  DetectionModel model = fit_detection_versor(train);
  model.false_alarm_probability = p_false_alarm;
  const Eigen::VectorXd residuals = detection_residuals(train, model);
  model.threshold = calibrate_threshold(
      std::span<const double>(residuals.data(), static_cast<std::size_t>(residuals.size())),
      p_false_alarm);
  return model;
}

DetectionState detect(double e_d, double threshold) {
  return std::abs(e_d) > threshold ? DetectionState::FaultDetected : DetectionState::Normal;
}

}  // namespace sfdi
