#pragma once

#include "sfdi/data_pipeline.hpp"

#include <optional>
#include <span>

namespace sfdi {

inline constexpr double kDefaultFalseAlarmProbability = 0.10;

/// Parity-style detector: a unit versor v in the approximate right null space
/// of the training matrix, so that e_D = z^T v stays near zero without faults.
struct DetectionModel {
  Eigen::VectorXd v;
  std::optional<double> threshold;  // Th_D, unset until calibrated
  double false_alarm_probability = kDefaultFalseAlarmProbability;
  double sigma_min = 0.0;

  double th() const;  // throws if uncalibrated
};

enum class DetectionState { Normal, FaultDetected };

/// Right singular vector of the smallest singular value, with its first
/// nonzero component made positive.
DetectionModel fit_detection_versor(const Dataset& train);

double detection_residual(const Eigen::VectorXd& z, const DetectionModel& model);

/// |e_D(k)| for every row of `ds`.
Eigen::VectorXd detection_residuals(const Dataset& ds, const DetectionModel& model);

/// Smallest observed value t with empirical CDF(t) = #{x <= t}/N >= 1 - p,
/// i.e. the ceil((1 - p) N)-th order statistic. Shared by the detection and
/// reliability thresholds.
double empirical_quantile_threshold(std::span<const double> values, double p);

double calibrate_threshold(std::span<const double> abs_residuals, double p_false_alarm);

/// Fits the versor, then calibrates Th_D on |e_D| over the same data.
DetectionModel design_detector(const Dataset& train,
                               double p_false_alarm = kDefaultFalseAlarmProbability);

/// Strict inequality: |e_D| == Th_D is Normal.
DetectionState detect(double e_d, double threshold);

}  // namespace sfdi
