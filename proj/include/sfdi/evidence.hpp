#pragma once

#include "sfdi/mass.hpp"

#include <span>

namespace sfdi {

/// Slopes of the belief assignment. Defaults put the fault mass at zero for a
/// 90 degree distance, and the NF term at 0.9 for |e_D| = 0.9 Th_D and at 0.1
/// for |e_D| = 1.1 Th_D.
struct BbaParams {
  double gamma = 0.0;      // per degree, > 0
  double lambda = 0.0;     // < 0
  double threshold = 0.0;  // Th_D, > 0

  static BbaParams defaults(double th_d);
  /// gamma = gamma_factor * ln2 / 90, lambda = -lambda_factor * ln3 / Th_D.
  static BbaParams scaled(double th_d, double gamma_factor, double lambda_factor);
  void validate() const;
};

/// Sigmoid of control activity. The default slope gives Rel = 0.9 at
/// ||u|| = 0.95 Th_R and Rel = 0.1 at ||u|| = 1.05 Th_R.
struct ReliabilityParams {
  double delta = 0.0;      // > 0
  double threshold = 0.0;  // Th_R, > 0

  static ReliabilityParams defaults(double th_r);
  /// delta = delta_factor * ln3 / Th_R.
  static ReliabilityParams scaled(double th_r, double delta_factor);
  void validate() const;
};

/// Above the detection threshold, fault terms 2 - exp(gamma d_i) (clamped at
/// zero) and the NF term 1 - 1/(1 + exp(lambda (|e_D| - Th_D))) are rescaled
/// to sum to one. At or below it, NF keeps that term and the remainder is
/// split evenly among the sensors.
MassVector assign_bbm(const Eigen::VectorXd& distances_deg, double e_d, const BbaParams& params);

/// Unscaled NF term 1 - 1/(1 + exp(lambda (|e_D| - Th_D))).
double no_fault_term(double e_d, const BbaParams& params);

/// Rel = 1 - 1/(1 + exp(delta (Th_R - ||u||))).
double reliability(const Eigen::VectorXd& u, const ReliabilityParams& params);
double reliability_from_norm(double u_norm, const ReliabilityParams& params);

/// Th_R from ||u(k)|| on training data, same quantile rule as Th_D.
double calibrate_reliability_threshold(std::span<const double> u_norms, double p_false_alarm);

}  // namespace sfdi
