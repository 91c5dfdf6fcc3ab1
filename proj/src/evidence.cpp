#include "sfdi/evidence.hpp"

#include "sfdi/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sfdi {

using Eigen::Index;

BbaParams BbaParams::defaults(double th_d) { return scaled(th_d, 1.0, 20.0); }

BbaParams BbaParams::scaled(double th_d, double gamma_factor, double lambda_factor) {
  BbaParams p;
  p.threshold = th_d;
  p.gamma = gamma_factor * std::numbers::ln2 / 90.0;
  p.lambda = -lambda_factor * std::log(3.0) / th_d;
  p.validate();
  return p;
}

void BbaParams::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("BBA gamma must be > 0");
  if (!(lambda < 0.0)) throw std::invalid_argument("BBA lambda must be < 0");
  if (!(threshold > 0.0)) throw std::invalid_argument("BBA needs Th_D > 0");
}

ReliabilityParams ReliabilityParams::defaults(double th_r) { return scaled(th_r, 40.0); }

ReliabilityParams ReliabilityParams::scaled(double th_r, double delta_factor) {
  ReliabilityParams p;
  p.threshold = th_r;
  p.delta = delta_factor * std::log(3.0) / th_r;
  p.validate();
  return p;
}

void ReliabilityParams::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("reliability delta must be > 0");
  if (!(threshold > 0.0)) throw std::invalid_argument("reliability needs Th_R > 0");
}

namespace {

// 1 / (1 + exp(-x)) = 1 - 1 / (1 + exp(x)), accurate in both tails.
double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double no_fault_term(double e_d, const BbaParams& params) {
  return logistic(params.lambda * (std::abs(e_d) - params.threshold));
}

MassVector assign_bbm(const Eigen::VectorXd& distances_deg, double e_d, const BbaParams& params) {
  const Index nx = distances_deg.size();
  if (nx < 1) throw std::invalid_argument("assign_bbm: no distances");
  if (!std::isfinite(e_d)) throw std::invalid_argument("assign_bbm: e_D is not finite");
  for (Index i = 0; i < nx; ++i)
    if (!(distances_deg(i) >= 0.0 && distances_deg(i) <= 90.0))
      throw std::invalid_argument("assign_bbm: distance " + std::to_string(distances_deg(i)) +
                                  " outside [0, 90] degrees");
  Eigen::VectorXd m(nx + 1);
  const double x = params.lambda * (std::abs(e_d) - params.threshold);

  if (std::abs(e_d) > params.threshold) {
    for (Index i = 0; i < nx; ++i)
      m(i) = std::max(0.0, 2.0 - std::exp(params.gamma * distances_deg(i)));
    m(nx) = logistic(x);
    const double total = m.sum();
    if (total > 0.0) {
      m /= total;  // eta
    } else {
      // NF underflowed and no signature is closer than 90 degrees.
      m.head(nx).setConstant(1.0 / static_cast<double>(nx));
      m(nx) = 0.0;
    }
  } else {
    m.head(nx).setConstant(logistic(-x) / static_cast<double>(nx));
    m(nx) = logistic(x);
  }
  return MassVector(std::move(m));
}

double reliability_from_norm(double u_norm, const ReliabilityParams& params) {
  return logistic(params.delta * (params.threshold - u_norm));
}

double reliability(const Eigen::VectorXd& u, const ReliabilityParams& params) {
  return reliability_from_norm(u.norm(), params);
}

double calibrate_reliability_threshold(std::span<const double> u_norms, double p_false_alarm) {
  return empirical_quantile_threshold(u_norms, p_false_alarm);
}

}  // namespace sfdi
