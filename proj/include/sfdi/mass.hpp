#pragma once

#include <Eigen/Dense>

namespace sfdi {

/// Basic belief masses over the Bayesian frame {F_1, ..., F_nx, NF}.
/// Index i < nx is "fault on sensor i"; the last entry is No-Fault.
class MassVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  /// Validates: every mass in [0, 1] and the sum within 1e-9 of 1.
  explicit MassVector(Eigen::VectorXd masses);

  static MassVector uniform(Eigen::Index nx);

  Eigen::Index nx() const { return masses_.size() - 1; }
  Eigen::Index size() const { return masses_.size(); }
  Eigen::Index no_fault_index() const { return masses_.size() - 1; }
  double operator[](Eigen::Index i) const { return masses_(i); }
  double no_fault() const { return masses_(no_fault_index()); }
  const Eigen::VectorXd& values() const { return masses_; }

 private:
  Eigen::VectorXd masses_;
};

}  // namespace sfdi
