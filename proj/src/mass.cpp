#include "sfdi/mass.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sfdi {

using Eigen::Index;

MassVector::MassVector(Eigen::VectorXd masses) : masses_(std::move(masses)) {
  if (masses_.size() < 2) throw std::invalid_argument("mass vector needs at least F_1 and NF");
  for (Index i = 0; i < masses_.size(); ++i)
    if (!(masses_(i) >= 0.0 && masses_(i) <= 1.0))
      throw std::invalid_argument("mass " + std::to_string(i) + " = " +
                                  std::to_string(masses_(i)) + " outside [0, 1]");
  if (std::abs(masses_.sum() - 1.0) > kSumTolerance)
    throw std::invalid_argument("masses sum to " + std::to_string(masses_.sum()) + ", not 1");
}

MassVector MassVector::uniform(Index nx) {
  if (nx < 1) throw std::invalid_argument("frame needs at least one sensor");
  return MassVector(Eigen::VectorXd::Constant(nx + 1, 1.0 / static_cast<double>(nx + 1)));
}

}  // namespace sfdi
