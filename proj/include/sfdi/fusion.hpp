#pragma once

#include "sfdi/mass.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfdi {

inline constexpr double kDesaturationFloor = 1e-4;

inline const std::string kRuleReliabilityBased = "RB";
inline const std::string kRuleClassic = "DS";

/// Dempster's rule is undefined when the two bodies of evidence share no
/// support (H = 0).
class TotalConflictError : public std::runtime_error {
 public:
  TotalConflictError() : std::runtime_error("vacuous combination, H = 0") {}
};

struct Combination {
  MassVector masses;
  double agreement;  // H = 1 - conflict
};

/// Dempster's rule on a singleton frame: out(A) = m1(A) m2(A) / H with
/// H = sum_A m1(A) m2(A).
Combination ds_combine_detailed(const MassVector& m1, const MassVector& m2);
MassVector ds_combine(const MassVector& m1, const MassVector& m2);

/// Raises every mass to at least 1e-4, then rescales to unit sum.
MassVector desaturate(const Eigen::VectorXd& masses);

/// (1 - rel) m_prev + rel m_prior, i.e. m_prev + rel (m_prior - m_prev).
Eigen::VectorXd reliability_weighted(const MassVector& previous, const MassVector& prior,
                                     double rel);

/// Recursive filter state. `posterior` is the running combined mass.
struct FusionState {
  MassVector posterior;
  std::string rule;
  std::size_t step_count = 0;

  // Bookkeeping of the last step.
  Eigen::VectorXd increment;      // m# - m_prev
  Eigen::VectorXd undesaturated;  // m' before the floor
  double reliability = 1.0;
  double agreement = 1.0;
  std::size_t skipped_updates = 0;  // steps dropped for total conflict
};

/// Uniform posterior over the nx + 1 events.
FusionState init_state(Eigen::Index nx, const std::string& rule);

/// Reliability-based step: combine, take the increment, scale it by rel,
/// desaturate. rel == 0 returns the state with only step_count advanced.
/// On total conflict the posterior is kept and skipped_updates is bumped.
FusionState rb_update(const FusionState& state, const MassVector& evidence, double rel);

/// Plain recursive Dempster combination followed by desaturation.
FusionState classic_update(const FusionState& state, const MassVector& evidence);

/// An update rule maps (state, evidence, reliability) to the next state and
/// must keep the posterior a valid MassVector.
using UpdateRule = std::function<FusionState(const FusionState&, const MassVector&, double)>;

class RuleRegistry {
 public:
  /// Registry holding "RB" and "DS".
  static RuleRegistry with_builtin_rules();

  void add(const std::string& name, UpdateRule rule);
  const UpdateRule& get(const std::string& name) const;
  bool contains(const std::string& name) const { return rules_.count(name) != 0; }
  std::vector<std::string> names() const;

 private:
  std::map<std::string, UpdateRule> rules_;
};

struct IsolationDecision {
  std::optional<Eigen::Index> faulty_channel;  // empty means No-Fault
  double winning_mass = 0.0;

  bool is_fault() const { return faulty_channel.has_value(); }
  bool operator==(const IsolationDecision&) const = default;
};

/// Largest posterior mass wins. NF wins ties against any sensor; among
/// sensors the lowest index wins.
IsolationDecision isolate(const FusionState& state);
IsolationDecision isolate(const MassVector& posterior);

}  // namespace sfdi
