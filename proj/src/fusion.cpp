#include "sfdi/fusion.hpp"

#include <algorithm>
#include <cmath>

namespace sfdi {

using Eigen::Index;
using Eigen::VectorXd;

Combination ds_combine_detailed(const MassVector& m1, const MassVector& m2) {
  if (m1.size() != m2.size())
    throw std::invalid_argument("ds_combine: frames differ in size");
  const VectorXd product = m1.values().cwiseProduct(m2.values());
  const double h = product.sum();
  if (!(h > 0.0)) throw TotalConflictError();
  VectorXd out = product / h;
  // Keep the unit sum exact enough for the MassVector check.
  out /= out.sum();
  return {MassVector(std::move(out)), h};
}

MassVector ds_combine(const MassVector& m1, const MassVector& m2) {
  return ds_combine_detailed(m1, m2).masses;
}

MassVector desaturate(const VectorXd& masses) {
  if ((masses.array() < 0.0).any() || !masses.allFinite())
    throw std::invalid_argument("desaturate: masses must be finite and nonnegative");
  const VectorXd floored = masses.cwiseMax(kDesaturationFloor);
  return MassVector(floored / floored.sum());
}

VectorXd reliability_weighted(const MassVector& previous, const MassVector& prior, double rel) {
  if (!(rel >= 0.0 && rel <= 1.0)) throw std::invalid_argument("reliability must lie in [0, 1]");
  if (previous.size() != prior.size()) throw std::invalid_argument("frames differ in size");
  return (1.0 - rel) * previous.values() + rel * prior.values();
}

FusionState init_state(Index nx, const std::string& rule) {
  MassVector uniform = MassVector::uniform(nx);
  VectorXd values = uniform.values();
  return FusionState{std::move(uniform), rule, 0, VectorXd::Zero(nx + 1), std::move(values)};
}

FusionState rb_update(const FusionState& state, const MassVector& evidence, double rel) {
  if (!(rel >= 0.0 && rel <= 1.0)) throw std::invalid_argument("reliability must lie in [0, 1]");
  FusionState next = state;
  ++next.step_count;
  next.reliability = rel;
  if (rel == 0.0) {
    next.increment.setZero(state.posterior.size());
    next.undesaturated = state.posterior.values();
    return next;
  }

  std::optional<Combination> prior;
  try {
    prior = ds_combine_detailed(state.posterior, evidence);
  } catch (const TotalConflictError&) {
    ++next.skipped_updates;
    next.increment.setZero(state.posterior.size());
    next.undesaturated = state.posterior.values();
    next.agreement = 0.0;
    return next;
  }
  next.agreement = prior->agreement;
  next.increment = prior->masses.values() - state.posterior.values();
  next.undesaturated = reliability_weighted(state.posterior, prior->masses, rel);
  next.posterior = desaturate(next.undesaturated);
  return next;
}

FusionState classic_update(const FusionState& state, const MassVector& evidence) {
  return rb_update(state, evidence, 1.0);
}

RuleRegistry RuleRegistry::with_builtin_rules() {
  RuleRegistry registry;
  registry.add(kRuleReliabilityBased, [](const FusionState& s, const MassVector& m, double rel) {
    return rb_update(s, m, rel);
  });
  registry.add(kRuleClassic, [](const FusionState& s, const MassVector& m, double) {
    return classic_update(s, m);
  });
  return registry;
}

void RuleRegistry::add(const std::string& name, UpdateRule rule) {
  if (name.empty()) throw std::invalid_argument("rule name must not be empty");
  if (!rule) throw std::invalid_argument("rule '" + name + "' is empty");
  rules_[name] = std::move(rule);
}

const UpdateRule& RuleRegistry::get(const std::string& name) const {
  const auto it = rules_.find(name);
  if (it == rules_.end()) throw std::invalid_argument("unknown combination rule '" + name + "'");
  return it->second;
}

std::vector<std::string> RuleRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, rule] : rules_) out.push_back(name);
  return out;
}

IsolationDecision isolate(const MassVector& posterior) {
  const Index nf = posterior.no_fault_index();
  Index best = 0;
  for (Index i = 1; i < nf; ++i)
    if (posterior[i] > posterior[best]) best = i;
  if (posterior.no_fault() >= posterior[best]) return {std::nullopt, posterior.no_fault()};
  return {best, posterior[best]};
}

IsolationDecision isolate(const FusionState& state) { return isolate(state.posterior); }

}  // namespace sfdi
