// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include "sfdi/harness.hpp"
#include "sfdi/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#ifndef SFDI_EXPERIMENT_CONFIG
#error "SFDI_EXPERIMENT_CONFIG must point at the synthetic experiment config"
#endif

using namespace sfdi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

constexpr double kThD = 0.24;
constexpr double kThR = 2.43;

Outcome bba_anchors() {
  const BbaParams p = BbaParams::defaults(kThD);
  const double nf = assign_bbm(Eigen::VectorXd::Constant(8, 30.0), 0.9 * kThD, p).no_fault();
  const double term = no_fault_term(1.1 * kThD, p);
  const double err = std::max(std::abs(nf - 0.9), std::abs(term - 0.1));
  return {err <= 1e-9, fmt("m_NF(0.9 Th)=%.12f term(1.1 Th)=%.12f", nf, term)};
}

Outcome reliability_anchors() {
  const ReliabilityParams p = ReliabilityParams::defaults(kThR);
  const double a = reliability_from_norm(0.95 * kThR, p);
  const double b = reliability_from_norm(kThR, p);
  const double c = reliability_from_norm(1.05 * kThR, p);
  const double err = std::max({std::abs(a - 0.9), std::abs(b - 0.5), std::abs(c - 0.1)});
  return {err <= 1e-9, fmt("Rel = %.12f, %.12f, %.12f", a, b, c)};
}

MassVector random_mass(Eigen::Index nx, std::mt19937_64& rng) {
  std::gamma_distribution<double> g(0.7, 1.0);
  Eigen::VectorXd v(nx + 1);
  for (auto& x : v) x = g(rng) + 1e-6;
  return MassVector(v / v.sum());
}

// Dempster's rule over the power set, focal elements as bitmasks.
std::map<std::uint32_t, double> power_set_combine(const MassVector& a, const MassVector& b) {
  std::map<std::uint32_t, double> joint;
  double conflict = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      const std::uint32_t inter = (1u << i) & (1u << j);
      if (inter == 0)
        conflict += a[i] * b[j];
      else
        joint[inter] += a[i] * b[j];
    }
  for (auto& [s, m] : joint) m /= 1.0 - conflict;
  return joint;
}

Outcome ds_oracle() {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index nx = 2 + trial % 3;
    const MassVector a = random_mass(nx, rng);
    const MassVector b = random_mass(nx, rng);
    const MassVector got = ds_combine(a, b);
    Eigen::VectorXd ref = Eigen::VectorXd::Zero(a.size());
    for (const auto& [s, m] : power_set_combine(a, b))
      for (Eigen::Index i = 0; i < a.size(); ++i)
        if (s == (1u << i)) ref(i) = m;
    worst = std::max(worst, (got.values() - ref).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-12, fmt("max abs error %.3e over 1000 pairs", worst)};
}

Outcome reliability_gating() {
  std::mt19937_64 rng(4);
  double worst_zero = 0.0, worst_one = 0.0, worst_mid = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index nx = 2 + trial % 7;
    FusionState s = init_state(nx, kRuleReliabilityBased);
    s.posterior = random_mass(nx, rng);
    const MassVector m = random_mass(nx, rng);

    worst_zero = std::max(worst_zero, (rb_update(s, m, 0.0).posterior.values() - s.posterior.values())
                                          .cwiseAbs().maxCoeff());
    worst_one = std::max(worst_one, (rb_update(s, m, 1.0).posterior.values() -
                                     classic_update(s, m).posterior.values()).cwiseAbs().maxCoeff());
    const Eigen::VectorXd mid = 0.5 * (s.posterior.values() + ds_combine(s.posterior, m).values());
    worst_mid = std::max(worst_mid, (rb_update(s, m, 0.5).undesaturated - mid).cwiseAbs().maxCoeff());
  }
  const bool ok = worst_zero <= 1e-12 && worst_one <= 1e-12 && worst_mid <= 1e-12;
  return {ok, fmt("rel=0 %.1e, rel=1 vs DS %.1e, rel=0.5 midpoint %.1e", worst_zero, worst_one, worst_mid)};
}

Outcome desaturation() {
  const Eigen::Index nx = 8;
  const auto peaked = [&](Eigen::Index w) {
    Eigen::VectorXd v = Eigen::VectorXd::Constant(nx + 1, 0.1 / static_cast<double>(nx));
    v(w) = 0.9;
    return MassVector(v);
  };
  FusionState s = init_state(nx, kRuleReliabilityBased);
  for (int k = 0; k < 1000; ++k) s = rb_update(s, peaked(2), 1.0);
  const double floor = s.posterior.values().minCoeff();
  int flip = -1;
  for (int k = 1; k <= 100 && flip < 0; ++k) {
    s = rb_update(s, peaked(5), 1.0);
    if (isolate(s).faulty_channel == Eigen::Index{5}) flip = k;
  }
  return {floor >= 4.9e-5 && flip > 0,
          fmt("min mass %.3e, argmax flipped after %.0f steps", floor, static_cast<double>(flip))};
}

Outcome detection_calibration(const PipelineConfig& cfg) {
  std::vector<Dataset> sets = load_sources(cfg, cfg.train);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    SyntheticConfig sc;
    sc.m = 3000;
    sc.seed = seed;
    sets.push_back(generate_synthetic_flight(sc));
  }
  double worst_fraction = 0.0, worst_ratio = 0.0;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (const Dataset& raw : sets) {
    const Dataset ds = apply_normalization(raw, compute_normalization(raw));
    const DetectionModel m = design_detector(ds, 0.10);
    const Eigen::VectorXd e = detection_residuals(ds, m);
    worst_fraction = std::max(worst_fraction,
                              static_cast<double>((e.array() > m.th()).count()) / static_cast<double>(e.size()));
    const double energy = (ds.samples() * m.v).norm();
    for (int j = 0; j < 1000; ++j) {
      Eigen::VectorXd w(ds.n());
      for (auto& x : w) x = g(rng);
      worst_ratio = std::max(worst_ratio, energy / (ds.samples() * w.normalized()).norm());
    }
  }
  return {worst_fraction <= 0.10 && worst_ratio <= 1.0 + 1e-9,
          fmt("max fraction above Th_D %.4f, max |Zv|/|Zw| %.6f", worst_fraction, worst_ratio)};
}

Outcome fault_direction_feasibility(const PipelineConfig& cfg) {
  const Dataset raw = Dataset::concatenate(load_sources(cfg, cfg.train));
  const Dataset ds = apply_normalization(raw, compute_normalization(raw));
  SolverOptions opts = cfg.solver;
  const IsolationModel m = optimize_fault_directions(ds, opts);
  bool diag = true;
  double worst_cos = 0.0;
  for (Eigen::Index i = 0; i < m.nx(); ++i) {
    diag = diag && m.W(i, i) == -1.0;
    for (Eigen::Index j = i + 1; j < m.nx(); ++j)
      worst_cos = std::max(worst_cos, std::abs(m.unit_signature(i).dot(m.unit_signature(j))));
  }
  const bool descent = m.objective <= m.initial_objective * (1.0 + 1e-12);

  Eigen::MatrixXd Z(200, 3);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (Eigen::Index k = 0; k < Z.rows(); ++k) {
    const double u = g(rng);
    Z.row(k) << u, 2.0 * u, u;
  }
  const IsolationModel analytic = optimize_fault_directions(Dataset(Z, {"x1", "x2"}, {"u1"}));
  const bool ok = diag && worst_cos < 1e-6 && descent && analytic.objective < 1e-6;
  std::ostringstream d;
  d << "diag " << (diag ? "-1" : "violated") << ", max |cos| " << worst_cos << ", objective "
    << m.objective << " <= " << m.initial_objective << ", analytic " << analytic.objective;
  return {ok, d.str()};
}

Outcome directional_isolation(const PipelineConfig& cfg) {
  const Dataset raw = Dataset::concatenate(load_sources(cfg, cfg.train));
  const IsolationModel m = optimize_fault_directions(apply_normalization(raw, compute_normalization(raw)), cfg.solver);
  double worst = 0.0;
  bool argmin_ok = true;
  for (Eigen::Index i = 0; i < m.nx(); ++i) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m.n());
    z(i) = 1.0;
    const Eigen::VectorXd d = angular_distances(directional_residual(z, m), m);
    Eigen::Index best;
    d.minCoeff(&best);
    argmin_ok = argmin_ok && best == i;
    worst = std::max(worst, d(i));
  }
  return {argmin_ok && worst < 1e-6,
          fmt("max d[i] %.3e deg", worst) + (argmin_ok ? ", argmin = i for all i" : ", wrong argmin")};
}

Outcome synthetic_experiment(const DiagnosisReport& rep) {
  int wins = 0, faulty = 0;
  std::ostringstream d;
  std::optional<Outcome> far;
  for (const ScenarioResult& s : rep.scenarios) {
    const RuleMetrics* rb = nullptr;
    const RuleMetrics* ds = nullptr;
    for (const RuleMetrics& m : s.metrics) {
      if (m.rule == kRuleReliabilityBased) rb = &m;
      if (m.rule == kRuleClassic) ds = &m;
    }
    if (!rb || !ds) return {false, "report lacks RB or DS metrics"};
    if (s.fault) {
      ++faulty;
      if (*rb->tir >= *ds->tir) ++wins;
      d << (faulty > 1 ? ", " : "") << s.name << " " << fmt("%.1f/%.1f", *rb->tir, *ds->tir);
    } else {
      far = Outcome{rb->false_alarm_rate <= ds->false_alarm_rate,
                    fmt("fault-free FAR RB %.3f%% DS %.3f%%", rb->false_alarm_rate, ds->false_alarm_rate)};
    }
  }
  if (!far) return {false, "no fault-free scenario"};
  const bool tir_ok = faulty == 8 && wins >= 7;
  return {tir_ok && far->pass, "TIR RB>=DS on " + std::to_string(wins) + "/" + std::to_string(faulty) +
                                   " (RB/DS " + d.str() + "), " + far->detail};
}

std::string full_run(const PipelineConfig& cfg) {
  const DesignBundle b = run_offline_design(cfg);
  return dump(report_to_json(run_scenarios(load_validation(cfg), b, cfg)));
}

}  // namespace

int main() {
  const PipelineConfig cfg = load_config(SFDI_EXPERIMENT_CONFIG);
  std::optional<std::string> report_bytes;

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"BBA anchors", bba_anchors},
      {"reliability anchors", reliability_anchors},
      {"DS power-set oracle", ds_oracle},
      {"reliability gating", reliability_gating},
      {"desaturation", desaturation},
      {"detection calibration", [&] { return detection_calibration(cfg); }},
      {"fault-direction feasibility", [&] { return fault_direction_feasibility(cfg); }},
      {"directional isolation", [&] { return directional_isolation(cfg); }},
      {"synthetic experiment RB vs DS",
       [&] {
         const DesignBundle b = run_offline_design(cfg);
         const DiagnosisReport rep = run_scenarios(load_validation(cfg), b, cfg);
         report_bytes = dump(report_to_json(rep));
         return synthetic_experiment(rep);
       }},
      {"determinism",
       [&] {
         const std::string a = report_bytes ? *report_bytes : full_run(cfg);
         const std::string b = full_run(cfg);
         return Outcome{a == b, std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "different")};
       }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
