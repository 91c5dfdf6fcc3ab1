#pragma once

#include "sfdi/data_pipeline.hpp"
#include "sfdi/detection.hpp"
#include "sfdi/evidence.hpp"
#include "sfdi/fusion.hpp"
#include "sfdi/residual_design.hpp"
#include "sfdi/synthetic.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sfdi {

/// A dataset comes either from a CSV file or from the synthetic generator.
struct DataSource {
  std::optional<std::filesystem::path> csv;
  std::optional<SyntheticConfig> synthetic;
};

/// Explicit fault scenario. Missing amplitude means the calibrated one;
/// missing bounds mean the configured fault window.
struct FaultRequest {
  Eigen::Index channel = 0;
  std::optional<double> amplitude;
  std::optional<Eigen::Index> start;
  std::optional<Eigen::Index> stop;
};

struct PipelineConfig {
  std::vector<DataSource> train;
  std::optional<DataSource> validation;
  std::vector<std::string> x_names;
  std::vector<std::string> u_names;
  double dt = 0.1;
  double p_false_alarm = kDefaultFalseAlarmProbability;
  double gamma_factor = 1.0;    // gamma = factor * ln2 / 90
  double lambda_factor = 20.0;  // lambda = -factor * ln3 / Th_D
  double delta_factor = 40.0;   // delta = factor * ln3 / Th_R
  SolverOptions solver;
  bool auto_faults = true;      // one calibrated fault per monitored sensor
  std::vector<FaultRequest> faults;
  double amplitude_factor = 3.0;
  double fault_start_fraction = 2.0 / 16.0;
  double fault_stop_fraction = 14.0 / 16.0;
  bool fault_free_scenario = true;
  std::vector<std::string> rules{kRuleReliabilityBased, kRuleClassic};
  std::uint64_t seed = 1;
  bool parallel = true;

  void validate() const;
  /// Everything except the data sources.
  void validate_parameters() const;
};

/// Everything the offline phase hands to the online phase.
struct DesignBundle {
  std::vector<std::string> x_names;
  std::vector<std::string> u_names;
  double dt = 0.1;
  double p_false_alarm = kDefaultFalseAlarmProbability;
  NormStats norm;
  DetectionModel detection;
  IsolationModel isolation;
  LsModel ls;
  BbaParams bba;
  ReliabilityParams reliability;
  Eigen::VectorXd fault_amplitudes;  // amplitude_factor x rounded LS error

  Eigen::Index nx() const { return static_cast<Eigen::Index>(x_names.size()); }
};

/// Per-sample signals shared by every combination rule of a scenario.
struct EvidenceStream {
  Eigen::VectorXd e_d;           // signed detection residual
  std::vector<bool> detected;    // |e_D| > Th_D
  Eigen::MatrixXd distances;     // m x nx, degrees
  Eigen::MatrixXd bbm;           // m x (nx + 1)
  Eigen::VectorXd u_norm;
  Eigen::VectorXd reliability;
};

struct RuleTrace {
  std::string rule;
  Eigen::MatrixXd combined;  // m x (nx + 1) posterior after each sample
  std::vector<IsolationDecision> decisions;
  std::size_t skipped_updates = 0;
};

struct RuleMetrics {
  std::string rule;
  std::optional<double> tdr;  // percent; absent for fault-free scenarios
  std::optional<double> tir;
  double false_alarm_rate = 0.0;  // percent of fault-free samples not isolated as NF
  std::size_t skipped_updates = 0;
};

struct ScenarioResult {
  std::string name;
  std::optional<FaultSpec> fault;
  std::vector<bool> fault_mask;
  EvidenceStream evidence;
  std::vector<RuleTrace> traces;
  std::vector<RuleMetrics> metrics;
};

struct DiagnosisReport {
  double dt = 0.1;
  Eigen::Index samples = 0;
  std::vector<std::string> x_names;
  double th_d = 0.0;
  double th_r = 0.0;
  Eigen::VectorXd v;
  double isolation_objective = 0.0;
  std::vector<ScenarioResult> scenarios;

  const ScenarioResult& scenario(const std::string& name) const;
};

/// Loads or generates every training source, in order.
std::vector<Dataset> load_sources(const PipelineConfig& cfg, const std::vector<DataSource>& sources);
Dataset load_validation(const PipelineConfig& cfg);

/// Offline design on already-loaded raw (unnormalized) training data.
DesignBundle design_from_dataset(const Dataset& raw_train, const PipelineConfig& cfg);
DesignBundle run_offline_design(const PipelineConfig& cfg);

/// Computes e_D, detection flags, distances, BBMs and Rel on normalized data.
EvidenceStream compute_evidence(const Dataset& normalized, const DesignBundle& bundle);

RuleTrace run_filter(const EvidenceStream& evidence, Eigen::Index nx, const std::string& rule,
                     const RuleRegistry& registry = RuleRegistry::with_builtin_rules());

/// Online phase for one scenario on a normalized validation set.
ScenarioResult run_online(const Dataset& normalized_validation, const DesignBundle& bundle,
                          const std::optional<FaultSpec>& fault,
                          const std::vector<std::string>& rules,
                          const RuleRegistry& registry = RuleRegistry::with_builtin_rules());

/// Scenario list for a validation record of `m` samples.
std::vector<FaultSpec> plan_faults(const PipelineConfig& cfg, const DesignBundle& bundle,
                                   Eigen::Index m);

/// Runs every planned scenario (plus the fault-free one) on `raw_validation`.
DiagnosisReport run_scenarios(const Dataset& raw_validation, const DesignBundle& bundle,
                              const PipelineConfig& cfg);

/// 100 x #(fault active and detected) / #(fault active).
double compute_tdr(const std::vector<bool>& detections, const std::vector<bool>& fault_mask);

/// 100 x #(k in the interval isolated as the faulty channel) / interval length.
double compute_tir(const std::vector<IsolationDecision>& decisions, const FaultSpec& fault);

/// Percent of samples outside the mask whose decision is not No-Fault.
double compute_false_alarm_rate(const std::vector<IsolationDecision>& decisions,
                                const std::vector<bool>& fault_mask);

/// Series ids: "detection" (figure2), "bbm" (figure3), "combined" (figure4),
/// "fault_mass" (figure5). `rule` selects the trace for "combined".
void emit_series(const DiagnosisReport& report, const std::string& scenario,
                 const std::string& which, const std::filesystem::path& path,
                 const std::string& rule = kRuleReliabilityBased);

}  // namespace sfdi
