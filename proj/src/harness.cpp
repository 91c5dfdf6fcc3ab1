#include "sfdi/harness.hpp"

#include "sfdi/csv.hpp"

#include <cmath>
#include <future>
#include <span>
#include <stdexcept>

namespace sfdi {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

template <typename Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(stage) + ": " + e.what());
  }
}

std::span<const double> as_span(const VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

void PipelineConfig::validate() const {
  if (train.empty()) throw std::invalid_argument("config: at least one training source is required");
  validate_parameters();
}

void PipelineConfig::validate_parameters() const {
  if (!(p_false_alarm > 0.0 && p_false_alarm < 1.0))
    throw std::invalid_argument("config: p_false_alarm must lie in (0, 1)");
  if (!(amplitude_factor > 0.0)) throw std::invalid_argument("config: amplitude_factor must be > 0");
  if (!(fault_start_fraction >= 0.0 && fault_start_fraction < fault_stop_fraction &&
        fault_stop_fraction <= 1.0))
    throw std::invalid_argument("config: fault window must satisfy 0 <= start < stop <= 1");
  if (rules.empty()) throw std::invalid_argument("config: no combination rules selected");
  if (!auto_faults && faults.empty() && !fault_free_scenario)
    throw std::invalid_argument("config: no scenarios to run");
}

const ScenarioResult& DiagnosisReport::scenario(const std::string& name) const {
  for (const auto& s : scenarios)
    if (s.name == name) return s;
  throw std::invalid_argument("no scenario named '" + name + "'");
}

namespace {

Dataset load_source(const PipelineConfig& cfg, const DataSource& src) {
  if (src.csv) return load_dataset(*src.csv, cfg.x_names, cfg.u_names, cfg.dt);
  if (!src.synthetic) throw std::invalid_argument("data source has neither a csv path nor a synthetic config");
  Dataset ds = generate_synthetic_flight(*src.synthetic);
  const bool rename = cfg.x_names.size() == static_cast<std::size_t>(ds.nx()) &&
                      cfg.u_names.size() == static_cast<std::size_t>(ds.nu());
  if (!rename) return ds;
  return Dataset(ds.samples(), cfg.x_names, cfg.u_names, ds.dt());
}

}  // namespace

std::vector<Dataset> load_sources(const PipelineConfig& cfg, const std::vector<DataSource>& sources) {
  std::vector<Dataset> out;
  for (const auto& src : sources) out.push_back(load_source(cfg, src));
  return out;
}

Dataset load_validation(const PipelineConfig& cfg) {
  if (!cfg.validation) throw std::invalid_argument("config: no validation source");
  return load_source(cfg, *cfg.validation);
}

DesignBundle design_from_dataset(const Dataset& raw_train, const PipelineConfig& cfg) {
  cfg.validate_parameters();
  if (raw_train.nu() < 1)
    throw std::invalid_argument("design: at least one input channel is required for the reliability signal");

  DesignBundle bundle;
  bundle.x_names = raw_train.x_channels();
  bundle.u_names = raw_train.u_channels();
  bundle.dt = raw_train.dt();
  bundle.p_false_alarm = cfg.p_false_alarm;

  bundle.norm = staged("normalization", [&] { return compute_normalization(raw_train); });
  const Dataset train = staged("normalization", [&] { return apply_normalization(raw_train, bundle.norm); });

  bundle.detection = staged("detection", [&] { return design_detector(train, cfg.p_false_alarm); });

  SolverOptions solver = cfg.solver;
  solver.seed = cfg.seed;
  bundle.isolation = staged("fault directions", [&] { return optimize_fault_directions(train, solver); });

  bundle.ls = staged("ls model", [&] { return fit_ls_model(train); });
  bundle.fault_amplitudes.resize(train.nx());
  for (Index i = 0; i < train.nx(); ++i)
    bundle.fault_amplitudes(i) = calibrate_fault_amplitude(bundle.ls, i, cfg.amplitude_factor);

  bundle.reliability = staged("reliability", [&] {
    const VectorXd u_norms = train.u().rowwise().norm();
    const double th_r = calibrate_reliability_threshold(as_span(u_norms), cfg.p_false_alarm);
    return ReliabilityParams::scaled(th_r, cfg.delta_factor);
  });
  bundle.bba = staged("belief assignment", [&] {
    return BbaParams::scaled(bundle.detection.th(), cfg.gamma_factor, cfg.lambda_factor);
  });
  return bundle;
}

DesignBundle run_offline_design(const PipelineConfig& cfg) {
  cfg.validate();
  const auto parts = staged("loading training data", [&] { return load_sources(cfg, cfg.train); });
  const Dataset train = staged("loading training data", [&] { return Dataset::concatenate(parts); });
  return design_from_dataset(train, cfg);
}

EvidenceStream compute_evidence(const Dataset& normalized, const DesignBundle& bundle) {
  const Index m = normalized.rows();
  const Index nx = bundle.nx();
  if (normalized.n() != bundle.detection.v.size() || normalized.nx() != nx)
    throw std::invalid_argument("validation channels do not match the design bundle");

  EvidenceStream ev;
  ev.e_d = normalized.samples() * bundle.detection.v;
  ev.detected.resize(static_cast<std::size_t>(m));
  ev.distances.resize(m, nx);
  ev.bbm.resize(m, nx + 1);
  ev.u_norm = normalized.u().rowwise().norm();
  ev.reliability.resize(m);

  const double th_d = bundle.detection.th();
  for (Index k = 0; k < m; ++k) {
    const VectorXd z = normalized.samples().row(k).transpose();
    ev.detected[static_cast<std::size_t>(k)] = detect(ev.e_d(k), th_d) == DetectionState::FaultDetected;
    const VectorXd d = angular_distances(directional_residual(z, bundle.isolation), bundle.isolation);
    ev.distances.row(k) = d.transpose();
    ev.bbm.row(k) = assign_bbm(d, ev.e_d(k), bundle.bba).values().transpose();
    ev.reliability(k) = reliability_from_norm(ev.u_norm(k), bundle.reliability);
  }
  return ev;
}

RuleTrace run_filter(const EvidenceStream& evidence, Index nx, const std::string& rule,
                     const RuleRegistry& registry) {
  const UpdateRule& update = registry.get(rule);
  const Index m = evidence.bbm.rows();
  RuleTrace trace;
  trace.rule = rule;
  trace.combined.resize(m, nx + 1);
  trace.decisions.reserve(static_cast<std::size_t>(m));

  FusionState state = init_state(nx, rule);
  for (Index k = 0; k < m; ++k) {
    state = update(state, MassVector(evidence.bbm.row(k).transpose()), evidence.reliability(k));
    trace.combined.row(k) = state.posterior.values().transpose();
    trace.decisions.push_back(isolate(state));
  }
  trace.skipped_updates = state.skipped_updates;
  return trace;
}

ScenarioResult run_online(const Dataset& normalized_validation, const DesignBundle& bundle,
                          const std::optional<FaultSpec>& fault, const std::vector<std::string>& rules,
                          const RuleRegistry& registry) {
  ScenarioResult result;
  result.fault = fault;
  result.name = fault ? bundle.x_names.at(static_cast<std::size_t>(fault->channel)) : "fault_free";

  const Dataset faulty = fault ? inject_fault(normalized_validation, *fault) : normalized_validation;
  const Index m = faulty.rows();
  result.fault_mask.assign(static_cast<std::size_t>(m), false);
  if (fault)
    for (Index k = fault->start; k < fault->stop; ++k) result.fault_mask[static_cast<std::size_t>(k)] = true;

  result.evidence = compute_evidence(faulty, bundle);
  for (const auto& rule : rules) {
    RuleTrace trace = run_filter(result.evidence, bundle.nx(), rule, registry);
    RuleMetrics metrics;
    metrics.rule = rule;
    if (fault) {
      metrics.tdr = compute_tdr(result.evidence.detected, result.fault_mask);
      metrics.tir = compute_tir(trace.decisions, *fault);
    }
    metrics.false_alarm_rate = compute_false_alarm_rate(trace.decisions, result.fault_mask);
    metrics.skipped_updates = trace.skipped_updates;
    result.metrics.push_back(std::move(metrics));
    result.traces.push_back(std::move(trace));
  }
  return result;
}

std::vector<FaultSpec> plan_faults(const PipelineConfig& cfg, const DesignBundle& bundle, Index m) {
  const auto default_start = static_cast<Index>(std::llround(cfg.fault_start_fraction * static_cast<double>(m)));
  const auto default_stop = static_cast<Index>(std::llround(cfg.fault_stop_fraction * static_cast<double>(m)));
  std::vector<FaultSpec> faults;
  if (cfg.auto_faults) {
    for (Index i = 0; i < bundle.nx(); ++i)
      faults.push_back({i, bundle.fault_amplitudes(i), default_start, default_stop});
  } else {
    for (const auto& req : cfg.faults) {
      if (req.channel < 0 || req.channel >= bundle.nx())
        throw std::invalid_argument("fault channel " + std::to_string(req.channel) + " out of range");
      faults.push_back({req.channel, req.amplitude.value_or(bundle.fault_amplitudes(req.channel)),
                        req.start.value_or(default_start), req.stop.value_or(default_stop)});
    }
  }
  return faults;
}

DiagnosisReport run_scenarios(const Dataset& raw_validation, const DesignBundle& bundle,
                              const PipelineConfig& cfg) {
  const RuleRegistry registry = RuleRegistry::with_builtin_rules();
  for (const auto& rule : cfg.rules) registry.get(rule);

  const Dataset validation = staged("validation normalization",
                                    [&] { return apply_normalization(raw_validation, bundle.norm); });

  std::vector<std::optional<FaultSpec>> scenarios;
  for (const auto& f : plan_faults(cfg, bundle, validation.rows())) scenarios.emplace_back(f);
  if (cfg.fault_free_scenario) scenarios.emplace_back(std::nullopt);

  DiagnosisReport report;
  report.dt = validation.dt();
  report.samples = validation.rows();
  report.x_names = bundle.x_names;
  report.th_d = bundle.detection.th();
  report.th_r = bundle.reliability.threshold;
  report.v = bundle.detection.v;
  report.isolation_objective = bundle.isolation.objective;

  auto run_one = [&](const std::optional<FaultSpec>& f) {
    return staged("online run", [&] { return run_online(validation, bundle, f, cfg.rules, registry); });
  };
  if (cfg.parallel) {
    std::vector<std::future<ScenarioResult>> pending;
    for (const auto& f : scenarios) pending.push_back(std::async(std::launch::async, run_one, f));
    for (auto& p : pending) report.scenarios.push_back(p.get());
  } else {
    for (const auto& f : scenarios) report.scenarios.push_back(run_one(f));
  }
  return report;
}

double compute_tdr(const std::vector<bool>& detections, const std::vector<bool>& fault_mask) {
  if (detections.size() != fault_mask.size())
    throw std::invalid_argument("compute_tdr: series lengths differ");
  std::size_t active = 0, hit = 0;
  for (std::size_t k = 0; k < fault_mask.size(); ++k) {
    if (!fault_mask[k]) continue;
    ++active;
    if (detections[k]) ++hit;
  }
  if (active == 0) throw std::invalid_argument("compute_tdr: the fault is never active");
  return 100.0 * static_cast<double>(hit) / static_cast<double>(active);
}

double compute_tir(const std::vector<IsolationDecision>& decisions, const FaultSpec& fault) {
  if (fault.stop <= fault.start) throw std::invalid_argument("compute_tir: empty fault interval");
  if (fault.start < 0 || static_cast<std::size_t>(fault.stop) > decisions.size())
    throw std::invalid_argument("compute_tir: decisions do not cover the fault interval");
  std::size_t correct = 0;
  for (Index k = fault.start; k < fault.stop; ++k)
    if (decisions[static_cast<std::size_t>(k)].faulty_channel == fault.channel) ++correct;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(fault.stop - fault.start);
}

double compute_false_alarm_rate(const std::vector<IsolationDecision>& decisions,
                                const std::vector<bool>& fault_mask) {
  if (decisions.size() != fault_mask.size())
    throw std::invalid_argument("compute_false_alarm_rate: series lengths differ");
  std::size_t clean = 0, alarms = 0;
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    if (fault_mask[k]) continue;
    ++clean;
    if (decisions[k].is_fault()) ++alarms;
  }
  if (clean == 0) return 0.0;
  return 100.0 * static_cast<double>(alarms) / static_cast<double>(clean);
}

void emit_series(const DiagnosisReport& report, const std::string& scenario, const std::string& which,
                 const std::filesystem::path& path, const std::string& rule) {
  const ScenarioResult& s = report.scenario(scenario);
  const Index m = report.samples;
  const auto nx = static_cast<Index>(report.x_names.size());
  VectorXd time(m);
  for (Index k = 0; k < m; ++k) time(k) = static_cast<double>(k) * report.dt;

  std::vector<std::string> headers{"time"};
  MatrixXd table;
  auto mass_headers = [&] {
    for (const auto& x : report.x_names) headers.push_back("m_" + x);
    headers.push_back("m_NF");
  };

  if (which == "detection" || which == "figure2") {
    headers.insert(headers.end(), {"abs_e_d", "th_d", "fault_active"});
    table.resize(m, 4);
    for (Index k = 0; k < m; ++k)
      table.row(k) << time(k), std::abs(s.evidence.e_d(k)), report.th_d,
          s.fault_mask[static_cast<std::size_t>(k)] ? 1.0 : 0.0;
  } else if (which == "bbm" || which == "figure3") {
    mass_headers();
    headers.push_back("rel");
    table.resize(m, nx + 3);
    table << time, s.evidence.bbm, s.evidence.reliability;
  } else if (which == "combined" || which == "figure4") {
    const RuleTrace* trace = nullptr;
    for (const auto& t : s.traces)
      if (t.rule == rule) trace = &t;
    if (!trace) throw std::invalid_argument("scenario '" + scenario + "' has no trace for rule '" + rule + "'");
    mass_headers();
    table.resize(m, nx + 2);
    table << time, trace->combined;
  } else if (which == "fault_mass" || which == "figure5") {
    if (!s.fault) throw std::invalid_argument("fault_mass series needs a faulty scenario");
    table.resize(m, 1 + static_cast<Index>(s.traces.size()));
    table.col(0) = time;
    for (std::size_t r = 0; r < s.traces.size(); ++r) {
      headers.push_back(s.traces[r].rule);
      table.col(static_cast<Index>(r) + 1) = s.traces[r].combined.col(s.fault->channel);
    }
  } else {
    throw std::invalid_argument("unknown series '" + which +
                                "' (expected detection, bbm, combined or fault_mass)");
  }
  write_csv(path, headers, table);
}

}  // namespace sfdi
