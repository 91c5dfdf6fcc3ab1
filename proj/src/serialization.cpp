#include "sfdi/serialization.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sfdi {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
}

json vector_to_json(const VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size()));
}

json matrix_to_json(const MatrixXd& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

MatrixXd matrix_from_json(const json& j, Index cols_if_empty = 0) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  const Index cols = rows.empty() ? cols_if_empty : static_cast<Index>(rows.front().size());
  MatrixXd m(static_cast<Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<Index>(rows[r].size()) != cols) throw std::invalid_argument("ragged matrix in JSON");
    for (Index c = 0; c < cols; ++c) m(static_cast<Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  }
  return m;
}

DataSource source_from_json(const json& j, const std::filesystem::path& base_dir, std::uint64_t default_seed,
                            std::uint64_t system_seed, const std::string& where) {
  check_keys(j, {"csv", "synthetic"}, where);
  DataSource src;
  if (j.contains("csv") == j.contains("synthetic"))
    throw std::invalid_argument(where + ": give exactly one of 'csv' or 'synthetic'");
  if (j.contains("csv")) {
    std::filesystem::path p = j.at("csv").get<std::string>();
    src.csv = p.is_absolute() ? p : base_dir / p;
  } else {
    src.synthetic = synthetic_from_json(j.at("synthetic"), default_seed, system_seed);
  }
  return src;
}

Index channel_index(const json& j, const std::vector<std::string>& x_names) {
  if (j.is_number_integer()) return j.get<Index>();
  const auto name = j.get<std::string>();
  for (std::size_t i = 0; i < x_names.size(); ++i)
    if (x_names[i] == name) return static_cast<Index>(i);
  throw std::invalid_argument("fault channel '" + name + "' is not a monitored sensor");
}

}  // namespace

json synthetic_to_json(const SyntheticConfig& cfg) {
  json segs = json::array();
  for (const auto& s : cfg.maneuver_segments)
    segs.push_back({{"start", s.start}, {"stop", s.stop}, {"intensity", s.intensity}});
  return {{"nx", cfg.nx},         {"nu", cfg.nu},
          {"m", cfg.m},           {"latent_dim", cfg.latent_dim},
          {"disturbance_dim", cfg.disturbance_dim}, {"disturbance_std", cfg.disturbance_std},
          {"noise_std", cfg.noise_std}, {"maneuvers", segs},
          {"seed", cfg.seed},     {"dt", cfg.dt},
          {"system_seed", cfg.system_seed ? json(*cfg.system_seed) : json(nullptr)}};
}

SyntheticConfig synthetic_from_json(const json& j, std::uint64_t default_seed,
                                    std::optional<std::uint64_t> default_system_seed) {
  check_keys(j,
             {"nx", "nu", "m", "latent_dim", "disturbance_dim", "disturbance_std", "noise_std", "maneuvers",
              "seed", "system_seed", "dt"},
             "synthetic");
  SyntheticConfig cfg;
  cfg.nx = j.value("nx", cfg.nx);
  cfg.nu = j.value("nu", cfg.nu);
  cfg.m = j.value("m", cfg.m);
  cfg.latent_dim = j.value("latent_dim", cfg.latent_dim);
  cfg.disturbance_dim = j.value("disturbance_dim", cfg.disturbance_dim);
  cfg.disturbance_std = j.value("disturbance_std", cfg.disturbance_std);
  cfg.noise_std = j.value("noise_std", cfg.noise_std);
  cfg.dt = j.value("dt", cfg.dt);
  cfg.seed = j.value("seed", default_seed);
  cfg.system_seed = default_system_seed;
  if (j.contains("system_seed") && !j.at("system_seed").is_null())
    cfg.system_seed = j.at("system_seed").get<std::uint64_t>();
  if (j.contains("maneuvers")) {
    for (const auto& s : j.at("maneuvers")) {
      check_keys(s, {"start", "stop", "intensity"}, "maneuver");
      cfg.maneuver_segments.push_back(
          {s.at("start").get<Index>(), s.at("stop").get<Index>(), s.at("intensity").get<double>()});
    }
  }
  return cfg;
}

PipelineConfig config_from_json(const json& j, const std::filesystem::path& base_dir,
                                std::optional<std::uint64_t> seed_override) {
  check_keys(j,
             {"train", "validation", "x_names", "u_names", "dt", "p_false_alarm", "bba", "reliability",
              "solver", "faults", "amplitude_factor", "fault_window", "fault_free_scenario", "rules", "seed",
              "parallel"},
             "config");
  PipelineConfig cfg;
  cfg.seed = seed_override.value_or(j.value("seed", cfg.seed));
  cfg.x_names = j.value("x_names", cfg.x_names);
  cfg.u_names = j.value("u_names", cfg.u_names);
  cfg.dt = j.value("dt", cfg.dt);
  cfg.p_false_alarm = j.value("p_false_alarm", cfg.p_false_alarm);
  cfg.amplitude_factor = j.value("amplitude_factor", cfg.amplitude_factor);
  cfg.fault_free_scenario = j.value("fault_free_scenario", cfg.fault_free_scenario);
  cfg.rules = j.value("rules", cfg.rules);
  cfg.parallel = j.value("parallel", cfg.parallel);

  if (!j.contains("train")) throw std::invalid_argument("config: missing 'train'");
  const auto& train = j.at("train");
  if (!train.is_array()) throw std::invalid_argument("config: 'train' must be an array");
  for (std::size_t i = 0; i < train.size(); ++i)
    cfg.train.push_back(source_from_json(train[i], base_dir, cfg.seed + i, cfg.seed, "train[" + std::to_string(i) + "]"));
  if (j.contains("validation"))
    cfg.validation = source_from_json(j.at("validation"), base_dir, cfg.seed + 1000, cfg.seed, "validation");

  if (j.contains("bba")) {
    check_keys(j.at("bba"), {"gamma_factor", "lambda_factor"}, "bba");
    cfg.gamma_factor = j.at("bba").value("gamma_factor", cfg.gamma_factor);
    cfg.lambda_factor = j.at("bba").value("lambda_factor", cfg.lambda_factor);
  }
  if (j.contains("reliability")) {
    check_keys(j.at("reliability"), {"delta_factor"}, "reliability");
    cfg.delta_factor = j.at("reliability").value("delta_factor", cfg.delta_factor);
  }
  if (j.contains("solver")) {
    check_keys(j.at("solver"), {"max_iters", "tol", "step", "random_start"}, "solver");
    cfg.solver.random_start = j.at("solver").value("random_start", cfg.solver.random_start);
    cfg.solver.max_iters = j.at("solver").value("max_iters", cfg.solver.max_iters);
    cfg.solver.tol = j.at("solver").value("tol", cfg.solver.tol);
    cfg.solver.step = j.at("solver").value("step", cfg.solver.step);
  }
  if (j.contains("fault_window")) {
    const auto w = j.at("fault_window").get<std::vector<double>>();
    if (w.size() != 2) throw std::invalid_argument("config: fault_window must be [start_fraction, stop_fraction]");
    cfg.fault_start_fraction = w[0];
    cfg.fault_stop_fraction = w[1];
  }
  if (j.contains("faults")) {
    const auto& f = j.at("faults");
    if (f.is_string()) {
      if (f.get<std::string>() != "auto") throw std::invalid_argument("config: faults must be \"auto\" or a list");
      cfg.auto_faults = true;
    } else {
      cfg.auto_faults = false;
      for (const auto& item : f) {
        check_keys(item, {"channel", "amplitude", "start", "stop"}, "fault");
        FaultRequest req;
        req.channel = channel_index(item.at("channel"), cfg.x_names);
        if (item.contains("amplitude")) req.amplitude = item.at("amplitude").get<double>();
        if (item.contains("start")) req.start = item.at("start").get<Index>();
        if (item.contains("stop")) req.stop = item.at("stop").get<Index>();
        cfg.faults.push_back(req);
      }
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  const json j = read_json(path);
  try {
    return config_from_json(j, path.parent_path(), seed_override);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config '" + path.string() + "': " + e.what());
  }
}

json bundle_to_json(const DesignBundle& b) {
  json j;
  j["x_names"] = b.x_names;
  j["u_names"] = b.u_names;
  j["dt"] = b.dt;
  j["p_false_alarm"] = b.p_false_alarm;
  j["normalization"] = {{"mean", vector_to_json(b.norm.mean)}, {"std", vector_to_json(b.norm.std)}};
  j["detection"] = {{"v", vector_to_json(b.detection.v)},
                    {"th_d", b.detection.th()},
                    {"p_false_alarm", b.detection.false_alarm_probability},
                    {"sigma_min", b.detection.sigma_min}};
  j["isolation"] = {{"W", matrix_to_json(b.isolation.W)},
                    {"objective", b.isolation.objective},
                    {"initial_objective", b.isolation.initial_objective},
                    {"iterations", b.isolation.iterations},
                    {"converged", b.isolation.converged},
                    {"restarts", b.isolation.restarts}};
  j["ls_model"] = {{"Wx", matrix_to_json(b.ls.Wx)},
                   {"Wu", matrix_to_json(b.ls.Wu)},
                   {"mean_abs_error", vector_to_json(b.ls.mean_abs_error)}};
  j["bba"] = {{"gamma", b.bba.gamma}, {"lambda", b.bba.lambda}, {"th_d", b.bba.threshold}};
  j["reliability"] = {{"delta", b.reliability.delta}, {"th_r", b.reliability.threshold}};
  j["fault_amplitudes"] = vector_to_json(b.fault_amplitudes);
  return j;
}

DesignBundle bundle_from_json(const json& j) {
  try {
    DesignBundle b;
    b.x_names = j.at("x_names").get<std::vector<std::string>>();
    b.u_names = j.at("u_names").get<std::vector<std::string>>();
    b.dt = j.at("dt").get<double>();
    b.p_false_alarm = j.at("p_false_alarm").get<double>();
    b.norm.mean = vector_from_json(j.at("normalization").at("mean"));
    b.norm.std = vector_from_json(j.at("normalization").at("std"));
    const auto& d = j.at("detection");
    b.detection.v = vector_from_json(d.at("v"));
    b.detection.threshold = d.at("th_d").get<double>();
    b.detection.false_alarm_probability = d.at("p_false_alarm").get<double>();
    b.detection.sigma_min = d.at("sigma_min").get<double>();
    const auto& iso = j.at("isolation");
    b.isolation.W = matrix_from_json(iso.at("W"));
    b.isolation.objective = iso.at("objective").get<double>();
    b.isolation.initial_objective = iso.at("initial_objective").get<double>();
    b.isolation.iterations = iso.at("iterations").get<int>();
    b.isolation.converged = iso.at("converged").get<bool>();
    b.isolation.restarts = iso.at("restarts").get<int>();
    const auto nx = static_cast<Index>(b.x_names.size());
    const auto nu = static_cast<Index>(b.u_names.size());
    b.ls.Wx = matrix_from_json(j.at("ls_model").at("Wx"), nx);
    b.ls.Wu = matrix_from_json(j.at("ls_model").at("Wu"), nu);
    b.ls.mean_abs_error = vector_from_json(j.at("ls_model").at("mean_abs_error"));
    b.bba = {j.at("bba").at("gamma").get<double>(), j.at("bba").at("lambda").get<double>(),
             j.at("bba").at("th_d").get<double>()};
    b.bba.validate();
    b.reliability = {j.at("reliability").at("delta").get<double>(), j.at("reliability").at("th_r").get<double>()};
    b.reliability.validate();
    b.fault_amplitudes = vector_from_json(j.at("fault_amplitudes"));

    if (b.detection.v.size() != nx + nu || b.isolation.W.rows() != nx || b.isolation.W.cols() != nx + nu ||
        b.norm.mean.size() != nx + nu || b.fault_amplitudes.size() != nx)
      throw std::invalid_argument("dimensions are inconsistent with the channel lists");
    return b;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("design bundle: ") + e.what());
  }
}

json report_to_json(const DiagnosisReport& r) {
  json j;
  j["dt"] = r.dt;
  j["samples"] = r.samples;
  j["x_names"] = r.x_names;
  j["design"] = {{"th_d", r.th_d},
                 {"th_r", r.th_r},
                 {"v", vector_to_json(r.v)},
                 {"isolation_objective", r.isolation_objective}};
  json scenarios = json::array();
  for (const auto& s : r.scenarios) {
    json sj;
    sj["name"] = s.name;
    if (s.fault)
      sj["fault"] = {{"channel", s.fault->channel},
                     {"amplitude", s.fault->amplitude},
                     {"start", s.fault->start},
                     {"stop", s.fault->stop}};
    else
      sj["fault"] = nullptr;
    json rules = json::array();
    for (const auto& m : s.metrics) {
      json mj;
      mj["rule"] = m.rule;
      mj["tdr"] = m.tdr ? json(*m.tdr) : json(nullptr);
      mj["tir"] = m.tir ? json(*m.tir) : json(nullptr);
      mj["false_alarm_rate"] = m.false_alarm_rate;
      mj["skipped_updates"] = m.skipped_updates;
      rules.push_back(mj);
    }
    sj["rules"] = rules;
    scenarios.push_back(sj);
  }
  j["scenarios"] = scenarios;
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << dump(j);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace sfdi
