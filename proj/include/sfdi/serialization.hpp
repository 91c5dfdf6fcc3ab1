#pragma once

#include "sfdi/harness.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace sfdi {

using json = nlohmann::json;

/// Parses a pipeline config. Relative CSV paths resolve against `base_dir`.
/// Synthetic sources without an explicit "seed" get seed + index (training)
/// or seed + 1000 (validation), where seed is `seed_override` if given; all
/// of them share `seed` as their system seed unless they set "system_seed".
PipelineConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {},
                                std::optional<std::uint64_t> seed_override = std::nullopt);
PipelineConfig load_config(const std::filesystem::path& path,
                           std::optional<std::uint64_t> seed_override = std::nullopt);

json synthetic_to_json(const SyntheticConfig& cfg);
SyntheticConfig synthetic_from_json(const json& j, std::uint64_t default_seed,
                                    std::optional<std::uint64_t> default_system_seed = std::nullopt);

/// Matrices are stored as arrays of rows.
json bundle_to_json(const DesignBundle& bundle);
DesignBundle bundle_from_json(const json& j);

/// Metrics and design summary; time series are emitted separately as CSV.
json report_to_json(const DiagnosisReport& report);

/// Two-space indented dump with a trailing newline. Doubles are written in
/// shortest round-trip form, so re-parsing is lossless.
std::string dump(const json& j);
void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

}  // namespace sfdi
