#pragma once

#include "sfdi/data_pipeline.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace sfdi {

/// Interval [start, stop) of elevated control activity. Inputs inside it are
/// scaled by `intensity` while the monitored sensors are not, which models the
/// extra uncertainty of a linear model during manoeuvres.
struct ManeuverSegment {
  Eigen::Index start = 0;
  Eigen::Index stop = 0;
  double intensity = 1.0;

  bool operator==(const ManeuverSegment&) const = default;
};

/// Flight-like record built from a few smooth latent drivers mixed linearly
/// into every channel, plus optional disturbance drivers (wind, unmodelled
/// dynamics) that reach the monitored sensors but not the inputs.
struct SyntheticConfig {
  Eigen::Index nx = 8;
  Eigen::Index nu = 4;
  Eigen::Index m = 9600;
  Eigen::Index latent_dim = 4;
  Eigen::Index disturbance_dim = 0;
  double disturbance_std = 0.0;
  double noise_std = 0.05;
  std::vector<ManeuverSegment> maneuver_segments;
  std::uint64_t seed = 1;
  /// Seeds the mixing matrix, i.e. the simulated airframe. Flights that share
  /// it obey the same linear relations. Defaults to `seed`.
  std::optional<std::uint64_t> system_seed;
  double dt = 0.1;

  bool operator==(const SyntheticConfig&) const = default;
};

/// Deterministic for a given config. Channels are named x1..xN and u1..uN.
Dataset generate_synthetic_flight(const SyntheticConfig& cfg);

/// Fraction of samples covered by at least one manoeuvre segment.
double maneuver_coverage(const SyntheticConfig& cfg);

}  // namespace sfdi
