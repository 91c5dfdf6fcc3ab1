#include "sfdi/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace sfdi {

using Eigen::Index;

namespace {

constexpr int kSinusoidsPerLatent = 3;
constexpr double kArCoefficient = 0.995;

void validate(const SyntheticConfig& cfg) {
  if (cfg.nx < 1) throw std::invalid_argument("synthetic: nx must be >= 1");
  if (cfg.nu < 0) throw std::invalid_argument("synthetic: nu must be >= 0");
  const Index n = cfg.nx + cfg.nu;
  if (n < 2) throw std::invalid_argument("synthetic: need at least two channels");
  if (cfg.m < n) throw std::invalid_argument("synthetic: m must be >= number of channels");
  if (cfg.latent_dim < 1) throw std::invalid_argument("synthetic: latent_dim must be >= 1");
  if (cfg.disturbance_dim < 0) throw std::invalid_argument("synthetic: disturbance_dim must be >= 0");
  if (!(cfg.disturbance_std >= 0.0)) throw std::invalid_argument("synthetic: disturbance_std must be >= 0");
  if (cfg.latent_dim + cfg.disturbance_dim >= n)
    throw std::invalid_argument("synthetic: latent_dim + disturbance_dim = " +
                                std::to_string(cfg.latent_dim + cfg.disturbance_dim) +
                                " >= channel count " + std::to_string(n) + " leaves no null space");
  if (!(cfg.noise_std >= 0.0)) throw std::invalid_argument("synthetic: noise_std must be >= 0");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("synthetic: dt must be > 0");
  for (const auto& seg : cfg.maneuver_segments) {
    if (seg.start < 0 || seg.start >= seg.stop || seg.stop > cfg.m)
      throw std::invalid_argument("synthetic: manoeuvre segment [" + std::to_string(seg.start) +
                                  ", " + std::to_string(seg.stop) + ") outside [0, m)");
    if (!(seg.intensity > 0.0))
      throw std::invalid_argument("synthetic: manoeuvre intensity must be > 0");
  }
}

// Unit-variance zero-mean smooth signal: a few slow sinusoids plus
// low-pass filtered white noise.
Eigen::VectorXd smooth_latent(Index m, double dt, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> freq(0.005, 0.08);  // Hz
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> amp(0.5, 1.5);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
  for (int j = 0; j < kSinusoidsPerLatent; ++j) {
    const double f = freq(rng);
    const double p = phase(rng);
    const double a = amp(rng);
    for (Index k = 0; k < m; ++k)
      s(k) += a * std::sin(2.0 * std::numbers::pi * f * dt * static_cast<double>(k) + p);
  }
  double ar = 0.0;
  const double drive = std::sqrt(1.0 - kArCoefficient * kArCoefficient);
  for (Index k = 0; k < m; ++k) {
    ar = kArCoefficient * ar + drive * gauss(rng);
    s(k) += ar;
  }
  s.array() -= s.mean();
  const double sd = std::sqrt(s.squaredNorm() / static_cast<double>(m));
  if (sd > 0.0) s /= sd;
  return s;
}

}  // namespace

Dataset generate_synthetic_flight(const SyntheticConfig& cfg) {
  validate(cfg);
  const Index n = cfg.nx + cfg.nu;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::mt19937_64 system_rng(cfg.system_seed.value_or(cfg.seed));
  Eigen::MatrixXd mixing(n, cfg.latent_dim);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < cfg.latent_dim; ++c) mixing(r, c) = gauss(system_rng);
  // Unit-norm rows keep every channel at roughly unit variance.
  mixing.rowwise().normalize();

  Eigen::MatrixXd latent(cfg.m, cfg.latent_dim);
  for (Index c = 0; c < cfg.latent_dim; ++c) latent.col(c) = smooth_latent(cfg.m, cfg.dt, rng);

  Eigen::MatrixXd Z = latent * mixing.transpose();

  if (cfg.disturbance_dim > 0 && cfg.disturbance_std > 0.0) {
    Eigen::MatrixXd dmix(cfg.nx, cfg.disturbance_dim);
    for (Index r = 0; r < cfg.nx; ++r)
      for (Index c = 0; c < cfg.disturbance_dim; ++c) dmix(r, c) = gauss(system_rng);
    dmix.rowwise().normalize();
    Eigen::MatrixXd dist(cfg.m, cfg.disturbance_dim);
    for (Index c = 0; c < cfg.disturbance_dim; ++c) dist.col(c) = smooth_latent(cfg.m, cfg.dt, rng);
    Z.leftCols(cfg.nx) += cfg.disturbance_std * dist * dmix.transpose();
  }

  for (const auto& seg : cfg.maneuver_segments)
    Z.block(seg.start, cfg.nx, seg.stop - seg.start, cfg.nu) *= seg.intensity;

  if (cfg.noise_std > 0.0)
    for (Index c = 0; c < n; ++c)
      for (Index k = 0; k < cfg.m; ++k) Z(k, c) += cfg.noise_std * gauss(rng);

  std::vector<std::string> x_names, u_names;
  for (Index i = 0; i < cfg.nx; ++i) x_names.push_back("x" + std::to_string(i + 1));
  for (Index i = 0; i < cfg.nu; ++i) u_names.push_back("u" + std::to_string(i + 1));
  return Dataset(std::move(Z), std::move(x_names), std::move(u_names), cfg.dt);
}

double maneuver_coverage(const SyntheticConfig& cfg) {
  if (cfg.m <= 0) return 0.0;
  std::vector<bool> covered(static_cast<std::size_t>(cfg.m), false);
  for (const auto& seg : cfg.maneuver_segments)
    for (Index k = std::max<Index>(seg.start, 0); k < std::min(seg.stop, cfg.m); ++k)
      covered[static_cast<std::size_t>(k)] = true;
  Index count = 0;
  for (bool c : covered) count += c ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(cfg.m);
}

}  // namespace sfdi
