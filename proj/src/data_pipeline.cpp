#include "sfdi/data_pipeline.hpp"

#include "sfdi/csv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace sfdi {

using Eigen::Index;

Dataset::Dataset(Eigen::MatrixXd samples, std::vector<std::string> x_channels,
                 std::vector<std::string> u_channels, double dt)
    : samples_(std::move(samples)),
      x_channels_(std::move(x_channels)),
      u_channels_(std::move(u_channels)),
      dt_(dt) {
  const auto n = static_cast<Index>(x_channels_.size() + u_channels_.size());
  if (x_channels_.empty()) throw std::invalid_argument("dataset needs at least one x channel");
  if (n < 2) throw std::invalid_argument("dataset needs at least two channels");
  if (samples_.cols() != n) {
    throw std::invalid_argument("dataset has " + std::to_string(samples_.cols()) +
                                " columns but " + std::to_string(n) + " channel names");
  }
  if (samples_.rows() < n) {
    throw std::invalid_argument("dataset has " + std::to_string(samples_.rows()) +
                                " samples, fewer than its " + std::to_string(n) + " channels");
  }
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw std::invalid_argument("dt must be positive");
  for (Index c = 0; c < samples_.cols(); ++c)
    for (Index r = 0; r < samples_.rows(); ++r)
      if (!std::isfinite(samples_(r, c)))
        throw std::invalid_argument("non-finite value at row " + std::to_string(r + 1) +
                                    ", column " + std::to_string(c + 1));
}

std::vector<std::string> Dataset::channel_names() const {
  auto names = x_channels_;
  names.insert(names.end(), u_channels_.begin(), u_channels_.end());
  return names;
}

bool Dataset::operator==(const Dataset& other) const {
  return x_channels_ == other.x_channels_ && u_channels_ == other.u_channels_ &&
         dt_ == other.dt_ && samples_.rows() == other.samples_.rows() &&
         samples_.cols() == other.samples_.cols() && samples_ == other.samples_;
}

Dataset Dataset::concatenate(const std::vector<Dataset>& parts) {
  if (parts.empty()) throw std::invalid_argument("concatenate: no datasets");
  Index rows = 0;
  for (const auto& p : parts) {
    if (p.x_channels() != parts.front().x_channels() ||
        p.u_channels() != parts.front().u_channels())
      throw std::invalid_argument("concatenate: channel schemas differ");
    rows += p.rows();
  }
  Eigen::MatrixXd all(rows, parts.front().n());
  Index at = 0;
  for (const auto& p : parts) {
    all.middleRows(at, p.rows()) = p.samples();
    at += p.rows();
  }
  return Dataset(std::move(all), parts.front().x_channels(), parts.front().u_channels(),
                 parts.front().dt());
}

Eigen::MatrixXd LsModel::w_prime() const {
  return Wx - Eigen::MatrixXd::Identity(Wx.rows(), Wx.cols());
}

Eigen::MatrixXd LsModel::w_full() const {
  Eigen::MatrixXd W(Wx.rows(), Wx.cols() + Wu.cols());
  W << w_prime(), Wu;
  return W;
}

Eigen::VectorXd LsModel::estimate(const Eigen::VectorXd& z) const {
  const Index nx = Wx.rows();
  if (z.size() != nx + Wu.cols()) throw std::invalid_argument("estimate: sample size mismatch");
  return Wx * z.head(nx) + Wu * z.tail(Wu.cols());
}

Dataset load_dataset(const std::filesystem::path& path, const std::vector<std::string>& x_names,
                     const std::vector<std::string>& u_names, double dt) {
  const CsvTable table = read_csv(path);

  std::unordered_map<std::string, Index> column_of;
  for (std::size_t i = 0; i < table.headers.size(); ++i)
    column_of.emplace(table.headers[i], static_cast<Index>(i));

  std::vector<Index> order;
  for (const auto* names : {&x_names, &u_names}) {
    for (const auto& name : *names) {
      const auto it = column_of.find(name);
      if (it == column_of.end()) {
        std::string available;
        for (const auto& h : table.headers) available += (available.empty() ? "" : ", ") + h;
        throw std::runtime_error("column '" + name + "' not found in '" + path.string() +
                                 "'; available headers: " + available);
      }
      order.push_back(it->second);
    }
  }

  Eigen::MatrixXd samples(table.values.rows(), static_cast<Index>(order.size()));
  for (std::size_t j = 0; j < order.size(); ++j)
    samples.col(static_cast<Index>(j)) = table.values.col(order[j]);
  return Dataset(std::move(samples), x_names, u_names, dt);
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  write_csv(path, ds.channel_names(), ds.samples());
}

NormStats compute_normalization(const Dataset& train) {
  const auto& Z = train.samples();
  if (Z.rows() < 2) throw std::invalid_argument("normalization needs at least two samples");
  NormStats stats;
  stats.mean = Z.colwise().mean().transpose();
  stats.std.resize(Z.cols());
  const auto names = train.channel_names();
  for (Index c = 0; c < Z.cols(); ++c) {
    const double var =
        (Z.col(c).array() - stats.mean(c)).square().sum() / static_cast<double>(Z.rows());
    const double sd = std::sqrt(var);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(stats.mean(c)))))
      throw std::invalid_argument("channel '" + names[static_cast<std::size_t>(c)] +
                                  "' is constant and cannot be normalized");
    stats.std(c) = sd;
  }
  return stats;
}

Dataset apply_normalization(const Dataset& ds, const NormStats& stats) {
  if (stats.mean.size() != ds.n() || stats.std.size() != ds.n())
    throw std::invalid_argument("normalization stats have " + std::to_string(stats.mean.size()) +
                                " channels, dataset has " + std::to_string(ds.n()));
  if ((stats.std.array() <= 0.0).any())
    throw std::invalid_argument("normalization std must be strictly positive");
  Eigen::MatrixXd Z = (ds.samples().rowwise() - stats.mean.transpose()).array().rowwise() /
                      stats.std.transpose().array();
  return Dataset(std::move(Z), ds.x_channels(), ds.u_channels(), ds.dt());
}

Dataset inject_fault(const Dataset& ds, const FaultSpec& fault) {
  if (fault.channel < 0 || fault.channel >= ds.nx())
    throw std::invalid_argument("fault channel " + std::to_string(fault.channel) +
                                " outside the " + std::to_string(ds.nx()) + " monitored sensors");
  if (fault.start < 0 || fault.start >= fault.stop || fault.stop > ds.rows())
    throw std::invalid_argument("fault interval [" + std::to_string(fault.start) + ", " +
                                std::to_string(fault.stop) + ") outside [0, " +
                                std::to_string(ds.rows()) + ")");
  if (!std::isfinite(fault.amplitude)) throw std::invalid_argument("fault amplitude not finite");
  Eigen::MatrixXd Z = ds.samples();
  Z.col(fault.channel).segment(fault.start, fault.stop - fault.start).array() += fault.amplitude;
  return Dataset(std::move(Z), ds.x_channels(), ds.u_channels(), ds.dt());
}

LsModel fit_ls_model(const Dataset& train) {
  const Index nx = train.nx();
  const Index nu = train.nu();
  const Index n = train.n();
  const auto& Z = train.samples();

  LsModel model;
  model.Wx = Eigen::MatrixXd::Zero(nx, nx);
  model.Wu = Eigen::MatrixXd::Zero(nx, nu);
  model.mean_abs_error = Eigen::VectorXd::Zero(nx);

  Eigen::MatrixXd regressors(Z.rows(), n - 1);
  for (Index i = 0; i < nx; ++i) {
    // Every channel except sensor i, in z order.
    for (Index c = 0, j = 0; c < n; ++c)
      if (c != i) regressors.col(j++) = Z.col(c);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(regressors);
    if (qr.rank() < regressors.cols())
      throw std::runtime_error("regressors for sensor '" +
                               train.x_channels()[static_cast<std::size_t>(i)] +
                               "' are rank deficient (rank " + std::to_string(qr.rank()) +
                               " of " + std::to_string(regressors.cols()) + ")");
    const Eigen::VectorXd coef = qr.solve(Z.col(i));

    for (Index c = 0, j = 0; c < n; ++c) {
      if (c == i) continue;
      if (c < nx)
        model.Wx(i, c) = coef(j);
      else
        model.Wu(i, c - nx) = coef(j);
      ++j;
    }
    model.mean_abs_error(i) = (Z.col(i) - regressors * coef).cwiseAbs().mean();
  }
  return model;
}

double round_to_one_significant_figure(double value) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  const double magnitude = std::pow(10.0, std::floor(std::log10(std::abs(value))));
  return std::round(value / magnitude) * magnitude;
}

double calibrate_fault_amplitude(const LsModel& model, Index channel, double factor) {
  if (channel < 0 || channel >= model.mean_abs_error.size())
    throw std::invalid_argument("calibrate_fault_amplitude: channel out of range");
  if (!(factor > 0.0)) throw std::invalid_argument("calibrate_fault_amplitude: factor must be > 0");
  return factor * round_to_one_significant_figure(model.mean_abs_error(channel));
}

}  // namespace sfdi
