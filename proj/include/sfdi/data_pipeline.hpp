#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace sfdi {

/// Time-indexed sensor record. Row k holds z(k) = [x(k); u(k)]: the monitored
/// sensors first, then the inputs that are assumed fault-free.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd samples, std::vector<std::string> x_channels,
          std::vector<std::string> u_channels, double dt = 0.1);

  const Eigen::MatrixXd& samples() const { return samples_; }
  const std::vector<std::string>& x_channels() const { return x_channels_; }
  const std::vector<std::string>& u_channels() const { return u_channels_; }
  double dt() const { return dt_; }

  Eigen::Index rows() const { return samples_.rows(); }
  Eigen::Index nx() const { return static_cast<Eigen::Index>(x_channels_.size()); }
  Eigen::Index nu() const { return static_cast<Eigen::Index>(u_channels_.size()); }
  Eigen::Index n() const { return samples_.cols(); }

  auto x() const { return samples_.leftCols(nx()); }
  auto u() const { return samples_.rightCols(nu()); }

  std::vector<std::string> channel_names() const;

  /// Row-wise concatenation of datasets sharing the same channel schema.
  static Dataset concatenate(const std::vector<Dataset>& parts);

  /// Bitwise equality of samples plus schema and dt.
  bool operator==(const Dataset& other) const;

 private:
  Eigen::MatrixXd samples_;
  std::vector<std::string> x_channels_;
  std::vector<std::string> u_channels_;
  double dt_;
};

struct NormStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
};

/// Linear analytical-redundancy model x = Wx x + Wu u + residual.
struct LsModel {
  Eigen::MatrixXd Wx;  // zero diagonal
  Eigen::MatrixXd Wu;
  Eigen::VectorXd mean_abs_error;

  /// W' = Wx - I.
  Eigen::MatrixXd w_prime() const;
  /// W = [W' Wu]; W z = 0 for fault-free samples up to the model error.
  Eigen::MatrixXd w_full() const;
  Eigen::VectorXd estimate(const Eigen::VectorXd& z) const;
};

/// Additive bias on one monitored channel over samples [start, stop).
struct FaultSpec {
  Eigen::Index channel = 0;
  double amplitude = 0.0;
  Eigen::Index start = 0;
  Eigen::Index stop = 0;

  bool active(Eigen::Index k) const { return k >= start && k < stop; }
  bool operator==(const FaultSpec&) const = default;
};

Dataset load_dataset(const std::filesystem::path& path,
                     const std::vector<std::string>& x_names,
                     const std::vector<std::string>& u_names, double dt = 0.1);

void save_dataset(const std::filesystem::path& path, const Dataset& ds);

/// Per-channel mean and population standard deviation.
NormStats compute_normalization(const Dataset& train);

Dataset apply_normalization(const Dataset& ds, const NormStats& stats);

Dataset inject_fault(const Dataset& ds, const FaultSpec& fault);

/// Fits each monitored sensor by ordinary least squares on every other
/// channel and records its mean absolute training residual.
LsModel fit_ls_model(const Dataset& train);

/// Rounds to one significant figure (0.172 -> 0.2, 0.0499 -> 0.05).
double round_to_one_significant_figure(double value);

/// factor x (mean absolute LS error of `channel`, rounded to one significant
/// figure).
double calibrate_fault_amplitude(const LsModel& model, Eigen::Index channel,
                                 double factor = 3.0);

}  // namespace sfdi
