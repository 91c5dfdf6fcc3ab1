#pragma once

#include "sfdi/data_pipeline.hpp"

#include <cstdint>
#include <vector>

namespace sfdi {

struct SolverOptions {
  int max_iters = 500;
  double tol = 1e-8;   // relative objective change
  double step = 0.1;   // initial step length along the unit descent direction
  std::uint64_t seed = 0;
  bool random_start = false;  // seeded random orthogonal start instead of W' = -I
};

/// Directional residual generator r = W z. The first nx columns of W are the
/// fault signatures: W(i, i) == -1 and the unit signatures are mutually
/// orthogonal.
struct IsolationModel {
  Eigen::MatrixXd W;  // nx x n
  double objective = 0.0;          // ||Z W^T||_F on the training data
  double initial_objective = 0.0;  // same, at the starting point
  int iterations = 0;
  bool converged = false;
  int restarts = 0;
  std::vector<double> objective_history;  // one entry per accepted iterate

  Eigen::Index nx() const { return W.rows(); }
  Eigen::Index n() const { return W.cols(); }
  /// Column i of W (length nx), normalized.
  Eigen::VectorXd unit_signature(Eigen::Index i) const;
};

/// Minimizes ||Z W^T||_F subject to diag(W) = -1 and orthogonal signatures.
///
/// The signature block is parametrized as W' = Q D with Q orthogonal and
/// D_ii = -1 / Q_ii, which satisfies both constraints for every Q. The input
/// block is eliminated by least squares, and since W'^T W' = D^2 the squared
/// objective becomes
///   f(Q) = sum_i S_ii / Q_ii^2,  S = X^T (I - P_U) X,
/// decreased by backtracking steps along the Riemannian gradient on O(nx)
/// with polar retraction. f >= tr(S) with equality exactly when Q is a signed
/// identity, so the default start Q = I (W' = -I) is already optimal and the
/// solver stops at its first iteration; `random_start` exercises the descent.
IsolationModel optimize_fault_directions(const Dataset& train, const SolverOptions& opts = {});

Eigen::VectorXd directional_residual(const Eigen::VectorXd& z, const IsolationModel& model);

/// arccos(|r_hat . w_hat_i|) in degrees, folded into [0, 90]. A residual with
/// norm below 1e-12 carries no direction and maps to 90 for every sensor.
Eigen::VectorXd angular_distances(const Eigen::VectorXd& r, const IsolationModel& model);

}  // namespace sfdi
