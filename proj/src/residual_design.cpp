#include "sfdi/residual_design.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace sfdi {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kDiagonalGuard = 1e-8;
constexpr int kMaxRestarts = 10;
constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-14;
constexpr double kMaxStep = 4.0;

// ||Xres W'^T||_F^2 = tr(S W'^T W') and W'^T W' = D Q^T Q D = D^2.
double reduced_objective(const VectorXd& s_diag, const MatrixXd& Q) {
  double f = 0.0;
  for (Index i = 0; i < Q.cols(); ++i) f += s_diag(i) / (Q(i, i) * Q(i, i));
  return f;
}

MatrixXd euclidean_gradient(const VectorXd& s_diag, const MatrixXd& Q) {
  MatrixXd G = MatrixXd::Zero(Q.rows(), Q.cols());
  for (Index i = 0; i < Q.cols(); ++i) G(i, i) = -2.0 * s_diag(i) / std::pow(Q(i, i), 3);
  return G;
}

MatrixXd polar(const MatrixXd& A) {
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

bool diagonal_degenerate(const MatrixXd& Q) {
  return (Q.diagonal().array().abs() < kDiagonalGuard).any();
}

MatrixXd signatures_from(const MatrixXd& Q) {
  MatrixXd Wp = Q;
  for (Index i = 0; i < Q.cols(); ++i) Wp.col(i) *= -1.0 / Q(i, i);
  Wp.diagonal().setConstant(-1.0);
  return Wp;
}

}  // namespace

VectorXd IsolationModel::unit_signature(Index i) const {
  return W.col(i).normalized();
}

IsolationModel optimize_fault_directions(const Dataset& train, const SolverOptions& opts) {
  const Index nx = train.nx();
  const Index nu = train.nu();
  if (nx < 2) throw std::invalid_argument("fault direction design needs at least two sensors");
  if (train.rows() <= train.n())
    throw std::invalid_argument("fault direction design needs more samples than channels");
  if (opts.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (!(opts.step > 0.0)) throw std::invalid_argument("step must be > 0");

  const MatrixXd X = train.x();
  const MatrixXd U = train.u();

  // Input-block least squares: for any W', the optimal W_u is -W' B^T.
  MatrixXd B = MatrixXd::Zero(nu, nx);
  MatrixXd Xres = X;
  if (nu > 0) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(U);
    if (qr.rank() < nu) throw std::runtime_error("input channels of the training set are rank deficient");
    B = qr.solve(X);
    Xres = X - U * B;
  }
  const VectorXd s_diag = Xres.colwise().squaredNorm().transpose();

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  IsolationModel model;
  MatrixXd Q = MatrixXd::Identity(nx, nx);
  if (opts.random_start) {
    MatrixXd A(nx, nx);
    for (Index r = 0; r < nx; ++r)
      for (Index c = 0; c < nx; ++c) A(r, c) = gauss(rng);
    Q = polar(A);
    while (diagonal_degenerate(Q)) {
      if (++model.restarts > kMaxRestarts)
        throw std::runtime_error("fault direction solver: could not draw a start with nonzero diagonal");
      for (Index r = 0; r < nx; ++r)
        for (Index c = 0; c < nx; ++c) A(r, c) = gauss(rng);
      Q = polar(A);
    }
  }
  const MatrixXd Q0 = Q;
  double f = reduced_objective(s_diag, Q);
  model.objective_history.push_back(std::sqrt(f));

  double step = opts.step;
  for (int it = 0; it < opts.max_iters; ++it) {
    const MatrixXd G = euclidean_gradient(s_diag, Q);
    const MatrixXd QtG = Q.transpose() * G;
    const MatrixXd omega = 0.5 * (QtG - QtG.transpose());
    const MatrixXd xi = Q * omega;  // Riemannian gradient
    const double gnorm = xi.norm();
    model.iterations = it + 1;
    if (f == 0.0 || gnorm <= 1e-14 * (1.0 + f)) {
      model.converged = true;
      break;
    }
    const MatrixXd direction = -xi / gnorm;

    bool accepted = false;
    MatrixXd trial;
    double f_trial = f;
    while (step >= kMinStep) {
      trial = polar(Q + step * direction);
      while (diagonal_degenerate(trial)) {
        if (++model.restarts > kMaxRestarts)
          throw std::runtime_error("fault direction solver: zero diagonal in the orthogonal factor after " +
                                   std::to_string(kMaxRestarts) + " restarts");
        MatrixXd perturb(nx, nx);
        for (Index r = 0; r < nx; ++r)
          for (Index c = 0; c < nx; ++c) perturb(r, c) = 1e-3 * gauss(rng);
        trial = polar(trial * (MatrixXd::Identity(nx, nx) + perturb));
      }
      f_trial = reduced_objective(s_diag, trial);
      if (f_trial <= f - kArmijo * step * gnorm) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No descent left at machine precision.
      model.converged = true;
      break;
    }

    const double previous = std::sqrt(f);
    Q = trial;
    f = f_trial;
    model.objective_history.push_back(std::sqrt(f));
    step = std::min(2.0 * step, kMaxStep);
    if (std::abs(previous - std::sqrt(f)) <= opts.tol * std::max(previous, 1e-300)) {
      model.converged = true;
      break;
    }
  }

  auto assemble = [&](const MatrixXd& q) {
    const MatrixXd Wp = signatures_from(q);
    MatrixXd W(nx, nx + nu);
    W.leftCols(nx) = Wp;
    if (nu > 0) W.rightCols(nu) = -Wp * B.transpose();
    return W;
  };
  const MatrixXd Z = train.samples();
  model.W = assemble(Q);
  model.objective = (Z * model.W.transpose()).norm();
  model.initial_objective = (Z * assemble(Q0).transpose()).norm();
  return model;
}

VectorXd directional_residual(const VectorXd& z, const IsolationModel& model) {
  if (z.size() != model.n())
    throw std::invalid_argument("directional_residual: sample has " + std::to_string(z.size()) +
                                " channels, model expects " + std::to_string(model.n()));
  return model.W * z;
}

VectorXd angular_distances(const VectorXd& r, const IsolationModel& model) {
  const Index nx = model.nx();
  if (r.size() != nx) throw std::invalid_argument("angular_distances: residual size mismatch");
  VectorXd d = VectorXd::Constant(nx, 90.0);
  const double norm = r.norm();
  if (norm < 1e-12) return d;
  const VectorXd r_hat = r / norm;
  for (Index i = 0; i < nx; ++i) {
    const double c = std::min(1.0, std::abs(r_hat.dot(model.unit_signature(i))));
    d(i) = std::acos(c) * 180.0 / std::numbers::pi;
  }
  return d;
}

}  // namespace sfdi
