#include "regalign/solver.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "partial_eigen.hpp"
#include "regalign/geometry.hpp"

namespace regalign {

namespace {

Eigen::MatrixXd clip_reconstruct(const detail::TopEigen& top, int n) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < top.values.size(); ++i) {
    const double lambda = std::max(top.values(i), 0.0);
    if (lambda > 0.0) {
      out.noalias() += lambda * top.vectors.col(i) * top.vectors.col(i).transpose();
    }
  }
  return 0.5 * (out + out.transpose()).eval();
}

void check_square(const Eigen::MatrixXd& a, int expected) {
  if (a.rows() != a.cols() || (expected > 0 && a.rows() != expected)) {
    throw Error(ErrorCode::dimension_mismatch, "matrix has the wrong size");
  }
}

// Factor stack from the top-d eigenpairs, with the global reflection fixed
// so that the leading block orients positively.
Eigen::MatrixXd factor_stack(const detail::TopEigen& top, int d, int m) {
  const int dm = d * m;
  Eigen::MatrixXd w(d, dm);
  for (int i = 0; i < d; ++i) {
    w.row(i) = std::sqrt(std::max(top.values(i), 0.0)) * top.vectors.col(i).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w.leftCols(d),
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double det =
      (svd.matrixU() * svd.matrixV().transpose()).determinant();
  if (det < 0.0) {
    w.row(d - 1) *= -1.0;
  }
  return w;
}

std::vector<RotationMatrix> project_blocks(const Eigen::MatrixXd& w, int d, int m) {
  std::vector<RotationMatrix> rotations;
  rotations.reserve(m);
  for (int i = 0; i < m; ++i) {
    rotations.push_back(project_so(w.middleCols(d * i, d)));
  }
  return rotations;
}

Eigen::MatrixXd stack(const std::vector<RotationMatrix>& rotations) {
  const int d = rotations.front().dim();
  const int m = static_cast<int>(rotations.size());
  Eigen::MatrixXd r(d, d * m);
  for (int i = 0; i < m; ++i) r.middleCols(d * i, d) = rotations[i].matrix();
  return r;
}

}  // namespace

Eigen::MatrixXd project_omega(const Eigen::MatrixXd& a, int d, EigMethod method) {
  check_square(a, 0);
  if (d < 1 || d > a.rows()) {
    throw Error(ErrorCode::invalid_argument, "rank bound out of range");
  }
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  detail::TopEigenSolver solver(d, method);
  return clip_reconstruct(solver.compute(sym), static_cast<int>(a.rows()));
}

Eigen::MatrixXd project_theta(const Eigen::MatrixXd& a, int d, int m) {
  check_square(a, d * m);
  Eigen::MatrixXd out = a;
  for (int i = 0; i < m; ++i) {
    out.block(d * i, d * i, d, d) = Eigen::MatrixXd::Identity(d, d);
  }
  for (int i = 0; i + 1 < m; ++i) {
    const Eigen::MatrixXd block = project_so(a.block(d * i, d * (i + 1), d, d)).matrix();
    out.block(d * i, d * (i + 1), d, d) = block;
    out.block(d * (i + 1), d * i, d, d) = block.transpose();
  }
  return out;
}

Eigen::MatrixXd identity_init(int d, int m) {
  Eigen::MatrixXd h(d * m, d * m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      h.block(d * i, d * j, d, d) = Eigen::MatrixXd::Identity(d, d);
    }
  }
  return h;
}

Eigen::MatrixXd spectral_init(const CostMatrix& cost, EigMethod method) {
  const int d = cost.d;
  const int m = cost.m;
  detail::TopEigenSolver solver(d, method);
  // Smallest eigenvectors of C are the largest of -C.
  const detail::TopEigen top = solver.compute((-cost.C).eval());

  Eigen::MatrixXd w(d, d * m);
  for (int i = 0; i < d; ++i) {
    w.row(i) = std::sqrt(static_cast<double>(m)) * top.vectors.col(i).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w.leftCols(d),
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
    w.row(d - 1) *= -1.0;
  }
  const Eigen::MatrixXd r = stack(project_blocks(w, d, m));
  return r.transpose() * r;
}

std::vector<RotationMatrix> round_gram(const Eigen::MatrixXd& h_star, int d, int m,
                                       EigMethod method) {
  check_square(h_star, d * m);
  detail::TopEigenSolver solver(d, method);
  const detail::TopEigen top = solver.compute(0.5 * (h_star + h_star.transpose()));
  const double floor = 1e-12 * std::max(1.0, std::abs(top.values(0)));
  for (int i = 0; i < d; ++i) {
    if (top.values(i) <= floor) {
      throw Error(ErrorCode::degenerate_rounding,
                  "fewer than d positive eigenvalues; cannot factor the Gram matrix");
    }
  }
  return project_blocks(factor_stack(top, d, m), d, m);
}

AdmmResult admm_solve(const CostMatrix& cost, const SolverConfig& config) {
  if (config.rho <= 0.0 || config.eps_abs <= 0.0 || config.eig_tol <= 0.0 ||
      config.max_iterations < 1) {
    throw Error(ErrorCode::invalid_argument, "invalid solver configuration");
  }
  const int d = cost.d;
  const int m = cost.m;
  const int dm = d * m;

  GramIterate state;
  state.rho = config.rho;
  switch (config.init_mode) {
    case InitMode::spectral:
      state.H = spectral_init(cost, config.eig_method);
      break;
    case InitMode::all_identity:
      state.H = identity_init(d, m);
      break;
    case InitMode::user:
      check_square(config.initial_h, dm);
      state.H = 0.5 * (config.initial_h + config.initial_h.transpose());
      break;
  }
  state.Lambda = Eigen::MatrixXd::Zero(dm, dm);
  state.G = Eigen::MatrixXd::Zero(dm, dm);
  state.history.reserve(config.max_iterations);

  detail::TopEigenSolver omega_solver(d, config.eig_method, config.eig_tol);
  const double inv_rho = 1.0 / config.rho;
  const double stop_at = config.eps_abs * dm;
  bool converged = false;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    state.iteration = iter;

    Eigen::MatrixXd arg = state.H - inv_rho * (cost.C + state.Lambda);
    arg = 0.5 * (arg + arg.transpose()).eval();
    state.G = clip_reconstruct(omega_solver.compute(arg), dm);

    Eigen::MatrixXd h_next = project_theta(state.G + inv_rho * state.Lambda, d, m);

    state.Lambda += config.rho * (state.G - h_next);
    state.Lambda = 0.5 * (state.Lambda + state.Lambda.transpose()).eval();

    const double primal = (state.G - h_next).norm();
    const double dual = config.rho * (h_next - state.H).norm();
    state.H = std::move(h_next);
    state.history.push_back({objective(cost, state.G), primal, dual});

    if (std::max(primal, dual) <= stop_at) {
      converged = true;
      break;
    }
  }

  Registration registration;
  registration.converged = converged;
  registration.iterations_used = state.iteration;

  std::vector<RotationMatrix> rotations = round_gram(state.H, d, m, config.eig_method);
  const Eigen::MatrixXd r = stack(rotations);
  registration.objective_value = objective(cost, r.transpose() * r);
  std::vector<Eigen::VectorXd> translations = recover_translations(cost, r);
  registration.transforms.reserve(m);
  registration.determinants.reserve(m);
  for (int i = 0; i < m; ++i) {
    registration.determinants.push_back(rotations[i].matrix().determinant());
    registration.transforms.push_back({std::move(rotations[i]), std::move(translations[i])});
  }
  return {std::move(state), std::move(registration)};
}

RigidTransform umeyama_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "point lists must be index-aligned");
  }
  if (x.cols() < 1) {
    throw Error(ErrorCode::invalid_argument, "empty point lists");
  }
  const Eigen::VectorXd x_bar = x.rowwise().mean();
  const Eigen::VectorXd y_bar = y.rowwise().mean();
  const Eigen::MatrixXd h =
      (x.colwise() - x_bar) * (y.colwise() - y_bar).transpose();
  RotationMatrix r = project_so(h);
  Eigen::VectorXd t = x_bar - r.matrix() * y_bar;
  return {std::move(r), std::move(t)};
}

double pair_registration_objective(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                   const RigidTransform& transform) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "point lists must be index-aligned");
  }
  const Eigen::MatrixXd moved =
      (transform.rotation.matrix() * y).colwise() + transform.translation;
  return 2.0 * (x - moved).squaredNorm();
}

}  // namespace regalign
