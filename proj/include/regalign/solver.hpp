#pragma once

#include <cstdint>
#include <vector>

#include "regalign/cost.hpp"
#include "regalign/types.hpp"

namespace regalign {

enum class InitMode { spectral, all_identity, user };
enum class EigMethod { automatic, dense, iterative };

struct SolverConfig {
  double rho = 10.0;
  int max_iterations = 1000;
  double eps_abs = 1e-8;  // residual tolerance, scaled by dm
  InitMode init_mode = InitMode::spectral;
  EigMethod eig_method = EigMethod::automatic;
  double eig_tol = 1e-10;  // iterative eigensolver residual tolerance
  std::uint64_t seed = 0;
  Eigen::MatrixXd initial_h;  // used when init_mode == user
};

struct IterationRecord {
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

/// ADMM state over S^{dm}.
struct GramIterate {
  Eigen::MatrixXd G;
  Eigen::MatrixXd H;
  Eigen::MatrixXd Lambda;
  double rho = 0.0;
  int iteration = 0;
  std::vector<IterationRecord> history;
};

struct Registration {
  std::vector<RigidTransform> transforms;
  double objective_value = 0.0;
  int iterations_used = 0;
  bool converged = false;
  std::vector<double> determinants;
};

struct AdmmResult {
  GramIterate state;
  Registration registration;
};

/// Projection onto {X PSD, rank(X) <= d}: top-d eigenpairs with negative
/// eigenvalues clipped to zero.
Eigen::MatrixXd project_omega(const Eigen::MatrixXd& a, int d,
                              EigMethod method = EigMethod::automatic);

/// Blockwise projection: diagonal blocks to I, super-diagonal blocks to
/// SO(d) (mirrored below), blocks with |i-j| >= 2 untouched.
Eigen::MatrixXd project_theta(const Eigen::MatrixXd& a, int d, int m);

/// Feasible starting point from the d smallest eigenvectors of C: the scaled
/// eigenvector stack is reflection-corrected, its blocks projected onto
/// SO(d), and the Gram matrix of the resulting rotations returned.
Eigen::MatrixXd spectral_init(const CostMatrix& cost,
                              EigMethod method = EigMethod::automatic);

/// dm x dm matrix of all-identity d x d blocks.
Eigen::MatrixXd identity_init(int d, int m);

/// Extracts m rotations from a (possibly higher-rank) Gram matrix: top-d
/// factorization, global-reflection fix on the first block, then per-block
/// SO(d) projection. Throws degenerate_rounding when fewer than d positive
/// eigenvalues are available.
std::vector<RotationMatrix> round_gram(const Eigen::MatrixXd& h_star, int d, int m,
                                       EigMethod method = EigMethod::automatic);

/// Runs the splitting iteration
///   G <- proj_Omega(H - rho^-1 (C + Lambda))
///   H <- proj_Theta(G + rho^-1 Lambda)
///   Lambda <- Lambda + rho (G - H)
/// until max(primal, dual) residual <= eps_abs * dm or max_iterations, then
/// rounds H into rotations and recovers translations.
AdmmResult admm_solve(const CostMatrix& cost, const SolverConfig& config);

/// Closed-form two-set fit: returns the (R, t) minimizing
/// sum_k ||x^k - (R y^k + t)||^2 over SE(d). X and Y are d x n with aligned
/// columns. All-coincident points yield the identity rotation (degenerate
/// projection).
RigidTransform umeyama_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Registration objective of a two-set instance under `transform` on the
/// second set: sum over both pair orientations, i.e.
/// 2 * sum_k ||x^k - (R y^k + t)||^2.
double pair_registration_objective(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                   const RigidTransform& transform);

}  // namespace regalign
