#pragma once

#include <vector>

#include "regalign/correspondence.hpp"
#include "regalign/types.hpp"

namespace regalign {

/// Quadratic cost data for the joint registration objective. The pairwise
/// sums run over ordered pairs, so each stored correspondence pair
/// contributes its terms in both orientations. C = D - B L^+ B^T and the
/// objective over rotation stacks R is <C, R^T R>.
struct CostMatrix {
  Eigen::MatrixXd C;       // dm x dm, symmetric
  Eigen::MatrixXd D;       // dm x dm, symmetric
  Eigen::MatrixXd B;       // dm x m
  Eigen::MatrixXd L;       // m x m graph Laplacian weighted by match counts
  Eigen::MatrixXd L_pinv;  // Moore-Penrose pseudo-inverse of L
  int m = 0;
  int d = 0;
};

struct CostOptions {
  // Scale each pair's contribution by 1/n_ij, evening out unbalanced
  // overlaps. Off by default: match counts weight the Laplacian directly.
  bool normalize_pairs = false;
};

/// Assembles L, B, D and C from the sets and their correspondences.
/// Accumulation is blockwise: per pair only the (i,i), (i,j), (j,i), (j,j)
/// blocks of D are touched. Throws on an empty correspondence set, invalid
/// match indices, or a disconnected view graph.
CostMatrix build_cost(const std::vector<PointSet>& sets, const CorrespondenceSet& corr,
                      const CostOptions& options = {});

/// trace(C^T G).
double objective(const CostMatrix& cost, const Eigen::MatrixXd& gram);

/// Optimal translations T = -R B L^+ for a fixed d x dm rotation stack,
/// split into the m per-set columns.
std::vector<Eigen::VectorXd> recover_translations(const CostMatrix& cost,
                                                  const Eigen::MatrixXd& rotation_stack);

/// Direct evaluation of the least-squares registration objective
/// sum over ordered pairs of ||R_i x + t_i - R_j y - t_j||^2.
double evaluate_ls_objective(const std::vector<PointSet>& sets,
                             const CorrespondenceSet& corr,
                             const std::vector<RigidTransform>& transforms);

}  // namespace regalign
