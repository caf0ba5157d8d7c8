#include "regalign/cost.hpp"

#include <Eigen/Eigenvalues>

#include <map>
#include <sstream>
#include <vector>

namespace regalign {

namespace {

// Pseudo-inverse of a symmetric matrix; eigenvalues below rel_tol * max|eig|
// are treated as exact zeros (L is a Laplacian with a known kernel).
Eigen::MatrixXd symmetric_pseudo_inverse(const Eigen::MatrixXd& a, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double cutoff = rel_tol * values.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(values.size());
  for (int i = 0; i < values.size(); ++i) {
    if (std::abs(values(i)) > cutoff) inv(i) = 1.0 / values(i);
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

void check_connected(int m, const CorrespondenceSet& corr) {
  std::vector<int> parent(m);
  for (int i = 0; i < m; ++i) parent[i] = i;
  const auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const CorrespondencePair& p : corr.pairs) parent[find(p.i)] = find(p.j);
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < m; ++i) groups[find(i)].push_back(i);
  if (groups.size() > 1) {
    std::ostringstream msg;
    msg << "view graph is disconnected; components:";
    for (const auto& [root, members] : groups) {
      msg << " {";
      for (std::size_t k = 0; k < members.size(); ++k) {
        msg << (k ? "," : "") << members[k];
      }
      msg << "}";
    }
    throw Error(ErrorCode::disconnected_graph, msg.str());
  }
}

}  // namespace

CostMatrix build_cost(const std::vector<PointSet>& sets, const CorrespondenceSet& corr,
                      const CostOptions& options) {
  const int m = static_cast<int>(sets.size());
  if (m < 2 || corr.m != m) {
    throw Error(ErrorCode::invalid_argument, "correspondence set does not cover the sets");
  }
  if (corr.pairs.empty()) {
    throw Error(ErrorCode::empty_correspondences, "no correspondence pairs");
  }
  const int d = sets[0].dim();
  for (const PointSet& s : sets) {
    if (s.dim() != d) {
      throw Error(ErrorCode::dimension_mismatch, "point sets have mixed dimensions");
    }
  }
  check_connected(m, corr);

  const int dm = d * m;
  CostMatrix cost;
  cost.m = m;
  cost.d = d;
  cost.L = Eigen::MatrixXd::Zero(m, m);
  cost.B = Eigen::MatrixXd::Zero(dm, m);
  cost.D = Eigen::MatrixXd::Zero(dm, dm);

  // The pair sums run over ordered pairs; each stored pair contributes the
  // identical term for (i,j) and (j,i), hence the weight of 2.
  for (const CorrespondencePair& p : corr.pairs) {
    if (p.i < 0 || p.j >= m || p.i >= p.j) {
      throw Error(ErrorCode::invalid_argument, "bad pair indices");
    }
    if (p.matches.empty()) {
      throw Error(ErrorCode::invalid_argument, "stored pair with no matches");
    }
    const double n_ij = static_cast<double>(p.matches.size());
    const double w = options.normalize_pairs ? 2.0 / n_ij : 2.0;
    cost.L(p.i, p.i) += w * n_ij;
    cost.L(p.j, p.j) += w * n_ij;
    cost.L(p.i, p.j) -= w * n_ij;
    cost.L(p.j, p.i) -= w * n_ij;

    const int bi = d * p.i;
    const int bj = d * p.j;
    for (const auto& [ki, kj] : p.matches) {
      if (ki < 0 || ki >= sets[p.i].size() || kj < 0 || kj >= sets[p.j].size()) {
        throw Error(ErrorCode::invalid_argument, "match index out of range");
      }
      const Eigen::VectorXd x = sets[p.i].point(ki);
      const Eigen::VectorXd y = sets[p.j].point(kj);

      cost.B.block(bi, p.i, d, 1) += w * x;
      cost.B.block(bi, p.j, d, 1) -= w * x;
      cost.B.block(bj, p.i, d, 1) -= w * y;
      cost.B.block(bj, p.j, d, 1) += w * y;

      cost.D.block(bi, bi, d, d) += w * x * x.transpose();
      cost.D.block(bi, bj, d, d) -= w * x * y.transpose();
      cost.D.block(bj, bi, d, d) -= w * y * x.transpose();
      cost.D.block(bj, bj, d, d) += w * y * y.transpose();
    }
  }

  cost.L_pinv = symmetric_pseudo_inverse(cost.L, 1e-10);
  cost.C = cost.D - cost.B * cost.L_pinv * cost.B.transpose();
  cost.C = 0.5 * (cost.C + cost.C.transpose()).eval();
  return cost;
}

double objective(const CostMatrix& cost, const Eigen::MatrixXd& gram) {
  if (gram.rows() != cost.C.rows() || gram.cols() != cost.C.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "Gram matrix has the wrong size");
  }
  return (cost.C.array() * gram.array()).sum();
}

std::vector<Eigen::VectorXd> recover_translations(const CostMatrix& cost,
                                                  const Eigen::MatrixXd& rotation_stack) {
  if (rotation_stack.rows() != cost.d || rotation_stack.cols() != cost.d * cost.m) {
    throw Error(ErrorCode::dimension_mismatch, "rotation stack must be d x dm");
  }
  const Eigen::MatrixXd t = -rotation_stack * cost.B * cost.L_pinv;
  std::vector<Eigen::VectorXd> out;
  out.reserve(cost.m);
  for (int i = 0; i < cost.m; ++i) out.push_back(t.col(i));
  return out;
}

double evaluate_ls_objective(const std::vector<PointSet>& sets,
                             const CorrespondenceSet& corr,
                             const std::vector<RigidTransform>& transforms) {
  if (static_cast<int>(transforms.size()) != corr.m ||
      static_cast<int>(sets.size()) != corr.m) {
    throw Error(ErrorCode::invalid_argument, "need one transform per point set");
  }
  double total = 0.0;
  for (const CorrespondencePair& p : corr.pairs) {
    const RigidTransform& ti = transforms[p.i];
    const RigidTransform& tj = transforms[p.j];
    for (const auto& [ki, kj] : p.matches) {
      const Eigen::VectorXd lhs =
          ti.rotation.matrix() * sets[p.i].point(ki) + ti.translation;
      const Eigen::VectorXd rhs =
          tj.rotation.matrix() * sets[p.j].point(kj) + tj.translation;
      total += 2.0 * (lhs - rhs).squaredNorm();
    }
  }
  return total;
}

}  // namespace regalign
