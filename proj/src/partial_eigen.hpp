#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <random>

#include "regalign/solver.hpp"

namespace regalign::detail {

struct TopEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // n x k, orthonormal columns
};

// Top-k (algebraically largest) eigenpairs of a symmetric matrix. Small
// problems use a dense decomposition; large ones a Krylov start followed by
// shifted subspace iteration, warm-started across calls so that repeated
// projections of slowly-changing matrices converge in a few sweeps. Falls
// back to the dense path on non-convergence.
class TopEigenSolver {
 public:
  TopEigenSolver(int k, EigMethod method, double tol = 1e-10)
      : k_(k), method_(method), tol_(tol) {}

  TopEigen compute(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    const bool dense = method_ == EigMethod::dense ||
                       (method_ == EigMethod::automatic && n <= kDenseLimit) || k_ >= n;
    if (!dense) {
      TopEigen out;
      if (iterative(a, &out)) return out;
      warm_.resize(0, 0);
    }
    return dense_top(a);
  }

 private:
  static constexpr int kDenseLimit = 128;
  static constexpr int kMaxSweeps = 80;

  TopEigen dense_top(const Eigen::MatrixXd& a) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
    const int n = static_cast<int>(a.rows());
    const int k = std::min(k_, n);
    TopEigen out;
    out.values.resize(k);
    out.vectors.resize(n, k);
    for (int i = 0; i < k; ++i) {
      out.values(i) = eig.eigenvalues()(n - 1 - i);
      out.vectors.col(i) = eig.eigenvectors().col(n - 1 - i);
    }
    return out;
  }

  static Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& z) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
    return qr.householderQ() * Eigen::MatrixXd::Identity(z.rows(), z.cols());
  }

  // Rayleigh-Ritz on span(v); rotates v in place to Ritz vectors, descending.
  static Eigen::VectorXd rayleigh_ritz(const Eigen::MatrixXd& a, Eigen::MatrixXd* v) {
    const Eigen::MatrixXd small = v->transpose() * a * (*v);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (small + small.transpose()));
    const int q = static_cast<int>(v->cols());
    Eigen::MatrixXd rot(q, q);
    Eigen::VectorXd theta(q);
    for (int i = 0; i < q; ++i) {
      rot.col(i) = eig.eigenvectors().col(q - 1 - i);
      theta(i) = eig.eigenvalues()(q - 1 - i);
    }
    *v = (*v) * rot;
    return theta;
  }

  bool iterative(const Eigen::MatrixXd& a, TopEigen* out) {
    const int n = static_cast<int>(a.rows());
    const int q = std::min(n, k_ + 4);
    const double scale = a.norm();
    const double tol = tol_ * std::max(1.0, scale);

    Eigen::MatrixXd v;
    if (warm_.rows() == n && warm_.cols() == q) {
      v = warm_;
    } else {
      v = krylov_start(a, q);
    }

    // Shift keeps the algebraically largest eigenvalues dominant in the
    // power sweeps.
    const double shift = a.cwiseAbs().colwise().sum().maxCoeff();
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      const Eigen::VectorXd theta = rayleigh_ritz(a, &v);
      double worst = 0.0;
      for (int i = 0; i < k_; ++i) {
        worst = std::max(worst, (a * v.col(i) - theta(i) * v.col(i)).norm());
      }
      if (worst <= tol) {
        out->values = theta.head(k_);
        out->vectors = v.leftCols(k_);
        warm_ = v;
        return true;
      }
      v = orthonormalize(a * v + shift * v);
    }
    return false;
  }

  Eigen::MatrixXd krylov_start(const Eigen::MatrixXd& a, int q) const {
    const int n = static_cast<int>(a.rows());
    const int dim = std::min(n, std::max(4 * k_ + 16, 48));
    Eigen::MatrixXd basis(n, dim);

    std::mt19937_64 rng(0x517cc1b727220a95ull);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w(i) = gauss(rng);
    w.normalize();
    basis.col(0) = w;

    for (int j = 1; j < dim; ++j) {
      w = a * basis.col(j - 1);
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i < j; ++i) {
          w -= basis.col(i).dot(w) * basis.col(i);
        }
      }
      const double norm = w.norm();
      if (norm < 1e-14) {
        // Invariant subspace hit; pad with a fresh direction.
        for (int i = 0; i < n; ++i) w(i) = gauss(rng);
        for (int pass = 0; pass < 2; ++pass) {
          for (int i = 0; i < j; ++i) {
            w -= basis.col(i).dot(w) * basis.col(i);
          }
        }
        w.normalize();
      } else {
        w /= norm;
      }
      basis.col(j) = w;
    }

    Eigen::MatrixXd v = basis;
    rayleigh_ritz(a, &v);  // sorts the basis by Ritz value
    return v.leftCols(q);
  }

  int k_;
  EigMethod method_;
  double tol_;
  Eigen::MatrixXd warm_;
};

}  // namespace regalign::detail
