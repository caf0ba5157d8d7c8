#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace regalign::detail {

// Exact nearest-neighbor index over the columns of a d x n matrix.
// Equidistant candidates resolve to the lowest column index, matching a
// linear scan.
class KdTree {
 public:
  explicit KdTree(const Eigen::MatrixXd& points) : pts_(points) {
    const int n = static_cast<int>(points.cols());
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(n);
    root_ = build(0, n, 0);
  }

  // Returns (index, squared distance).
  std::pair<int, double> nearest(const Eigen::VectorXd& query) const {
    int best = -1;
    double best_sq = std::numeric_limits<double>::infinity();
    search(root_, query, &best, &best_sq);
    return {best, best_sq};
  }

 private:
  struct Node {
    int point = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build(int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % static_cast<int>(pts_.rows());
    const int mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](int a, int b) {
                       const double pa = pts_(axis, a), pb = pts_(axis, b);
                       return pa < pb || (pa == pb && a < b);
                     });
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({order_[mid], axis, -1, -1});
    nodes_[id].left = build(lo, mid, depth + 1);
    nodes_[id].right = build(mid + 1, hi, depth + 1);
    return id;
  }

  void search(int node, const Eigen::VectorXd& query, int* best, double* best_sq) const {
    if (node < 0) return;
    const Node& nd = nodes_[node];
    const double sq = (pts_.col(nd.point) - query).squaredNorm();
    if (sq < *best_sq || (sq == *best_sq && nd.point < *best)) {
      *best = nd.point;
      *best_sq = sq;
    }
    const double delta = query(nd.axis) - pts_(nd.axis, nd.point);
    const int near = delta < 0 ? nd.left : nd.right;
    const int far = delta < 0 ? nd.right : nd.left;
    search(near, query, best, best_sq);
    if (delta * delta <= *best_sq) {
      search(far, query, best, best_sq);
    }
  }

  const Eigen::MatrixXd& pts_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace regalign::detail
