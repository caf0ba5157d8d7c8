#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace regalign {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  invalid_rotation,
  io_error,
  parse_error,
  empty_correspondences,
  disconnected_graph,
  non_overlapping_sets,
  all_trimmed,
  degenerate_rounding,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// d x d rotation matrix (orthogonal, determinant +1), d in {2,3}.
class RotationMatrix {
 public:
  RotationMatrix() = default;

  /// Validates orthogonality and det(+1) to 1e-9; throws invalid_rotation.
  static RotationMatrix from_matrix(const Eigen::MatrixXd& m);

  /// Trusted constructor for matrices known to be orthonormal (e.g. built
  /// from an SVD). No validation.
  static RotationMatrix from_orthonormal(Eigen::MatrixXd m) {
    return RotationMatrix(std::move(m));
  }

  static RotationMatrix identity(int dim) {
    return RotationMatrix(Eigen::MatrixXd::Identity(dim, dim));
  }

  const Eigen::MatrixXd& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  explicit RotationMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}

  Eigen::MatrixXd m_;
};

/// Rigid motion x -> R x + t.
struct RigidTransform {
  RotationMatrix rotation;
  Eigen::VectorXd translation;

  static RigidTransform identity(int dim) {
    return {RotationMatrix::identity(dim), Eigen::VectorXd::Zero(dim)};
  }

  int dim() const { return rotation.dim(); }
};

/// Indexed point cloud; points are stored as columns of a d x n matrix.
class PointSet {
 public:
  PointSet(int id, Eigen::MatrixXd points);

  int id() const { return id_; }
  int dim() const { return static_cast<int>(points_.rows()); }
  int size() const { return static_cast<int>(points_.cols()); }
  Eigen::VectorXd point(int k) const { return points_.col(k); }
  const Eigen::MatrixXd& points() const { return points_; }

 private:
  int id_ = 0;
  Eigen::MatrixXd points_;
};

}  // namespace regalign
