#include "regalign/types.hpp"

#include <cmath>

namespace regalign {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::invalid_rotation: return "invalid_rotation";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::empty_correspondences: return "empty_correspondences";
    case ErrorCode::disconnected_graph: return "disconnected_graph";
    case ErrorCode::non_overlapping_sets: return "non_overlapping_sets";
    case ErrorCode::all_trimmed: return "all_trimmed";
    case ErrorCode::degenerate_rounding: return "degenerate_rounding";
  }
  return "unknown";
}

RotationMatrix RotationMatrix::from_matrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw Error(ErrorCode::invalid_rotation, "rotation matrix must be square, d >= 2");
  }
  const int d = static_cast<int>(m.rows());
  const double ortho = (m.transpose() * m - Eigen::MatrixXd::Identity(d, d))
                           .cwiseAbs()
                           .maxCoeff();
  if (!std::isfinite(ortho) || ortho > 1e-9) {
    throw Error(ErrorCode::invalid_rotation, "matrix is not orthogonal");
  }
  if (std::abs(m.determinant() - 1.0) > 1e-9) {
    throw Error(ErrorCode::invalid_rotation, "matrix has determinant != +1");
  }
  return RotationMatrix(m);
}

PointSet::PointSet(int id, Eigen::MatrixXd points) : id_(id), points_(std::move(points)) {
  if (points_.cols() == 0) {
    throw Error(ErrorCode::invalid_argument, "point set must be nonempty");
  }
  if (points_.rows() != 2 && points_.rows() != 3) {
    throw Error(ErrorCode::dimension_mismatch, "point dimension must be 2 or 3");
  }
  if (!points_.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "point coordinates must be finite");
  }
}

}  // namespace regalign
