#include "regalign/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace regalign {

PointSet apply_transform(const RigidTransform& transform, const PointSet& points) {
  if (transform.dim() != points.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "transform/point dimension mismatch");
  }
  Eigen::MatrixXd out = transform.rotation.matrix() * points.points();
  out.colwise() += transform.translation;
  return PointSet(points.id(), std::move(out));
}

RigidTransform inverse(const RigidTransform& transform) {
  Eigen::MatrixXd rt = transform.rotation.matrix().transpose();
  Eigen::VectorXd t = -rt * transform.translation;
  return {RotationMatrix::from_orthonormal(std::move(rt)), std::move(t)};
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "transform dimension mismatch");
  }
  Eigen::MatrixXd r = a.rotation.matrix() * b.rotation.matrix();
  Eigen::VectorXd t = a.rotation.matrix() * b.translation + a.translation;
  return {RotationMatrix::from_orthonormal(std::move(r)), std::move(t)};
}

RotationMatrix project_so(const Eigen::MatrixXd& a, bool* degenerate) {
  if (a.rows() != a.cols() || a.rows() < 2) {
    throw Error(ErrorCode::invalid_argument, "projection input must be square, d >= 2");
  }
  if (!a.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "projection input must be finite");
  }
  const int d = static_cast<int>(a.rows());
  if (degenerate != nullptr) *degenerate = false;

  if (a.isZero(0.0)) {
    if (degenerate != nullptr) *degenerate = true;
    return RotationMatrix::identity(d);
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd& u = svd.matrixU();
  const Eigen::MatrixXd& v = svd.matrixV();
  const Eigen::VectorXd& sigma = svd.singularValues();

  const double det_uv = (u * v.transpose()).determinant();
  Eigen::VectorXd corr = Eigen::VectorXd::Ones(d);
  if (det_uv < 0.0) {
    corr(d - 1) = -1.0;
    // With the two smallest singular values both zero the minimizer is a
    // continuum; the formula still returns a valid one.
    if (sigma(d - 2) + sigma(d - 1) <= 1e-12 * sigma(0) && degenerate != nullptr) {
      *degenerate = true;
    }
  }
  return RotationMatrix::from_orthonormal(u * corr.asDiagonal() * v.transpose());
}

double geodesic_distance(const RotationMatrix& r1, const RotationMatrix& r2) {
  if (r1.dim() != r2.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "rotation dimension mismatch");
  }
  const Eigen::MatrixXd rel = r1.matrix().transpose() * r2.matrix();
  if (r1.dim() == 2) {
    return std::abs(std::atan2(rel(1, 0), rel(0, 0)));
  }
  // Equal to acos((trace - 1) / 2) on SO(3) but well conditioned near the
  // endpoints, where the acos form loses half the significant digits.
  const double cosine = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double sine = (rel - rel.transpose()).norm() / (2.0 * std::sqrt(2.0));
  return std::atan2(sine, cosine);
}

RotationMatrix random_rotation(std::mt19937_64& rng, int dim) {
  if (dim == 2) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    const double th = angle(rng);
    Eigen::Matrix2d r;
    r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    return RotationMatrix::from_orthonormal(r);
  }
  if (dim == 3) {
    // Haar measure via a uniform unit quaternion.
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Vector4d q;
    do {
      for (int i = 0; i < 4; ++i) q(i) = gauss(rng);
    } while (q.norm() < 1e-12);
    q.normalize();
    const double w = q(0), x = q(1), y = q(2), z = q(3);
    Eigen::Matrix3d r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return RotationMatrix::from_orthonormal(r);
  }
  throw Error(ErrorCode::invalid_argument, "random_rotation supports d in {2,3}");
}

RotationMatrix random_rotation(std::uint64_t seed, int dim) {
  std::mt19937_64 rng(seed);
  return random_rotation(rng, dim);
}

}  // namespace regalign
