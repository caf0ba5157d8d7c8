#pragma once

#include <cstdint>
#include <random>

#include "regalign/types.hpp"

namespace regalign {

/// Applies R x + t to every point; id and ordering are preserved.
PointSet apply_transform(const RigidTransform& transform, const PointSet& points);

/// Inverse motion (R^T, -R^T t).
RigidTransform inverse(const RigidTransform& transform);

/// Composition a o b: apply b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

/// Nearest rotation to a square matrix in Frobenius norm, via SVD with the
/// determinant correction on the smallest singular value. A zero (or
/// rank-deficient with negative orientation) input has no unique minimizer;
/// the zero matrix maps to the identity. When `degenerate` is non-null it is
/// set accordingly.
RotationMatrix project_so(const Eigen::MatrixXd& a, bool* degenerate = nullptr);

/// Geodesic distance on SO(d) in radians, in [0, pi]. For d=3 this is
/// acos((trace(R1^T R2) - 1) / 2); for d=2 the absolute relative angle.
double geodesic_distance(const RotationMatrix& r1, const RotationMatrix& r2);

/// Haar-uniform random rotation, deterministic for a given seed.
RotationMatrix random_rotation(std::uint64_t seed, int dim);
RotationMatrix random_rotation(std::mt19937_64& rng, int dim);

}  // namespace regalign
