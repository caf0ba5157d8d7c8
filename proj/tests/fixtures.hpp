#pragma once

#include <random>
#include <utility>
#include <vector>

#include "regalign/correspondence.hpp"
#include "regalign/geometry.hpp"
#include "regalign/types.hpp"

namespace fixtures {

// The two mirrored triangles from the two-set alignment example.
inline regalign::PointSet triangle_x() {
  Eigen::MatrixXd pts(2, 3);
  pts << 0, 1, 0, 0, 0, 2;
  return regalign::PointSet(0, pts);
}

inline regalign::PointSet triangle_y() {
  Eigen::MatrixXd pts(2, 3);
  pts << 0, -1, 0, 0, 0, 2;
  return regalign::PointSet(1, pts);
}

inline regalign::CorrespondenceSet triangle_correspondences() {
  regalign::CorrespondenceSet corr;
  corr.m = 2;
  corr.pairs.push_back({0, 1, {{0, 0}, {1, 1}, {2, 2}}});
  return corr;
}

struct Instance {
  std::vector<regalign::PointSet> sets;
  regalign::CorrespondenceSet corr;
  std::vector<regalign::RigidTransform> truths;
};

// m sets on a chain; consecutive pairs share points_per_pair world points.
// With sigma = 0 the consistency relation holds exactly under `truths`.
inline Instance chain_instance(int m, int d, int points_per_pair, std::uint64_t seed,
                               double sigma = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);

  std::vector<regalign::RigidTransform> truths;
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd t(d);
    for (int c = 0; c < d; ++c) t(c) = coord(rng);
    truths.push_back({regalign::random_rotation(rng, d), t});
  }

  // World points per consecutive pair; each set holds the points of its
  // incident pairs in local coordinates x = R^T (world - t).
  std::vector<Eigen::MatrixXd> world(m - 1);
  for (int p = 0; p + 1 < m; ++p) {
    world[p].resize(d, points_per_pair);
    for (int k = 0; k < points_per_pair; ++k) {
      for (int c = 0; c < d; ++c) world[p](c, k) = coord(rng);
    }
  }

  Instance out;
  out.corr.m = m;
  std::vector<Eigen::MatrixXd> locals(m);
  std::vector<int> offsets(m, 0);
  for (int i = 0; i < m; ++i) {
    const int left = i > 0 ? points_per_pair : 0;
    const int right = i + 1 < m ? points_per_pair : 0;
    locals[i].resize(d, left + right);
    const Eigen::MatrixXd rt = truths[i].rotation.matrix().transpose();
    int col = 0;
    if (i > 0) {
      for (int k = 0; k < points_per_pair; ++k) {
        locals[i].col(col++) = rt * (world[i - 1].col(k) - truths[i].translation);
      }
    }
    offsets[i] = col;
    if (i + 1 < m) {
      for (int k = 0; k < points_per_pair; ++k) {
        locals[i].col(col++) = rt * (world[i].col(k) - truths[i].translation);
      }
    }
  }
  if (sigma > 0.0) {
    for (Eigen::MatrixXd& pts : locals) {
      for (int j = 0; j < pts.cols(); ++j) {
        for (int c = 0; c < d; ++c) pts(c, j) += noise(rng);
      }
    }
  }
  for (int p = 0; p + 1 < m; ++p) {
    regalign::CorrespondencePair pair;
    pair.i = p;
    pair.j = p + 1;
    for (int k = 0; k < points_per_pair; ++k) {
      pair.matches.emplace_back(offsets[p] + k, k);
    }
    out.corr.pairs.push_back(std::move(pair));
  }
  for (int i = 0; i < m; ++i) out.sets.emplace_back(i, std::move(locals[i]));
  out.truths = std::move(truths);
  return out;
}

inline Eigen::MatrixXd rotation_stack(const std::vector<regalign::RigidTransform>& transforms) {
  const int d = transforms.front().dim();
  const int m = static_cast<int>(transforms.size());
  Eigen::MatrixXd r(d, d * m);
  for (int i = 0; i < m; ++i) r.middleCols(d * i, d) = transforms[i].rotation.matrix();
  return r;
}

inline std::vector<regalign::RotationMatrix> rotations_of(
    const std::vector<regalign::RigidTransform>& transforms) {
  std::vector<regalign::RotationMatrix> out;
  for (const auto& t : transforms) out.push_back(t.rotation);
  return out;
}

}  // namespace fixtures
