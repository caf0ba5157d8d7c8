#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "regalign/types.hpp"

namespace regalign {

/// Index-level matches between sets i and j (i < j). `matches` pairs indices
/// into P_i and P_j and is one-to-one in both coordinates.
struct CorrespondencePair {
  int i = 0;
  int j = 0;
  std::vector<std::pair<int, int>> matches;
};

struct CorrespondenceSet {
  int m = 0;
  std::vector<CorrespondencePair> pairs;
};

struct IcpConfig {
  int max_iterations = 50;
  double convergence_tol = 1e-10;  // mean-squared-distance change
  double trim_factor = 3.0;
  std::uint64_t seed = 0;
};

struct Match {
  int source = 0;
  int target = 0;
  double distance = 0.0;
};

/// Exact Euclidean nearest neighbor in `target` for every point of `source`.
/// Equidistant targets resolve to the lowest index.
std::vector<Match> nearest_neighbors(const PointSet& source, const PointSet& target);

/// Keeps, per target point, only the closest source candidate; exact distance
/// ties are broken by the seeded RNG.
std::vector<Match> resolve_multiple_assignments(const std::vector<Match>& raw,
                                                std::uint64_t seed);

/// Retains matches with distance <= trim_factor * s, where s is the standard
/// deviation of all input distances. s = 0 retains everything. Throws
/// all_trimmed when nothing survives.
std::vector<Match> trim_outliers(const std::vector<Match>& matches, double trim_factor);

struct IcpResult {
  CorrespondencePair pair;      // indices into the original, untransformed sets
  RigidTransform transform;     // maps source-set coordinates into the target frame
  int iterations = 0;
  double final_msd = 0.0;
};

/// Picky-ICP between two sets: alternates transform / nearest-neighbor /
/// one-to-one resolution / std-dev trimming / closed-form refit. Throws
/// non_overlapping_sets when fewer than d+1 matches survive an iteration.
IcpResult picky_icp(const PointSet& source, const PointSet& target,
                    const RigidTransform& init, const IcpConfig& config);

/// Runs picky_icp for every requested pair (identity init), omitting pairs
/// that fail with non-overlap. Throws disconnected_graph when the surviving
/// view graph does not connect all m sets.
CorrespondenceSet build_correspondences(const std::vector<PointSet>& sets,
                                        const std::vector<std::pair<int, int>>& pairing,
                                        const IcpConfig& config);

std::vector<std::pair<int, int>> chain_pairing(int m);
std::vector<std::pair<int, int>> all_pairs_pairing(int m);

}  // namespace regalign
