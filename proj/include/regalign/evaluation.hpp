#pragma once

#include <cstdint>
#include <vector>

#include "regalign/correspondence.hpp"
#include "regalign/solver.hpp"
#include "regalign/types.hpp"

namespace regalign {

struct SceneConfig {
  int m = 6;
  double theta_deg = 30.0;   // turntable step between consecutive scans
  double sigma = 0.0;        // per-coordinate Gaussian noise std dev
  double eta = 0.0;          // fraction of shuffled correspondences per pair
  std::uint64_t seed = 0;
  // Magnitude of the random per-scan motion. A negative rotation range means
  // Haar-uniform rotations; the translation box is scaled by the model
  // diameter.
  double scan_rotation_deg = -1.0;
  double scan_translation_scale = 1.0;
  bool all_pairs = false;    // record correspondences for every overlapping pair
};

struct SyntheticScene {
  PointSet model;                             // centered source cloud
  std::vector<PointSet> scans;
  std::vector<RigidTransform> true_transforms;
  CorrespondenceSet true_correspondences;     // exact, before shuffling
  CorrespondenceSet correspondences;          // with eta-fraction shuffled
  std::vector<std::vector<int>> shuffled;     // per pair, shuffled match positions
  SceneConfig config;
};

/// Turntable protocol: centers the model, rotates it about the x-axis by
/// multiples of theta, slices the upper half-space (half-plane for d=2),
/// applies a random rigid motion per scan, and records the exact index-level
/// correspondences of consecutive slices before adding noise and
/// correspondence outliers. Throws when a slice comes out empty.
SyntheticScene generate_scene(const PointSet& model, const SceneConfig& config);

/// Uniform cloud in [-1,1]^d, deterministic under the seed.
PointSet random_point_cloud(int n, int dim, std::uint64_t seed);

struct RotationErrorReport {
  double mean = 0.0;
  std::vector<double> per_set;
};

/// Gauge-corrected mean geodesic error: both lists are re-expressed relative
/// to their first rotation before averaging the per-set distances.
RotationErrorReport rotation_error(const std::vector<RotationMatrix>& true_rotations,
                                   const std::vector<RotationMatrix>& estimated);

/// Sign of det(R_i) per transform, rounded to +/-1. Throws invalid_rotation
/// when |det| deviates from 1 by more than 1e-3.
std::vector<int> determinant_audit(const std::vector<RigidTransform>& transforms);

struct SweepConfig {
  int m = 10;
  double theta_deg = 30.0;
  std::vector<double> sigma_list;
  std::vector<double> eta_list;
  int trials = 1;
  std::uint64_t seed = 0;
  SolverConfig solver;
  SceneConfig scene;  // sigma/eta/seed overridden per grid point
};

struct SweepRow {
  double sigma = 0.0;
  double eta = 0.0;
  int trial_count = 0;
  double mean_rotation_error = 0.0;
  double std_rotation_error = 0.0;
  double mean_objective = 0.0;
  bool all_converged = true;
};

/// Full grid of (sigma, eta) runs: generate -> build cost -> solve -> error,
/// averaged over trials. Trial seeds derive from (seed, grid index, trial)
/// so serial and parallel schedules agree.
std::vector<SweepRow> noise_sweep(const PointSet& model, const SweepConfig& config);

}  // namespace regalign
