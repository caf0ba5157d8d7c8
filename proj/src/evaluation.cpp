#include "regalign/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "regalign/cost.hpp"
#include "regalign/geometry.hpp"

namespace regalign {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (a + 1) + 0xbf58476d1ce4e5b9ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Eigen::MatrixXd slice_rotation(int d, double angle) {
  if (d == 2) {
    Eigen::Matrix2d r;
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return r;
  }
  Eigen::Matrix3d r;
  r << 1, 0, 0,
      0, std::cos(angle), -std::sin(angle),
      0, std::sin(angle), std::cos(angle);
  return r;
}

RotationMatrix bounded_rotation(std::mt19937_64& rng, int d, double max_angle_rad) {
  if (d == 2) {
    std::uniform_real_distribution<double> angle(-max_angle_rad, max_angle_rad);
    return RotationMatrix::from_orthonormal(slice_rotation(2, angle(rng)));
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Vector3d axis;
  do {
    axis << gauss(rng), gauss(rng), gauss(rng);
  } while (axis.norm() < 1e-12);
  axis.normalize();
  std::uniform_real_distribution<double> angle(0.0, max_angle_rad);
  return RotationMatrix::from_orthonormal(
      Eigen::AngleAxisd(angle(rng), axis).toRotationMatrix());
}

}  // namespace

PointSet random_point_cloud(int n, int dim, std::uint64_t seed) {
  if (n < 1 || (dim != 2 && dim != 3)) {
    throw Error(ErrorCode::invalid_argument, "bad cloud size or dimension");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  Eigen::MatrixXd pts(dim, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < dim; ++i) pts(i, j) = coord(rng);
  }
  return PointSet(0, std::move(pts));
}

SyntheticScene generate_scene(const PointSet& model, const SceneConfig& config) {
  if (config.m < 2) {
    throw Error(ErrorCode::invalid_argument, "need at least two scans");
  }
  if (config.eta < 0.0 || config.eta > 1.0 || config.sigma < 0.0) {
    throw Error(ErrorCode::invalid_argument, "sigma must be >= 0 and eta in [0,1]");
  }
  const int d = model.dim();
  const int m = config.m;
  std::mt19937_64 rng(config.seed);

  Eigen::MatrixXd centered = model.points();
  centered.colwise() -= centered.rowwise().mean().eval();
  const double diameter =
      (centered.rowwise().maxCoeff() - centered.rowwise().minCoeff()).norm();

  const double theta = config.theta_deg * M_PI / 180.0;
  std::uniform_real_distribution<double> shift(-0.5 * diameter * config.scan_translation_scale,
                                               0.5 * diameter * config.scan_translation_scale);

  std::vector<Eigen::MatrixXd> scan_points;
  std::vector<std::vector<int>> kept_sources;
  std::vector<RigidTransform> truths;
  for (int i = 0; i < m; ++i) {
    const Eigen::MatrixXd rot = slice_rotation(d, i * theta);
    const Eigen::MatrixXd world = rot * centered;
    std::vector<int> keep;
    for (int k = 0; k < world.cols(); ++k) {
      if (world(d - 1, k) > 0.0) keep.push_back(k);
    }
    if (keep.empty()) {
      throw Error(ErrorCode::invalid_argument,
                  "scan " + std::to_string(i) + " has no points above the slicing plane");
    }
    const RotationMatrix q = config.scan_rotation_deg < 0.0
                                 ? random_rotation(rng, d)
                                 : bounded_rotation(rng, d,
                                                    config.scan_rotation_deg * M_PI / 180.0);
    Eigen::VectorXd s(d);
    for (int c = 0; c < d; ++c) s(c) = shift(rng);

    Eigen::MatrixXd local(d, keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
      local.col(k) = q.matrix() * world.col(keep[k]) + s;
    }
    scan_points.push_back(std::move(local));
    kept_sources.push_back(std::move(keep));

    Eigen::MatrixXd r_true = rot.transpose() * q.matrix().transpose();
    Eigen::VectorXd t_true = -r_true * s;
    truths.push_back({RotationMatrix::from_orthonormal(std::move(r_true)), std::move(t_true)});
  }

  // Exact correspondences from shared source indices.
  CorrespondenceSet clean;
  clean.m = m;
  const auto record_pair = [&](int i, int j) {
    std::map<int, int> pos_j;
    for (std::size_t k = 0; k < kept_sources[j].size(); ++k) {
      pos_j[kept_sources[j][k]] = static_cast<int>(k);
    }
    CorrespondencePair pair;
    pair.i = i;
    pair.j = j;
    for (std::size_t k = 0; k < kept_sources[i].size(); ++k) {
      const auto it = pos_j.find(kept_sources[i][k]);
      if (it != pos_j.end()) {
        pair.matches.emplace_back(static_cast<int>(k), it->second);
      }
    }
    if (!pair.matches.empty()) clean.pairs.push_back(std::move(pair));
  };
  if (config.all_pairs) {
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) record_pair(i, j);
    }
  } else {
    for (int i = 0; i + 1 < m; ++i) record_pair(i, i + 1);
  }

  // Correspondence outliers: permute the j-side of a round(eta * n_ij)
  // subset, avoiding fixed points where a derangement exists.
  CorrespondenceSet corrupted = clean;
  std::vector<std::vector<int>> shuffled(corrupted.pairs.size());
  if (config.eta > 0.0) {
    for (std::size_t p = 0; p < corrupted.pairs.size(); ++p) {
      auto& matches = corrupted.pairs[p].matches;
      const int n = static_cast<int>(matches.size());
      const int count = static_cast<int>(std::llround(config.eta * n));
      if (count < 1) continue;

      std::vector<int> positions(n);
      std::iota(positions.begin(), positions.end(), 0);
      std::shuffle(positions.begin(), positions.end(), rng);
      positions.resize(count);
      std::sort(positions.begin(), positions.end());

      std::vector<int> values;
      values.reserve(count);
      for (int pos : positions) values.push_back(matches[pos].second);

      std::vector<int> permuted = values;
      bool deranged = false;
      for (int attempt = 0; attempt < 32 && count > 1; ++attempt) {
        std::shuffle(permuted.begin(), permuted.end(), rng);
        deranged = true;
        for (int k = 0; k < count; ++k) {
          if (permuted[k] == values[k]) {
            deranged = false;
            break;
          }
        }
        if (deranged) break;
      }
      if (!deranged && count > 1) {
        std::rotate(permuted.begin(), permuted.begin() + 1, permuted.end());
      }
      for (int k = 0; k < count; ++k) matches[positions[k]].second = permuted[k];
      shuffled[p] = std::move(positions);
    }
  }

  // Coordinate noise is applied after the correspondences are recorded.
  if (config.sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, config.sigma);
    for (Eigen::MatrixXd& pts : scan_points) {
      for (int j = 0; j < pts.cols(); ++j) {
        for (int i = 0; i < d; ++i) pts(i, j) += noise(rng);
      }
    }
  }

  std::vector<PointSet> scans;
  scans.reserve(m);
  for (int i = 0; i < m; ++i) scans.emplace_back(i, std::move(scan_points[i]));

  return {PointSet(model.id(), std::move(centered)),
          std::move(scans),
          std::move(truths),
          std::move(clean),
          std::move(corrupted),
          std::move(shuffled),
          config};
}

RotationErrorReport rotation_error(const std::vector<RotationMatrix>& true_rotations,
                                   const std::vector<RotationMatrix>& estimated) {
  if (true_rotations.size() != estimated.size() || true_rotations.empty()) {
    throw Error(ErrorCode::invalid_argument, "rotation lists must have equal length");
  }
  const Eigen::MatrixXd true_gauge = true_rotations.front().matrix().transpose();
  const Eigen::MatrixXd est_gauge = estimated.front().matrix().transpose();

  RotationErrorReport report;
  report.per_set.reserve(true_rotations.size());
  for (std::size_t i = 0; i < true_rotations.size(); ++i) {
    const RotationMatrix a =
        RotationMatrix::from_orthonormal(true_gauge * true_rotations[i].matrix());
    const RotationMatrix b =
        RotationMatrix::from_orthonormal(est_gauge * estimated[i].matrix());
    report.per_set.push_back(geodesic_distance(a, b));
  }
  report.mean = std::accumulate(report.per_set.begin(), report.per_set.end(), 0.0) /
                static_cast<double>(report.per_set.size());
  return report;
}

std::vector<int> determinant_audit(const std::vector<RigidTransform>& transforms) {
  std::vector<int> signs;
  signs.reserve(transforms.size());
  for (const RigidTransform& t : transforms) {
    const double det = t.rotation.matrix().determinant();
    if (std::abs(std::abs(det) - 1.0) > 1e-3) {
      throw Error(ErrorCode::invalid_rotation,
                  "transform determinant " + std::to_string(det) + " is not +/-1");
    }
    signs.push_back(det > 0.0 ? 1 : -1);
  }
  return signs;
}

std::vector<SweepRow> noise_sweep(const PointSet& model, const SweepConfig& config) {
  if (config.trials < 1 || config.sigma_list.empty() || config.eta_list.empty()) {
    throw Error(ErrorCode::invalid_argument, "sweep needs trials >= 1 and a nonempty grid");
  }
  std::vector<SweepRow> rows;
  std::uint64_t grid_index = 0;
  for (double sigma : config.sigma_list) {
    for (double eta : config.eta_list) {
      SweepRow row;
      row.sigma = sigma;
      row.eta = eta;
      row.trial_count = config.trials;
      std::vector<double> errors;
      double objective_sum = 0.0;
      for (int trial = 0; trial < config.trials; ++trial) {
        SceneConfig scene_cfg = config.scene;
        scene_cfg.m = config.m;
        scene_cfg.theta_deg = config.theta_deg;
        scene_cfg.sigma = sigma;
        scene_cfg.eta = eta;
        scene_cfg.seed = derive_seed(config.seed, grid_index, trial);

        const SyntheticScene scene = generate_scene(model, scene_cfg);
        const CostMatrix cost = build_cost(scene.scans, scene.correspondences);
        SolverConfig solver_cfg = config.solver;
        solver_cfg.seed = derive_seed(config.seed, grid_index, trial + 1000003);
        const AdmmResult result = admm_solve(cost, solver_cfg);
        row.all_converged = row.all_converged && result.registration.converged;

        std::vector<RotationMatrix> truth, est;
        for (const RigidTransform& t : scene.true_transforms) truth.push_back(t.rotation);
        for (const RigidTransform& t : result.registration.transforms) est.push_back(t.rotation);
        errors.push_back(rotation_error(truth, est).mean);
        objective_sum += result.registration.objective_value;
      }
      double mean = 0.0;
      for (double e : errors) mean += e;
      mean /= static_cast<double>(errors.size());
      double var = 0.0;
      for (double e : errors) var += (e - mean) * (e - mean);
      row.mean_rotation_error = mean;
      row.std_rotation_error = std::sqrt(var / static_cast<double>(errors.size()));
      row.mean_objective = objective_sum / static_cast<double>(config.trials);
      rows.push_back(row);
      ++grid_index;
    }
  }
  return rows;
}

}  // namespace regalign
