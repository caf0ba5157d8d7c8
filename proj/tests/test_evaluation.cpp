#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "regalign/cost.hpp"
#include "regalign/evaluation.hpp"
#include "regalign/geometry.hpp"

using namespace regalign;

TEST_CASE("generate_scene: clean scenes are exactly consistent") {
  for (int d : {2, 3}) {
    SceneConfig config;
    config.m = 5;
    config.theta_deg = 30.0;
    config.seed = 1;
    const SyntheticScene scene = generate_scene(random_point_cloud(400, d, 2), config);
    CHECK(scene.scans.size() == 5);
    CHECK(evaluate_ls_objective(scene.scans, scene.correspondences, scene.true_transforms) <
          1e-12);
  }
}

TEST_CASE("generate_scene: half-space slicing keeps only the upper points") {
  Eigen::MatrixXd pts(3, 2);
  pts << 0, 0, 0, 0, 1, -1;  // (0,0,1) and (0,0,-1): already centered
  SceneConfig config;
  config.m = 2;
  config.theta_deg = 0.0;
  config.scan_rotation_deg = 0.0;
  config.scan_translation_scale = 0.0;
  const SyntheticScene scene = generate_scene(PointSet(0, pts), config);
  REQUIRE(scene.scans[0].size() == 1);
  CHECK((scene.scans[0].point(0) - Eigen::Vector3d(0, 0, 1)).norm() < 1e-15);
}

TEST_CASE("generate_scene: an empty slice is an error") {
  // All points stay in the slicing plane after centering.
  Eigen::MatrixXd pts(3, 3);
  pts << 0, 1, 2, 0, 1, -1, 0, 0, 0;
  SceneConfig config;
  config.m = 2;
  config.theta_deg = 0.0;
  CHECK_THROWS_AS(generate_scene(PointSet(0, pts), config), Error);
}

TEST_CASE("generate_scene: shuffle bookkeeping is exact") {
  SceneConfig config;
  config.m = 3;
  config.theta_deg = 20.0;
  config.eta = 0.5;
  config.seed = 3;
  const SyntheticScene scene = generate_scene(random_point_cloud(500, 3, 4), config);

  REQUIRE(scene.correspondences.pairs.size() == scene.true_correspondences.pairs.size());
  for (std::size_t p = 0; p < scene.correspondences.pairs.size(); ++p) {
    const auto& clean = scene.true_correspondences.pairs[p].matches;
    const auto& dirty = scene.correspondences.pairs[p].matches;
    const int expected = static_cast<int>(std::llround(0.5 * clean.size()));
    CHECK(static_cast<int>(scene.shuffled[p].size()) == expected);

    const std::set<int> selected(scene.shuffled[p].begin(), scene.shuffled[p].end());
    for (std::size_t k = 0; k < clean.size(); ++k) {
      CHECK(dirty[k].first == clean[k].first);
      if (!selected.count(static_cast<int>(k))) {
        CHECK(dirty[k].second == clean[k].second);  // kept matches untouched
      }
    }
    // The shuffled subset is a permutation of the originals with no fixed
    // points (derangement succeeded at this size).
    std::multiset<int> before, after;
    int fixed = 0;
    for (int pos : scene.shuffled[p]) {
      before.insert(clean[pos].second);
      after.insert(dirty[pos].second);
      fixed += clean[pos].second == dirty[pos].second ? 1 : 0;
    }
    CHECK(before == after);
    CHECK(fixed == 0);
  }
}

TEST_CASE("generate_scene: eta = 0.5 on 100 matches shuffles exactly 50") {
  SceneConfig config;
  config.m = 2;
  config.theta_deg = 0.0;  // identical slices: every point is shared
  config.eta = 0.5;
  config.seed = 5;
  // Mirrored z pairs: internal centering keeps z intact and the slice
  // retains exactly the 100 upper points.
  const Eigen::MatrixXd base = random_point_cloud(100, 3, 6).points();
  Eigen::MatrixXd pts(3, 200);
  pts.leftCols(100) = base;
  pts.rightCols(100) = base;
  pts.row(2).head(100) = base.row(2).cwiseAbs().array() + 0.5;
  pts.row(2).tail(100) = -pts.row(2).head(100);
  const SyntheticScene scene = generate_scene(PointSet(0, pts), config);
  REQUIRE(scene.true_correspondences.pairs.size() == 1);
  CHECK(scene.true_correspondences.pairs[0].matches.size() == 100);
  CHECK(scene.shuffled[0].size() == 50);

  const SyntheticScene again = generate_scene(PointSet(0, pts), config);
  CHECK(again.shuffled[0] == scene.shuffled[0]);
}

TEST_CASE("generate_scene: bit-identical under a fixed seed") {
  SceneConfig config;
  config.m = 4;
  config.sigma = 0.02;
  config.eta = 0.3;
  config.seed = 7;
  const PointSet model = random_point_cloud(300, 3, 8);
  const SyntheticScene a = generate_scene(model, config);
  const SyntheticScene b = generate_scene(model, config);
  for (int i = 0; i < 4; ++i) {
    CHECK((a.scans[i].points() - b.scans[i].points()).norm() == 0.0);
  }
  for (std::size_t p = 0; p < a.correspondences.pairs.size(); ++p) {
    CHECK(a.correspondences.pairs[p].matches == b.correspondences.pairs[p].matches);
  }
}

TEST_CASE("rotation_error: exact estimates give zero") {
  const auto truth = fixtures::rotations_of(fixtures::chain_instance(6, 3, 5, 9).truths);
  CHECK(rotation_error(truth, truth).mean == 0.0);
}

TEST_CASE("rotation_error: a global rotation drops out") {
  std::mt19937_64 rng(10);
  const auto truth = fixtures::rotations_of(fixtures::chain_instance(6, 3, 5, 11).truths);
  const RotationMatrix q = random_rotation(rng, 3);
  std::vector<RotationMatrix> rotated;
  for (const RotationMatrix& r : truth) {
    rotated.push_back(RotationMatrix::from_orthonormal(q.matrix() * r.matrix()));
  }
  CHECK(rotation_error(truth, rotated).mean < 1e-12);
}

TEST_CASE("rotation_error: one 0.1 rad offset among ten averages to 0.01") {
  const auto truth = fixtures::rotations_of(fixtures::chain_instance(10, 3, 5, 12).truths);
  std::vector<RotationMatrix> est = truth;
  const Eigen::Matrix3d bump =
      Eigen::AngleAxisd(0.1, Eigen::Vector3d::UnitX()).toRotationMatrix();
  est[1] = RotationMatrix::from_orthonormal(est[1].matrix() * bump);
  const RotationErrorReport report = rotation_error(truth, est);
  CHECK(report.mean == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(report.per_set[1] == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(report.per_set[0] == 0.0);
}

TEST_CASE("determinant_audit: valid transforms are all +1") {
  const auto truths = fixtures::chain_instance(5, 3, 5, 13).truths;
  for (int sign : determinant_audit(truths)) CHECK(sign == 1);
}

TEST_CASE("determinant_audit: a reflection is flagged as -1") {
  Eigen::Matrix3d reflection = Eigen::Matrix3d::Identity();
  reflection(2, 2) = -1.0;
  std::vector<RigidTransform> transforms{
      RigidTransform::identity(3),
      {RotationMatrix::from_orthonormal(reflection), Eigen::Vector3d::Zero()}};
  const std::vector<int> signs = determinant_audit(transforms);
  CHECK(signs[0] == 1);
  CHECK(signs[1] == -1);
}

TEST_CASE("determinant_audit: a drifted determinant is an error") {
  Eigen::Matrix3d drifted = Eigen::Matrix3d::Identity() * 0.9659;  // det ~ 0.9
  std::vector<RigidTransform> transforms{
      {RotationMatrix::from_orthonormal(drifted), Eigen::Vector3d::Zero()}};
  try {
    determinant_audit(transforms);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_rotation);
  }
}

TEST_CASE("noise_sweep: complete and reproducible rows") {
  SweepConfig config;
  config.m = 4;
  config.theta_deg = 30.0;
  config.sigma_list = {0.0, 0.01};
  config.eta_list = {0.0};
  config.trials = 2;
  config.seed = 14;
  config.solver.max_iterations = 300;
  const PointSet model = random_point_cloud(400, 3, 15);
  const std::vector<SweepRow> rows = noise_sweep(model, config);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].sigma == 0.0);
  CHECK(rows[1].sigma == 0.01);
  CHECK(rows[0].trial_count == 2);
  CHECK(rows[0].mean_rotation_error <= rows[1].mean_rotation_error);

  const std::vector<SweepRow> again = noise_sweep(model, config);
  CHECK(again[1].mean_rotation_error == rows[1].mean_rotation_error);
  CHECK(again[1].mean_objective == rows[1].mean_objective);
}

TEST_CASE("random_point_cloud: deterministic and in range") {
  const PointSet a = random_point_cloud(50, 2, 16);
  const PointSet b = random_point_cloud(50, 2, 16);
  CHECK((a.points() - b.points()).norm() == 0.0);
  CHECK(a.points().cwiseAbs().maxCoeff() <= 1.0);
}
