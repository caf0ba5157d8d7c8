#include <doctest.h>

#include <cstring>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "regalign/cost.hpp"
#include "regalign/evaluation.hpp"
#include "regalign/geometry.hpp"
#include "regalign/solver.hpp"

using namespace regalign;

namespace {

CostMatrix toy_cost() {
  const std::vector<PointSet> sets{fixtures::triangle_x(), fixtures::triangle_y()};
  return build_cost(sets, fixtures::triangle_correspondences());
}

std::vector<RotationMatrix> random_rotations(int m, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<RotationMatrix> out;
  for (int i = 0; i < m; ++i) out.push_back(random_rotation(rng, d));
  return out;
}

bool in_theta(const Eigen::MatrixXd& h, int d, int m) {
  for (int i = 0; i < m; ++i) {
    if ((h.block(d * i, d * i, d, d) - Eigen::MatrixXd::Identity(d, d)).norm() > 1e-9) {
      return false;
    }
  }
  for (int i = 0; i + 1 < m; ++i) {
    const Eigen::MatrixXd block = h.block(d * i, d * (i + 1), d, d);
    if ((block.transpose() * block - Eigen::MatrixXd::Identity(d, d)).norm() > 1e-8) {
      return false;
    }
    if (std::abs(block.determinant() - 1.0) > 1e-8) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("project_omega: diagonal case keeps the top-d nonnegative entries") {
  Eigen::MatrixXd a = Eigen::Vector4d(3, 2, 1, -1).asDiagonal();
  const Eigen::MatrixXd p = project_omega(a, 2);
  Eigen::MatrixXd expected = Eigen::Vector4d(3, 2, 0, 0).asDiagonal();
  CHECK((p - expected).norm() < 1e-12);
}

TEST_CASE("project_omega: negative definite input maps to zero") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd b = oracles::random_matrix(6, 6, rng);
  const Eigen::MatrixXd a = -(b * b.transpose()) - Eigen::MatrixXd::Identity(6, 6);
  CHECK(project_omega(a, 3).norm() == 0.0);
}

TEST_CASE("project_omega: matches the dense oracle on random matrices") {
  std::mt19937_64 rng(2);
  int done = 0;
  while (done < 30) {
    const Eigen::MatrixXd a = oracles::random_symmetric(12, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
    if (eig.eigenvalues()(12 - 3) - eig.eigenvalues()(12 - 4) < 1e-3) continue;  // gap check
    ++done;
    CHECK((project_omega(a, 3) - oracles::dense_project_omega(a, 3)).norm() < 1e-9);
  }
}

TEST_CASE("project_omega: idempotent, PSD, rank bounded") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = oracles::random_symmetric(10, rng);
    const Eigen::MatrixXd p = project_omega(a, 2);
    CHECK((project_omega(p, 2) - p).norm() < 1e-9);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p);
    CHECK(eig.eigenvalues().minCoeff() > -1e-10);
    CHECK(eig.eigenvalues()(10 - 3) <= 1e-8 * std::max(1.0, p.norm()));
  }
}

TEST_CASE("project_omega: no sampled feasible point is closer") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd a = oracles::random_symmetric(8, rng);
  const double projected = (project_omega(a, 2) - a).norm();
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::MatrixXd b = oracles::random_matrix(2, 8, rng);
    const Eigen::MatrixXd feasible = b.transpose() * b;
    CHECK(projected <= (feasible - a).norm() + 1e-12);
  }
}

TEST_CASE("project_omega: iterative path agrees with the dense path") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd a = oracles::random_symmetric(150, rng);
  const Eigen::MatrixXd dense = project_omega(a, 3, EigMethod::dense);
  const Eigen::MatrixXd iterative = project_omega(a, 3, EigMethod::iterative);
  CHECK((dense - iterative).norm() < 1e-8 * std::max(1.0, dense.norm()));
}

TEST_CASE("project_theta: a feasible matrix is a fixed point") {
  const Eigen::MatrixXd gram = oracles::gram_of(random_rotations(4, 3, 6));
  CHECK((project_theta(gram, 3, 4) - gram).norm() < 1e-12);
}

TEST_CASE("project_theta: reflection block projects to the identity") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(0, 2) = 1;
  a(1, 3) = -1;
  a(2, 0) = 1;
  a(3, 1) = -1;
  const Eigen::MatrixXd p = project_theta(a, 2, 2);
  CHECK((p.block(0, 0, 2, 2) - Eigen::Matrix2d::Identity()).norm() < 1e-12);
  CHECK((p.block(0, 2, 2, 2) - Eigen::Matrix2d::Identity()).norm() < 1e-12);
  CHECK((p - p.transpose()).norm() == 0.0);
}

TEST_CASE("project_theta: far off-diagonal blocks are untouched bit-for-bit") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd a = oracles::random_symmetric(12, rng);  // d=2, m=6
  const Eigen::MatrixXd p = project_theta(a, 2, 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (std::abs(i - j) < 2) continue;
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
          const double lhs = p(2 * i + r, 2 * j + c);
          const double rhs = a(2 * i + r, 2 * j + c);
          CHECK(std::memcmp(&lhs, &rhs, sizeof(double)) == 0);
        }
      }
    }
  }
}

TEST_CASE("identity_init: every block is the identity") {
  const Eigen::MatrixXd h = identity_init(3, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK((h.block(3 * i, 3 * j, 3, 3) - Eigen::Matrix3d::Identity()).norm() == 0.0);
    }
  }
  CHECK(in_theta(h, 3, 4));
}

TEST_CASE("spectral_init: lands on the optimum for consistent data") {
  const fixtures::Instance inst = fixtures::chain_instance(6, 3, 40, 8);
  const CostMatrix cost = build_cost(inst.sets, inst.corr);
  const Eigen::MatrixXd h0 = spectral_init(cost);
  CHECK(objective(cost, h0) <= 1e-6 * cost.C.norm());
  CHECK(in_theta(h0, 3, 6));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h0);
  CHECK(eig.eigenvalues()(18 - 4) < 1e-8 * eig.eigenvalues()(17));  // rank d
}

TEST_CASE("admm_solve: zero cost with a feasible start is a fixed point") {
  CostMatrix cost;
  cost.m = 3;
  cost.d = 2;
  cost.C = Eigen::MatrixXd::Zero(6, 6);
  cost.D = cost.C;
  cost.B = Eigen::MatrixXd::Zero(6, 3);
  cost.L = Eigen::MatrixXd::Zero(3, 3);
  cost.L_pinv = cost.L;

  SolverConfig config;
  config.init_mode = InitMode::user;
  config.initial_h = oracles::gram_of(random_rotations(3, 2, 9));
  const AdmmResult result = admm_solve(cost, config);
  CHECK(result.registration.converged);
  CHECK(result.state.iteration == 1);
  CHECK(result.state.history.front().primal_residual < 1e-12);
  CHECK(result.state.history.front().dual_residual < 1e-12);
}

TEST_CASE("admm_solve: toy converges for rho in {1, 10, 100} from the identity start") {
  const CostMatrix cost = toy_cost();
  for (double rho : {1.0, 10.0, 100.0}) {
    SolverConfig config;
    config.rho = rho;
    config.init_mode = InitMode::all_identity;
    config.max_iterations = 500;
    const AdmmResult result = admm_solve(cost, config);
    CHECK(result.registration.objective_value == doctest::Approx(3.7185).epsilon(1e-3));
    CHECK(result.state.history.back().objective == doctest::Approx(3.7185).epsilon(1e-3));
    // Tail of the primal residual history.
    const auto& history = result.state.history;
    REQUIRE(history.size() >= 10);
    for (std::size_t k = history.size() - 10; k < history.size(); ++k) {
      CHECK(history[k].primal_residual < 1e-6);
    }
  }
}

TEST_CASE("admm_solve: iterate state keeps its structural invariants") {
  const fixtures::Instance inst = fixtures::chain_instance(4, 2, 15, 44, 0.05);
  const CostMatrix cost = build_cost(inst.sets, inst.corr);
  SolverConfig config;
  config.max_iterations = 40;
  const AdmmResult result = admm_solve(cost, config);

  CHECK((result.state.G - result.state.G.transpose()).norm() < 1e-9);
  CHECK((result.state.H - result.state.H.transpose()).norm() < 1e-9);
  CHECK((result.state.Lambda - result.state.Lambda.transpose()).norm() < 1e-9);
  CHECK(in_theta(result.state.H, 2, 4));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(result.state.G);
  CHECK(eig.eigenvalues().minCoeff() > -1e-10);
  CHECK(eig.eigenvalues()(8 - 3) <= 1e-8 * std::max(1.0, result.state.G.norm()));
}

TEST_CASE("admm_solve: one iteration matches the hand-applied updates") {
  const fixtures::Instance inst = fixtures::chain_instance(4, 2, 15, 10, 0.1);
  const CostMatrix cost = build_cost(inst.sets, inst.corr);  // 8x8
  const double rho = 7.0;

  SolverConfig config;
  config.rho = rho;
  config.init_mode = InitMode::all_identity;
  config.max_iterations = 1;
  const AdmmResult result = admm_solve(cost, config);

  const Eigen::MatrixXd h0 = identity_init(2, 4);
  const Eigen::MatrixXd lambda0 = Eigen::MatrixXd::Zero(8, 8);
  const Eigen::MatrixXd g1 = project_omega(h0 - (cost.C + lambda0) / rho, 2);
  const Eigen::MatrixXd h1 = project_theta(g1 + lambda0 / rho, 2, 4);
  const Eigen::MatrixXd lambda1 = lambda0 + rho * (g1 - h1);

  CHECK((result.state.G - g1).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((result.state.H - h1).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((result.state.Lambda - lambda1).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(result.state.history.size() == 1);
  CHECK(result.state.history[0].objective ==
        doctest::Approx(objective(cost, g1)).epsilon(1e-12));
}

TEST_CASE("admm_solve: noiseless chain reaches the global minimum") {
  const fixtures::Instance inst = fixtures::chain_instance(6, 3, 50, 11);
  const CostMatrix cost = build_cost(inst.sets, inst.corr);
  SolverConfig config;
  const AdmmResult result = admm_solve(cost, config);
  CHECK(result.registration.objective_value <= 1e-6 * cost.C.norm());

  const RotationErrorReport report = rotation_error(
      fixtures::rotations_of(inst.truths), fixtures::rotations_of(result.registration.transforms));
  CHECK(report.mean < 1e-3);
  for (double det : result.registration.determinants) {
    CHECK(det == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("admm_solve: deterministic across runs") {
  const fixtures::Instance inst = fixtures::chain_instance(4, 3, 20, 12, 0.05);
  const CostMatrix cost = build_cost(inst.sets, inst.corr);
  SolverConfig config;
  config.max_iterations = 120;
  const AdmmResult a = admm_solve(cost, config);
  const AdmmResult b = admm_solve(cost, config);
  CHECK((a.state.H - b.state.H).norm() == 0.0);
  CHECK(a.registration.objective_value == b.registration.objective_value);
}

TEST_CASE("admm_solve: validates its configuration") {
  const CostMatrix cost = toy_cost();
  SolverConfig config;
  config.rho = 0.0;
  CHECK_THROWS_AS(admm_solve(cost, config), Error);
}

TEST_CASE("round_gram: reproduces known rotations up to the global frame") {
  const std::vector<RotationMatrix> truth = random_rotations(5, 3, 13);
  const Eigen::MatrixXd gram = oracles::gram_of(truth);
  const std::vector<RotationMatrix> rounded = round_gram(gram, 3, 5);

  for (int i = 0; i < 5; ++i) {
    const Eigen::MatrixXd expected = truth[0].matrix().transpose() * truth[i].matrix();
    const Eigen::MatrixXd got = rounded[0].matrix().transpose() * rounded[i].matrix();
    CHECK((expected - got).norm() < 1e-8);
    CHECK(rounded[i].matrix().determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
  // The Gram matrix itself is reproduced.
  CHECK((oracles::gram_of(rounded) - gram).norm() < 1e-8);
}

TEST_CASE("round_gram: a reflected factor still yields proper rotations") {
  // Build the Gram matrix from a stack whose blocks all have determinant -1.
  const std::vector<RotationMatrix> truth = random_rotations(4, 3, 14);
  Eigen::MatrixXd reflect = Eigen::MatrixXd::Identity(3, 3);
  reflect(2, 2) = -1.0;
  Eigen::MatrixXd w(3, 12);
  for (int i = 0; i < 4; ++i) w.middleCols(3 * i, 3) = reflect * truth[i].matrix();
  const Eigen::MatrixXd gram = w.transpose() * w;

  const std::vector<RotationMatrix> rounded = round_gram(gram, 3, 4);
  for (const RotationMatrix& r : rounded) {
    CHECK(r.matrix().determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK((oracles::gram_of(rounded) - gram).norm() < 1e-8);
}

TEST_CASE("round_gram: tolerates a small rank-(d+1) perturbation") {
  const std::vector<RotationMatrix> truth = random_rotations(4, 3, 15);
  Eigen::MatrixXd gram = oracles::gram_of(truth);
  std::mt19937_64 rng(16);
  Eigen::VectorXd v = oracles::random_matrix(12, 1, rng);
  v.normalize();
  gram += 1e-3 * v * v.transpose();

  const std::vector<RotationMatrix> rounded = round_gram(gram, 3, 4);
  for (const RotationMatrix& r : rounded) {
    CHECK((r.matrix().transpose() * r.matrix() - Eigen::Matrix3d::Identity()).norm() < 1e-9);
    CHECK(r.matrix().determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK((oracles::gram_of(rounded) - gram).norm() < 1e-2);
}

TEST_CASE("round_gram: rank-deficient input is rejected") {
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(4, 1.0, 4.0);
  const Eigen::MatrixXd rank_one = v * v.transpose();
  try {
    round_gram(rank_one, 2, 2);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_rounding);
  }
}

TEST_CASE("umeyama_fit: identical sets give the identity transform") {
  const Eigen::MatrixXd x = fixtures::triangle_x().points();
  const RigidTransform fit = umeyama_fit(x, x);
  CHECK((fit.rotation.matrix() - Eigen::Matrix2d::Identity()).norm() < 1e-12);
  CHECK(fit.translation.norm() < 1e-12);
}

TEST_CASE("umeyama_fit: mirrored triangles attain 3.7185") {
  const Eigen::MatrixXd x = fixtures::triangle_x().points();
  const Eigen::MatrixXd y = fixtures::triangle_y().points();
  const RigidTransform fit = umeyama_fit(x, y);
  CHECK(pair_registration_objective(x, y, fit) == doctest::Approx(3.7185).epsilon(2e-4));
}

TEST_CASE("umeyama_fit: exact recovery of a consistent pair") {
  std::mt19937_64 rng(17);
  for (int d : {2, 3}) {
    const Eigen::MatrixXd x = oracles::random_matrix(d, 20, rng);
    const RotationMatrix r = random_rotation(rng, d);
    const Eigen::VectorXd t = oracles::random_matrix(d, 1, rng);
    const Eigen::MatrixXd y =
        r.matrix().transpose() * ((-t).replicate(1, 20) + x);  // y = R^T (x - t)

    const RigidTransform fit = umeyama_fit(x, y);
    CHECK((fit.rotation.matrix() - r.matrix()).norm() < 1e-10);
    CHECK((fit.translation - t).norm() < 1e-10);
    CHECK(pair_registration_objective(x, y, fit) < 1e-18);
  }
}

TEST_CASE("umeyama_fit: at least as good as a grid search") {
  std::mt19937_64 rng(18);
  const Eigen::MatrixXd x = oracles::random_matrix(2, 10, rng);
  const Eigen::MatrixXd y = oracles::random_matrix(2, 10, rng);
  const RigidTransform fit = umeyama_fit(x, y);
  const double fitted = pair_registration_objective(x, y, fit);
  const double gridded = 2.0 * oracles::grid_fit_cost_2d(x, y, 3.0);
  CHECK(fitted <= gridded + 1e-9);
}

TEST_CASE("umeyama_fit: coincident points fall back to the identity rotation") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 5);
  Eigen::MatrixXd y = Eigen::MatrixXd::Ones(2, 5);
  const RigidTransform fit = umeyama_fit(x, y);
  CHECK((fit.rotation.matrix() - Eigen::Matrix2d::Identity()).norm() == 0.0);
  CHECK((fit.translation - Eigen::Vector2d(-1, -1)).norm() < 1e-12);
}

TEST_CASE("admm_solve: two-set problems match the closed form") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::MatrixXd x = oracles::random_matrix(3, 40, rng);
    const RotationMatrix r = random_rotation(rng, 3);
    Eigen::MatrixXd y = r.matrix().transpose() * x;
    y += 0.05 * oracles::random_matrix(3, 40, rng);

    std::vector<PointSet> sets{PointSet(0, x), PointSet(1, y)};
    CorrespondenceSet corr;
    corr.m = 2;
    CorrespondencePair pair;
    pair.i = 0;
    pair.j = 1;
    for (int k = 0; k < 40; ++k) pair.matches.emplace_back(k, k);
    corr.pairs.push_back(pair);

    const CostMatrix cost = build_cost(sets, corr);
    const AdmmResult result = admm_solve(cost, SolverConfig{});
    const RigidTransform fit = umeyama_fit(x, y);
    const double closed_form = pair_registration_objective(x, y, fit);
    CHECK(result.registration.objective_value ==
          doctest::Approx(closed_form).epsilon(1e-3));
  }
}
