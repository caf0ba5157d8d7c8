#include "regalign/regalign.h"

#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "regalign/correspondence.hpp"
#include "regalign/cost.hpp"
#include "regalign/evaluation.hpp"
#include "regalign/geometry.hpp"
#include "regalign/io.hpp"
#include "regalign/solver.hpp"
#include "regalign/types.hpp"

struct ra_point_set {
  regalign::PointSet value;
};

struct ra_correspondences {
  regalign::CorrespondenceSet value;
};

struct ra_transforms {
  std::vector<regalign::RigidTransform> value;
};

struct ra_registration {
  regalign::AdmmResult value;
};

struct ra_scene {
  regalign::SyntheticScene value;
};

namespace {

thread_local std::string g_last_error;

ra_status to_status(regalign::ErrorCode code) {
  using regalign::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return RA_ERROR_INVALID_ARGUMENT;
    case ErrorCode::dimension_mismatch: return RA_ERROR_DIMENSION_MISMATCH;
    case ErrorCode::invalid_rotation: return RA_ERROR_INVALID_ROTATION;
    case ErrorCode::io_error: return RA_ERROR_IO;
    case ErrorCode::parse_error: return RA_ERROR_PARSE;
    case ErrorCode::empty_correspondences: return RA_ERROR_EMPTY_CORRESPONDENCES;
    case ErrorCode::disconnected_graph: return RA_ERROR_DISCONNECTED_GRAPH;
    case ErrorCode::non_overlapping_sets: return RA_ERROR_NON_OVERLAPPING_SETS;
    case ErrorCode::all_trimmed: return RA_ERROR_ALL_TRIMMED;
    case ErrorCode::degenerate_rounding: return RA_ERROR_DEGENERATE_ROUNDING;
  }
  return RA_ERROR_INTERNAL;
}

template <typename F>
ra_status wrap(F&& body) {
  try {
    body();
    return RA_OK;
  } catch (const regalign::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RA_ERROR_INTERNAL;
  }
}

void require(bool condition, const char* message) {
  if (!condition) {
    throw regalign::Error(regalign::ErrorCode::invalid_argument, message);
  }
}

regalign::IcpConfig to_icp_config(const ra_icp_options* options) {
  regalign::IcpConfig config;
  if (options != nullptr) {
    config.max_iterations = options->max_iterations;
    config.convergence_tol = options->convergence_tol;
    config.trim_factor = options->trim_factor;
    config.seed = options->seed;
  }
  return config;
}

regalign::SolverConfig to_solver_config(const ra_solve_options* options) {
  regalign::SolverConfig config;
  if (options != nullptr) {
    config.rho = options->rho;
    config.max_iterations = options->max_iterations;
    config.eps_abs = options->eps_abs;
    config.init_mode = options->init_mode == RA_INIT_IDENTITY
                           ? regalign::InitMode::all_identity
                           : regalign::InitMode::spectral;
    config.eig_method = options->eig_method == RA_EIG_DENSE ? regalign::EigMethod::dense
                        : options->eig_method == RA_EIG_ITERATIVE
                            ? regalign::EigMethod::iterative
                            : regalign::EigMethod::automatic;
    config.seed = options->seed;
  }
  return config;
}

std::vector<regalign::PointSet> collect_sets(const ra_point_set* const* sets, int m) {
  require(sets != nullptr && m >= 2, "need at least two point sets");
  std::vector<regalign::PointSet> out;
  out.reserve(m);
  for (int i = 0; i < m; ++i) {
    require(sets[i] != nullptr, "null point set");
    out.emplace_back(i, sets[i]->value.points());
  }
  return out;
}

}  // namespace

extern "C" {

const char* ra_version(void) { return "0.1.0"; }

const char* ra_status_name(ra_status status) {
  switch (status) {
    case RA_OK: return "ok";
    case RA_ERROR_INVALID_ARGUMENT: return "invalid_argument";
    case RA_ERROR_DIMENSION_MISMATCH: return "dimension_mismatch";
    case RA_ERROR_INVALID_ROTATION: return "invalid_rotation";
    case RA_ERROR_IO: return "io_error";
    case RA_ERROR_PARSE: return "parse_error";
    case RA_ERROR_EMPTY_CORRESPONDENCES: return "empty_correspondences";
    case RA_ERROR_DISCONNECTED_GRAPH: return "disconnected_graph";
    case RA_ERROR_NON_OVERLAPPING_SETS: return "non_overlapping_sets";
    case RA_ERROR_ALL_TRIMMED: return "all_trimmed";
    case RA_ERROR_DEGENERATE_ROUNDING: return "degenerate_rounding";
    case RA_ERROR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* ra_last_error(void) { return g_last_error.c_str(); }

ra_status ra_point_set_create(const double* coords, int dim, int count,
                              ra_point_set** out) {
  return wrap([&] {
    require(coords != nullptr && out != nullptr, "null argument");
    require(count > 0 && (dim == 2 || dim == 3), "bad dimension or count");
    Eigen::MatrixXd pts(dim, count);
    for (int k = 0; k < count; ++k) {
      for (int i = 0; i < dim; ++i) pts(i, k) = coords[k * dim + i];
    }
    *out = new ra_point_set{regalign::PointSet(0, std::move(pts))};
  });
}

ra_status ra_point_set_load(const char* path, ra_point_set** out) {
  return wrap([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new ra_point_set{regalign::load_point_set(path)};
  });
}

ra_status ra_point_set_save(const ra_point_set* points, const char* path) {
  return wrap([&] {
    require(points != nullptr && path != nullptr, "null argument");
    regalign::save_point_set(points->value, path);
  });
}

ra_status ra_point_set_centered(const ra_point_set* points, ra_point_set** out) {
  return wrap([&] {
    require(points != nullptr && out != nullptr, "null argument");
    Eigen::MatrixXd pts = points->value.points();
    pts.colwise() -= pts.rowwise().mean().eval();
    *out = new ra_point_set{regalign::PointSet(points->value.id(), std::move(pts))};
  });
}

int ra_point_set_dim(const ra_point_set* points) {
  return points == nullptr ? 0 : points->value.dim();
}

int ra_point_set_count(const ra_point_set* points) {
  return points == nullptr ? 0 : points->value.size();
}

ra_status ra_point_set_coords(const ra_point_set* points, double* coords) {
  return wrap([&] {
    require(points != nullptr && coords != nullptr, "null argument");
    const Eigen::MatrixXd& pts = points->value.points();
    for (int k = 0; k < pts.cols(); ++k) {
      for (int i = 0; i < pts.rows(); ++i) coords[k * pts.rows() + i] = pts(i, k);
    }
  });
}

void ra_point_set_free(ra_point_set* points) { delete points; }

ra_status ra_point_set_random(int count, int dim, unsigned long long seed,
                              ra_point_set** out) {
  return wrap([&] {
    require(out != nullptr, "null argument");
    *out = new ra_point_set{regalign::random_point_cloud(count, dim, seed)};
  });
}

void ra_icp_options_init(ra_icp_options* options) {
  if (options == nullptr) return;
  const regalign::IcpConfig defaults;
  options->max_iterations = defaults.max_iterations;
  options->convergence_tol = defaults.convergence_tol;
  options->trim_factor = defaults.trim_factor;
  options->seed = defaults.seed;
}

ra_status ra_correspondences_build(const ra_point_set* const* sets, int m,
                                   const int* pairs_ij, int pair_count,
                                   const ra_icp_options* options,
                                   ra_correspondences** out) {
  return wrap([&] {
    require(out != nullptr, "null argument");
    const std::vector<regalign::PointSet> owned = collect_sets(sets, m);
    std::vector<std::pair<int, int>> pairing;
    if (pair_count < 0) {
      pairing = regalign::all_pairs_pairing(m);
    } else if (pairs_ij == nullptr || pair_count == 0) {
      pairing = regalign::chain_pairing(m);
    } else {
      for (int k = 0; k < pair_count; ++k) {
        pairing.emplace_back(pairs_ij[2 * k], pairs_ij[2 * k + 1]);
      }
    }
    *out = new ra_correspondences{
        regalign::build_correspondences(owned, pairing, to_icp_config(options))};
  });
}

ra_status ra_correspondences_load(const char* path, ra_correspondences** out) {
  return wrap([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new ra_correspondences{regalign::load_correspondences(path)};
  });
}

ra_status ra_correspondences_save(const ra_correspondences* corr, const char* path) {
  return wrap([&] {
    require(corr != nullptr && path != nullptr, "null argument");
    regalign::save_correspondences(corr->value, path);
  });
}

int ra_correspondences_set_count(const ra_correspondences* corr) {
  return corr == nullptr ? 0 : corr->value.m;
}

int ra_correspondences_pair_count(const ra_correspondences* corr) {
  return corr == nullptr ? 0 : static_cast<int>(corr->value.pairs.size());
}

void ra_correspondences_free(ra_correspondences* corr) { delete corr; }

ra_status ra_transforms_load(const char* path, ra_transforms** out) {
  return wrap([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new ra_transforms{regalign::load_transforms(path)};
  });
}

ra_status ra_transforms_save(const ra_transforms* transforms, const char* path) {
  return wrap([&] {
    require(transforms != nullptr && path != nullptr, "null argument");
    regalign::save_transforms(transforms->value, path);
  });
}

int ra_transforms_count(const ra_transforms* transforms) {
  return transforms == nullptr ? 0 : static_cast<int>(transforms->value.size());
}

int ra_transforms_dim(const ra_transforms* transforms) {
  if (transforms == nullptr || transforms->value.empty()) return 0;
  return transforms->value.front().dim();
}

ra_status ra_transforms_get(const ra_transforms* transforms, int index,
                            double* rotation, double* translation) {
  return wrap([&] {
    require(transforms != nullptr, "null argument");
    require(index >= 0 && index < static_cast<int>(transforms->value.size()),
            "transform index out of range");
    const regalign::RigidTransform& t = transforms->value[index];
    const int d = t.dim();
    if (rotation != nullptr) {
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) rotation[i * d + j] = t.rotation.matrix()(i, j);
      }
    }
    if (translation != nullptr) {
      for (int i = 0; i < d; ++i) translation[i] = t.translation(i);
    }
  });
}

void ra_transforms_free(ra_transforms* transforms) { delete transforms; }

ra_status ra_rotation_error(const ra_transforms* true_transforms,
                            const ra_transforms* estimated, double* mean,
                            double* per_set) {
  return wrap([&] {
    require(true_transforms != nullptr && estimated != nullptr && mean != nullptr,
            "null argument");
    std::vector<regalign::RotationMatrix> truth, est;
    for (const auto& t : true_transforms->value) truth.push_back(t.rotation);
    for (const auto& t : estimated->value) est.push_back(t.rotation);
    const regalign::RotationErrorReport report = regalign::rotation_error(truth, est);
    *mean = report.mean;
    if (per_set != nullptr) {
      for (std::size_t i = 0; i < report.per_set.size(); ++i) per_set[i] = report.per_set[i];
    }
  });
}

void ra_solve_options_init(ra_solve_options* options) {
  if (options == nullptr) return;
  const regalign::SolverConfig defaults;
  options->rho = defaults.rho;
  options->max_iterations = defaults.max_iterations;
  options->eps_abs = defaults.eps_abs;
  options->init_mode = RA_INIT_SPECTRAL;
  options->eig_method = RA_EIG_AUTOMATIC;
  options->seed = defaults.seed;
}

ra_status ra_register_sets(const ra_point_set* const* sets, int m,
                           const ra_correspondences* corr,
                           const ra_solve_options* options, ra_registration** out) {
  return wrap([&] {
    require(corr != nullptr && out != nullptr, "null argument");
    const std::vector<regalign::PointSet> owned = collect_sets(sets, m);
    const regalign::CostMatrix cost = regalign::build_cost(owned, corr->value);
    *out = new ra_registration{regalign::admm_solve(cost, to_solver_config(options))};
  });
}

double ra_registration_objective(const ra_registration* reg) {
  return reg == nullptr ? 0.0 : reg->value.registration.objective_value;
}

int ra_registration_iterations(const ra_registration* reg) {
  return reg == nullptr ? 0 : reg->value.registration.iterations_used;
}

int ra_registration_converged(const ra_registration* reg) {
  return reg != nullptr && reg->value.registration.converged ? 1 : 0;
}

double ra_registration_determinant(const ra_registration* reg, int index) {
  if (reg == nullptr || index < 0 ||
      index >= static_cast<int>(reg->value.registration.determinants.size())) {
    return 0.0;
  }
  return reg->value.registration.determinants[index];
}

ra_status ra_registration_transforms(const ra_registration* reg, ra_transforms** out) {
  return wrap([&] {
    require(reg != nullptr && out != nullptr, "null argument");
    *out = new ra_transforms{reg->value.registration.transforms};
  });
}

ra_status ra_registration_save_trace(const ra_registration* reg, const char* path) {
  return wrap([&] {
    require(reg != nullptr && path != nullptr, "null argument");
    regalign::write_trace_csv(reg->value.state.history, path);
  });
}

void ra_registration_free(ra_registration* reg) { delete reg; }

ra_status ra_umeyama_fit(const ra_point_set* x, const ra_point_set* y,
                         double* rotation, double* translation, double* objective) {
  return wrap([&] {
    require(x != nullptr && y != nullptr, "null argument");
    const regalign::RigidTransform fit =
        regalign::umeyama_fit(x->value.points(), y->value.points());
    const int d = fit.dim();
    if (rotation != nullptr) {
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) rotation[i * d + j] = fit.rotation.matrix()(i, j);
      }
    }
    if (translation != nullptr) {
      for (int i = 0; i < d; ++i) translation[i] = fit.translation(i);
    }
    if (objective != nullptr) {
      *objective =
          regalign::pair_registration_objective(x->value.points(), y->value.points(), fit);
    }
  });
}

void ra_scene_options_init(ra_scene_options* options) {
  if (options == nullptr) return;
  const regalign::SceneConfig defaults;
  options->m = defaults.m;
  options->theta_deg = defaults.theta_deg;
  options->sigma = defaults.sigma;
  options->eta = defaults.eta;
  options->seed = defaults.seed;
  options->scan_rotation_deg = defaults.scan_rotation_deg;
  options->scan_translation_scale = defaults.scan_translation_scale;
  options->all_pairs = defaults.all_pairs ? 1 : 0;
}

ra_status ra_scene_generate(const ra_point_set* model, const ra_scene_options* options,
                            ra_scene** out) {
  return wrap([&] {
    require(model != nullptr && options != nullptr && out != nullptr, "null argument");
    regalign::SceneConfig config;
    config.m = options->m;
    config.theta_deg = options->theta_deg;
    config.sigma = options->sigma;
    config.eta = options->eta;
    config.seed = options->seed;
    config.scan_rotation_deg = options->scan_rotation_deg;
    config.scan_translation_scale = options->scan_translation_scale;
    config.all_pairs = options->all_pairs != 0;
    *out = new ra_scene{regalign::generate_scene(model->value, config)};
  });
}

int ra_scene_scan_count(const ra_scene* scene) {
  return scene == nullptr ? 0 : static_cast<int>(scene->value.scans.size());
}

ra_status ra_scene_scan(const ra_scene* scene, int index, ra_point_set** out) {
  return wrap([&] {
    require(scene != nullptr && out != nullptr, "null argument");
    require(index >= 0 && index < static_cast<int>(scene->value.scans.size()),
            "scan index out of range");
    *out = new ra_point_set{scene->value.scans[index]};
  });
}

ra_status ra_scene_correspondences(const ra_scene* scene, ra_correspondences** out) {
  return wrap([&] {
    require(scene != nullptr && out != nullptr, "null argument");
    *out = new ra_correspondences{scene->value.correspondences};
  });
}

ra_status ra_scene_true_transforms(const ra_scene* scene, ra_transforms** out) {
  return wrap([&] {
    require(scene != nullptr && out != nullptr, "null argument");
    *out = new ra_transforms{scene->value.true_transforms};
  });
}

ra_status ra_scene_save(const ra_scene* scene, const char* directory) {
  return wrap([&] {
    require(scene != nullptr && directory != nullptr, "null argument");
    const std::filesystem::path dir(directory);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    for (std::size_t i = 0; i < scene->value.scans.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "scan_%03zu.json", i);
      regalign::save_point_set(scene->value.scans[i], (dir / name).string());
    }
    regalign::save_transforms(scene->value.true_transforms,
                              (dir / "true_transforms.json").string());
    regalign::save_correspondences(scene->value.correspondences,
                                   (dir / "correspondences.json").string());
  });
}

void ra_scene_free(ra_scene* scene) { delete scene; }

void ra_sweep_options_init(ra_sweep_options* options) {
  if (options == nullptr) return;
  const regalign::SweepConfig defaults;
  options->m = defaults.m;
  options->theta_deg = defaults.theta_deg;
  options->sigmas = nullptr;
  options->sigma_count = 0;
  options->etas = nullptr;
  options->eta_count = 0;
  options->trials = defaults.trials;
  options->seed = defaults.seed;
  ra_solve_options_init(&options->solver);
}

ra_status ra_sweep_run(const ra_point_set* model, const ra_sweep_options* options,
                       const char* csv_path) {
  return wrap([&] {
    require(model != nullptr && options != nullptr && csv_path != nullptr, "null argument");
    require(options->sigmas != nullptr && options->sigma_count > 0 &&
                options->etas != nullptr && options->eta_count > 0,
            "sweep needs nonempty sigma and eta lists");
    regalign::SweepConfig config;
    config.m = options->m;
    config.theta_deg = options->theta_deg;
    config.sigma_list.assign(options->sigmas, options->sigmas + options->sigma_count);
    config.eta_list.assign(options->etas, options->etas + options->eta_count);
    config.trials = options->trials;
    config.seed = options->seed;
    config.solver = to_solver_config(&options->solver);
    regalign::write_sweep_csv(regalign::noise_sweep(model->value, config), csv_path);
  });
}

}  // extern "C"
