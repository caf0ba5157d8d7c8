// Command-line front end; talks to the library through the C API only.

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "regalign/regalign.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

enum LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("REGALIGN_LOG");
    if (env == nullptr) return kInfo;
    const std::string value(env);
    if (value == "quiet" || value == "0") return kQuiet;
    if (value == "debug" || value == "2") return kDebug;
    return kInfo;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= kInfo) std::cerr << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= kDebug) std::cerr << "debug: " << msg << "\n";
}

[[noreturn]] void fail(ra_status status) {
  std::cerr << "error (" << ra_status_name(status) << "): " << ra_last_error() << "\n";
  std::exit(1);
}

void check(ra_status status) {
  if (status != RA_OK) fail(status);
}

using PointSetPtr = std::unique_ptr<ra_point_set, decltype(&ra_point_set_free)>;
using CorrPtr = std::unique_ptr<ra_correspondences, decltype(&ra_correspondences_free)>;
using TransformsPtr = std::unique_ptr<ra_transforms, decltype(&ra_transforms_free)>;
using RegistrationPtr = std::unique_ptr<ra_registration, decltype(&ra_registration_free)>;
using ScenePtr = std::unique_ptr<ra_scene, decltype(&ra_scene_free)>;

PointSetPtr load_points(const std::string& path, bool center) {
  ra_point_set* raw = nullptr;
  check(ra_point_set_load(path.c_str(), &raw));
  PointSetPtr points(raw, ra_point_set_free);
  if (center) {
    ra_point_set* centered = nullptr;
    check(ra_point_set_centered(points.get(), &centered));
    points.reset(centered);
  }
  log_debug("loaded " + std::to_string(ra_point_set_count(points.get())) + " points from " +
            path);
  return points;
}

std::vector<PointSetPtr> load_inputs(const std::vector<std::string>& paths, bool center) {
  if (paths.size() < 2) {
    std::cerr << "error: need at least two input point sets\n";
    std::exit(1);
  }
  std::vector<PointSetPtr> sets;
  for (const std::string& path : paths) sets.push_back(load_points(path, center));
  return sets;
}

std::vector<const ra_point_set*> raw_handles(const std::vector<PointSetPtr>& sets) {
  std::vector<const ra_point_set*> out;
  for (const PointSetPtr& s : sets) out.push_back(s.get());
  return out;
}

std::string trim(const std::string& text) {
  const std::size_t first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const std::size_t last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

// Expands --config FILE into option tokens placed before the explicit
// flags; with take-last options the command line wins.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty() || args.empty()) return args;

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot open config file " << config_path << "\n";
    std::exit(1);
  }
  std::vector<std::string> injected;
  std::string line;
  while (std::getline(in, line)) {
    const std::string entry = trim(line);
    if (entry.empty() || entry[0] == '#') continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) {
      injected.push_back("--" + entry);  // bare flag
    } else {
      injected.push_back("--" + trim(entry.substr(0, eq)) + "=" + trim(entry.substr(eq + 1)));
    }
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) values.push_back(std::stod(item));
  }
  return values;
}

// pairing: "chain", "all", or a JSON file holding an array of [i, j] pairs.
std::vector<int> parse_pairing(const std::string& pairing, int* pair_count) {
  if (pairing.empty() || pairing == "chain") {
    *pair_count = 0;
    return {};
  }
  if (pairing == "all") {
    *pair_count = -1;
    return {};
  }
  std::ifstream in(pairing);
  if (!in) {
    std::cerr << "error: cannot open pairing file " << pairing << "\n";
    std::exit(1);
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    std::cerr << "error: bad pairing file " << pairing << ": " << e.what() << "\n";
    std::exit(1);
  }
  std::vector<int> flat;
  for (const json& pair : doc) {
    flat.push_back(pair.at(0).get<int>());
    flat.push_back(pair.at(1).get<int>());
  }
  *pair_count = static_cast<int>(flat.size() / 2);
  return flat;
}

struct SolveFlags {
  double rho = 10.0;
  int max_iterations = 1000;
  double eps_abs = 1e-8;
  std::string init = "spectral";
  std::string eig = "auto";
  unsigned long long seed = 0;
};

void add_solver_flags(CLI::App* cmd, SolveFlags* flags) {
  cmd->add_option("--rho", flags->rho, "ADMM penalty");
  cmd->add_option("--max-iter", flags->max_iterations, "iteration cap");
  cmd->add_option("--eps", flags->eps_abs, "residual tolerance (scaled by dm)");
  cmd->add_option("--init", flags->init, "H initialization: spectral|identity");
  cmd->add_option("--eig", flags->eig, "eigensolver: auto|dense|iterative");
  cmd->add_option("--seed", flags->seed, "RNG seed");
}

ra_solve_options to_options(const SolveFlags& flags, double rho) {
  ra_solve_options options;
  ra_solve_options_init(&options);
  options.rho = rho;
  options.max_iterations = flags.max_iterations;
  options.eps_abs = flags.eps_abs;
  options.init_mode = flags.init == "identity" ? RA_INIT_IDENTITY : RA_INIT_SPECTRAL;
  options.eig_method = flags.eig == "dense"       ? RA_EIG_DENSE
                       : flags.eig == "iterative" ? RA_EIG_ITERATIVE
                                                  : RA_EIG_AUTOMATIC;
  options.seed = flags.seed;
  return options;
}

CorrPtr obtain_correspondences(const std::vector<PointSetPtr>& sets,
                               const std::string& corr_path, const std::string& pairing,
                               double trim_factor, int icp_iterations,
                               unsigned long long seed) {
  ra_correspondences* raw = nullptr;
  if (!corr_path.empty()) {
    check(ra_correspondences_load(corr_path.c_str(), &raw));
    return CorrPtr(raw, ra_correspondences_free);
  }
  ra_icp_options icp;
  ra_icp_options_init(&icp);
  icp.trim_factor = trim_factor;
  icp.max_iterations = icp_iterations;
  icp.seed = seed;
  int pair_count = 0;
  const std::vector<int> pairs = parse_pairing(pairing, &pair_count);
  const std::vector<const ra_point_set*> handles = raw_handles(sets);
  check(ra_correspondences_build(handles.data(), static_cast<int>(handles.size()),
                                 pairs.empty() ? nullptr : pairs.data(), pair_count, &icp,
                                 &raw));
  return CorrPtr(raw, ra_correspondences_free);
}

void write_report(const std::string& path, const ra_registration* reg,
                  const ra_transforms* truth, const ra_transforms* estimated) {
  json report;
  report["objective"] = ra_registration_objective(reg);
  report["iterations"] = ra_registration_iterations(reg);
  report["converged"] = ra_registration_converged(reg) != 0;
  json dets = json::array();
  for (int i = 0; i < ra_transforms_count(estimated); ++i) {
    dets.push_back(ra_registration_determinant(reg, i));
  }
  report["determinants"] = std::move(dets);
  if (truth != nullptr) {
    const int m = ra_transforms_count(estimated);
    double mean = 0.0;
    std::vector<double> per_set(m, 0.0);
    check(ra_rotation_error(truth, estimated, &mean, per_set.data()));
    report["rotation_error_rad"] = mean;
    report["rotation_error_deg"] = mean * 180.0 / 3.14159265358979323846;
    report["per_set_errors_rad"] = per_set;
  }
  std::ofstream out(path);
  out << report.dump(1) << "\n";
}

int run_simulate(const std::string& model_path, int random_points, int dim,
                 const ra_scene_options& options, const std::string& out_dir) {
  ra_point_set* model_raw = nullptr;
  if (!model_path.empty()) {
    check(ra_point_set_load(model_path.c_str(), &model_raw));
  } else if (random_points > 0) {
    check(ra_point_set_random(random_points, dim, options.seed, &model_raw));
  } else {
    std::cerr << "error: simulate needs --model or --random-points\n";
    return 1;
  }
  PointSetPtr model(model_raw, ra_point_set_free);

  ra_scene* scene_raw = nullptr;
  check(ra_scene_generate(model.get(), &options, &scene_raw));
  ScenePtr scene(scene_raw, ra_scene_free);
  check(ra_scene_save(scene.get(), out_dir.c_str()));
  log_info("wrote " + std::to_string(ra_scene_scan_count(scene.get())) + " scans, " +
           "true_transforms.json and correspondences.json to " + out_dir);
  return 0;
}

int run_register(const std::vector<std::string>& inputs, const std::string& corr_path,
                 const std::string& pairing, const std::string& truth_path,
                 const SolveFlags& flags, double trim_factor, int icp_iterations,
                 bool center, const std::string& out_dir) {
  const std::vector<PointSetPtr> sets = load_inputs(inputs, center);
  const CorrPtr corr =
      obtain_correspondences(sets, corr_path, pairing, trim_factor, icp_iterations, flags.seed);

  const ra_solve_options options = to_options(flags, flags.rho);
  const std::vector<const ra_point_set*> handles = raw_handles(sets);
  ra_registration* reg_raw = nullptr;
  check(ra_register_sets(handles.data(), static_cast<int>(handles.size()), corr.get(),
                         &options, &reg_raw));
  RegistrationPtr reg(reg_raw, ra_registration_free);

  fs::create_directories(out_dir);
  ra_transforms* est_raw = nullptr;
  check(ra_registration_transforms(reg.get(), &est_raw));
  TransformsPtr estimated(est_raw, ra_transforms_free);
  check(ra_transforms_save(estimated.get(), (fs::path(out_dir) / "transforms.json").c_str()));
  check(ra_registration_save_trace(reg.get(), (fs::path(out_dir) / "trace.csv").c_str()));

  TransformsPtr truth(nullptr, ra_transforms_free);
  if (!truth_path.empty()) {
    ra_transforms* truth_raw = nullptr;
    check(ra_transforms_load(truth_path.c_str(), &truth_raw));
    truth.reset(truth_raw);
  }
  write_report((fs::path(out_dir) / "report.json").string(), reg.get(), truth.get(),
               estimated.get());

  std::cout << "objective " << ra_registration_objective(reg.get()) << ", iterations "
            << ra_registration_iterations(reg.get()) << ", converged "
            << (ra_registration_converged(reg.get()) ? "yes" : "no") << "\n";
  if (truth != nullptr) {
    double mean = 0.0;
    check(ra_rotation_error(truth.get(), estimated.get(), &mean, nullptr));
    std::cout << "rotation error " << mean << " rad\n";
  }
  return ra_registration_converged(reg.get()) ? 0 : 2;
}

int run_correspond(const std::vector<std::string>& inputs, const std::string& pairing,
                   double trim_factor, int icp_iterations, unsigned long long seed,
                   bool center, const std::string& out_dir) {
  const std::vector<PointSetPtr> sets = load_inputs(inputs, center);
  const CorrPtr corr =
      obtain_correspondences(sets, "", pairing, trim_factor, icp_iterations, seed);
  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / "correspondences.json").string();
  check(ra_correspondences_save(corr.get(), path.c_str()));
  log_info("wrote " + std::to_string(ra_correspondences_pair_count(corr.get())) +
           " pairs to " + path);
  return 0;
}

int run_umeyama(const std::string& x_path, const std::string& y_path,
                const std::string& out_dir) {
  const PointSetPtr x = load_points(x_path, false);
  const PointSetPtr y = load_points(y_path, false);
  const int d = ra_point_set_dim(x.get());
  std::vector<double> rotation(d * d, 0.0), translation(d, 0.0);
  double objective = 0.0;
  check(ra_umeyama_fit(x.get(), y.get(), rotation.data(), translation.data(), &objective));

  std::cout << "objective " << objective << "\n";
  std::cout << "rotation";
  for (double v : rotation) std::cout << " " << v;
  std::cout << "\ntranslation";
  for (double v : translation) std::cout << " " << v;
  std::cout << "\n";

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    json entry = {{"d", d},
                  {"rotation", rotation},
                  {"translation", translation},
                  {"objective", objective}};
    std::ofstream out(fs::path(out_dir) / "umeyama.json");
    out << json{{"transforms", json::array({entry})}}.dump(1) << "\n";
  }
  return 0;
}

int run_sweep(const std::string& model_path, int random_points, int dim,
              const std::string& sigmas, const std::string& etas, int m, double theta,
              int trials, const SolveFlags& flags, const std::string& out_dir) {
  ra_point_set* model_raw = nullptr;
  if (!model_path.empty()) {
    check(ra_point_set_load(model_path.c_str(), &model_raw));
  } else if (random_points > 0) {
    check(ra_point_set_random(random_points, dim, flags.seed, &model_raw));
  } else {
    std::cerr << "error: sweep needs --model or --random-points\n";
    return 1;
  }
  PointSetPtr model(model_raw, ra_point_set_free);

  const std::vector<double> sigma_list = parse_double_list(sigmas);
  const std::vector<double> eta_list = parse_double_list(etas);
  ra_sweep_options options;
  ra_sweep_options_init(&options);
  options.m = m;
  options.theta_deg = theta;
  options.sigmas = sigma_list.data();
  options.sigma_count = static_cast<int>(sigma_list.size());
  options.etas = eta_list.data();
  options.eta_count = static_cast<int>(eta_list.size());
  options.trials = trials;
  options.seed = flags.seed;
  options.solver = to_options(flags, flags.rho);

  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / "sweep.csv").string();
  check(ra_sweep_run(model.get(), &options, path.c_str()));
  log_info("wrote " + path);
  return 0;
}

int run_trace(const std::vector<std::string>& inputs, const std::string& corr_path,
              const std::string& pairing, const std::string& rhos, const SolveFlags& flags,
              bool center, const std::string& out_dir) {
  const std::vector<PointSetPtr> sets = load_inputs(inputs, center);
  const CorrPtr corr = obtain_correspondences(sets, corr_path, pairing, 3.0, 50, flags.seed);
  const std::vector<const ra_point_set*> handles = raw_handles(sets);

  fs::create_directories(out_dir);
  for (double rho : parse_double_list(rhos)) {
    const ra_solve_options options = to_options(flags, rho);
    ra_registration* reg_raw = nullptr;
    check(ra_register_sets(handles.data(), static_cast<int>(handles.size()), corr.get(),
                           &options, &reg_raw));
    RegistrationPtr reg(reg_raw, ra_registration_free);
    std::ostringstream name;
    name << "trace_rho" << rho << ".csv";
    const std::string path = (fs::path(out_dir) / name.str()).string();
    check(ra_registration_save_trace(reg.get(), path.c_str()));
    log_info("rho " + std::to_string(rho) + ": objective " +
             std::to_string(ra_registration_objective(reg.get())) + " -> " + path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint point-set registration over SE(d)"};
  app.require_subcommand(1);

  // simulate
  std::string config_file;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic turntable scene");
  simulate->option_defaults()->take_last();
  simulate->add_option("--config", config_file, "key=value defaults (flags override)");
  std::string sim_model, sim_out = "out";
  int sim_points = 0, sim_dim = 3;
  ra_scene_options scene_options;
  ra_scene_options_init(&scene_options);
  unsigned long long sim_seed = 0;
  bool sim_all_pairs = false;
  simulate->add_option("--model", sim_model, "model point cloud file");
  simulate->add_option("--random-points", sim_points, "use a random cloud of this size");
  simulate->add_option("--dim", sim_dim, "dimension of the random cloud (2 or 3)");
  simulate->add_option("--m", scene_options.m, "number of scans");
  simulate->add_option("--theta", scene_options.theta_deg, "turntable step in degrees");
  simulate->add_option("--sigma", scene_options.sigma, "coordinate noise std dev");
  simulate->add_option("--eta", scene_options.eta, "shuffled correspondence fraction");
  simulate->add_option("--seed", sim_seed, "RNG seed");
  simulate->add_option("--scan-rot", scene_options.scan_rotation_deg,
                       "per-scan rotation range in degrees (<0: Haar)");
  simulate->add_option("--scan-trans", scene_options.scan_translation_scale,
                       "per-scan translation box scale");
  simulate->add_flag("--all-pairs", sim_all_pairs, "record all overlapping pairs");
  simulate->add_option("--out", sim_out, "output directory");

  // correspond
  auto* correspond = app.add_subcommand("correspond", "estimate pairwise correspondences");
  correspond->option_defaults()->take_last();
  correspond->add_option("--config", config_file, "key=value defaults (flags override)");
  std::vector<std::string> cor_inputs;
  std::string cor_pairing = "chain", cor_out = "out";
  double cor_trim = 3.0;
  int cor_iters = 50;
  unsigned long long cor_seed = 0;
  bool cor_center = false;
  correspond->add_option("inputs", cor_inputs, "point set files")->required();
  correspond->add_option("--pairing", cor_pairing, "chain|all|FILE");
  correspond->add_option("--trim-factor", cor_trim, "std-dev trimming factor");
  correspond->add_option("--icp-iters", cor_iters, "Picky-ICP iteration cap");
  correspond->add_option("--seed", cor_seed, "RNG seed");
  correspond->add_flag("--center", cor_center, "subtract each set's centroid on load");
  correspond->add_option("--out", cor_out, "output directory");

  // register
  auto* reg = app.add_subcommand("register", "jointly register point sets");
  reg->option_defaults()->take_last();
  reg->add_option("--config", config_file, "key=value defaults (flags override)");
  std::vector<std::string> reg_inputs;
  std::string reg_corr, reg_pairing = "chain", reg_truth, reg_out = "out";
  SolveFlags reg_flags;
  double reg_trim = 3.0;
  int reg_icp_iters = 50;
  bool reg_center = false;
  reg->add_option("inputs", reg_inputs, "point set files")->required();
  reg->add_option("--correspondences", reg_corr, "precomputed correspondence file");
  reg->add_option("--pairing", reg_pairing, "chain|all|FILE (when estimating internally)");
  reg->add_option("--truth", reg_truth, "ground-truth transform file for the error report");
  reg->add_option("--trim-factor", reg_trim, "std-dev trimming factor");
  reg->add_option("--icp-iters", reg_icp_iters, "Picky-ICP iteration cap");
  reg->add_flag("--center", reg_center, "subtract each set's centroid on load");
  reg->add_option("--out", reg_out, "output directory");
  add_solver_flags(reg, &reg_flags);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "noise/outlier robustness grid");
  sweep->option_defaults()->take_last();
  sweep->add_option("--config", config_file, "key=value defaults (flags override)");
  std::string swp_model, swp_sigmas = "0", swp_etas = "0", swp_out = "out";
  int swp_points = 0, swp_dim = 3, swp_m = 10, swp_trials = 5;
  double swp_theta = 30.0;
  SolveFlags swp_flags;
  sweep->add_option("--model", swp_model, "model point cloud file");
  sweep->add_option("--random-points", swp_points, "use a random cloud of this size");
  sweep->add_option("--dim", swp_dim, "dimension of the random cloud");
  sweep->add_option("--m", swp_m, "number of scans");
  sweep->add_option("--theta", swp_theta, "turntable step in degrees");
  sweep->add_option("--sigmas", swp_sigmas, "comma-separated sigma list");
  sweep->add_option("--etas", swp_etas, "comma-separated eta list");
  sweep->add_option("--trials", swp_trials, "trials per grid point");
  sweep->add_option("--out", swp_out, "output directory");
  add_solver_flags(sweep, &swp_flags);

  // umeyama
  auto* umeyama = app.add_subcommand("umeyama", "closed-form two-set alignment");
  umeyama->option_defaults()->take_last();
  umeyama->add_option("--config", config_file, "key=value defaults (flags override)");
  std::string ume_x, ume_y, ume_out;
  umeyama->add_option("x", ume_x, "first point set")->required();
  umeyama->add_option("y", ume_y, "second point set")->required();
  umeyama->add_option("--out", ume_out, "optional output directory");

  // trace
  auto* trace = app.add_subcommand("trace", "convergence traces for a list of rho values");
  trace->option_defaults()->take_last();
  trace->add_option("--config", config_file, "key=value defaults (flags override)");
  std::vector<std::string> trc_inputs;
  std::string trc_corr, trc_pairing = "chain", trc_rhos = "1,10,100", trc_out = "out";
  SolveFlags trc_flags;
  bool trc_center = false;
  trace->add_option("inputs", trc_inputs, "point set files")->required();
  trace->add_option("--correspondences", trc_corr, "precomputed correspondence file");
  trace->add_option("--pairing", trc_pairing, "chain|all|FILE");
  trace->add_option("--rho-list", trc_rhos, "comma-separated rho values");
  trace->add_flag("--center", trc_center, "subtract each set's centroid on load");
  trace->add_option("--out", trc_out, "output directory");
  add_solver_flags(trace, &trc_flags);

  try {
    std::vector<std::string> args = expand_config_args(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }

  try {
    if (simulate->parsed()) {
      scene_options.seed = sim_seed;
      scene_options.all_pairs = sim_all_pairs ? 1 : 0;
      return run_simulate(sim_model, sim_points, sim_dim, scene_options, sim_out);
    }
    if (correspond->parsed()) {
      return run_correspond(cor_inputs, cor_pairing, cor_trim, cor_iters, cor_seed,
                            cor_center, cor_out);
    }
    if (reg->parsed()) {
      return run_register(reg_inputs, reg_corr, reg_pairing, reg_truth, reg_flags, reg_trim,
                          reg_icp_iters, reg_center, reg_out);
    }
    if (sweep->parsed()) {
      return run_sweep(swp_model, swp_points, swp_dim, swp_sigmas, swp_etas, swp_m,
                       swp_theta, swp_trials, swp_flags, swp_out);
    }
    if (umeyama->parsed()) {
      return run_umeyama(ume_x, ume_y, ume_out);
    }
    if (trace->parsed()) {
      return run_trace(trc_inputs, trc_corr, trc_pairing, trc_rhos, trc_flags, trc_center,
                       trc_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
