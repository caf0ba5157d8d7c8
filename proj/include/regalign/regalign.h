/* C interface to the registration library: opaque handles, status codes,
 * thread-local error messages. All output handles are owned by the caller
 * and released with the matching *_free function. */

#ifndef REGALIGN_H
#define REGALIGN_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ra_status {
  RA_OK = 0,
  RA_ERROR_INVALID_ARGUMENT,
  RA_ERROR_DIMENSION_MISMATCH,
  RA_ERROR_INVALID_ROTATION,
  RA_ERROR_IO,
  RA_ERROR_PARSE,
  RA_ERROR_EMPTY_CORRESPONDENCES,
  RA_ERROR_DISCONNECTED_GRAPH,
  RA_ERROR_NON_OVERLAPPING_SETS,
  RA_ERROR_ALL_TRIMMED,
  RA_ERROR_DEGENERATE_ROUNDING,
  RA_ERROR_INTERNAL
} ra_status;

typedef struct ra_point_set ra_point_set;
typedef struct ra_correspondences ra_correspondences;
typedef struct ra_transforms ra_transforms;
typedef struct ra_registration ra_registration;
typedef struct ra_scene ra_scene;

const char* ra_version(void);
const char* ra_status_name(ra_status status);
/* Message of the most recent failure on the calling thread. */
const char* ra_last_error(void);

/* ---- point sets -------------------------------------------------------- */

/* coords holds count points of the given dimension, point-major. */
ra_status ra_point_set_create(const double* coords, int dim, int count,
                              ra_point_set** out);
/* Format by extension: .ply (ASCII), .csv, .json. */
ra_status ra_point_set_load(const char* path, ra_point_set** out);
ra_status ra_point_set_save(const ra_point_set* points, const char* path);
ra_status ra_point_set_centered(const ra_point_set* points, ra_point_set** out);
int ra_point_set_dim(const ra_point_set* points);
int ra_point_set_count(const ra_point_set* points);
/* Fills dim*count doubles, point-major. */
ra_status ra_point_set_coords(const ra_point_set* points, double* coords);
void ra_point_set_free(ra_point_set* points);

/* Uniform random cloud in [-1,1]^dim. */
ra_status ra_point_set_random(int count, int dim, unsigned long long seed,
                              ra_point_set** out);

/* ---- correspondences --------------------------------------------------- */

typedef struct ra_icp_options {
  int max_iterations;
  double convergence_tol;
  double trim_factor;
  unsigned long long seed;
} ra_icp_options;

void ra_icp_options_init(ra_icp_options* options);

/* Picky-ICP over the requested pairs. pairs_ij holds pair_count (i,j)
 * entries; pass NULL with pair_count 0 for the consecutive chain, or
 * pair_count -1 for all pairs. */
ra_status ra_correspondences_build(const ra_point_set* const* sets, int m,
                                   const int* pairs_ij, int pair_count,
                                   const ra_icp_options* options,
                                   ra_correspondences** out);
ra_status ra_correspondences_load(const char* path, ra_correspondences** out);
ra_status ra_correspondences_save(const ra_correspondences* corr, const char* path);
int ra_correspondences_set_count(const ra_correspondences* corr);
int ra_correspondences_pair_count(const ra_correspondences* corr);
void ra_correspondences_free(ra_correspondences* corr);

/* ---- transforms -------------------------------------------------------- */

ra_status ra_transforms_load(const char* path, ra_transforms** out);
ra_status ra_transforms_save(const ra_transforms* transforms, const char* path);
int ra_transforms_count(const ra_transforms* transforms);
int ra_transforms_dim(const ra_transforms* transforms);
/* Row-major d*d rotation and d translation; either pointer may be NULL. */
ra_status ra_transforms_get(const ra_transforms* transforms, int index,
                            double* rotation, double* translation);
void ra_transforms_free(ra_transforms* transforms);

/* Gauge-corrected mean geodesic rotation error between two transform lists.
 * per_set may be NULL. */
ra_status ra_rotation_error(const ra_transforms* true_transforms,
                            const ra_transforms* estimated, double* mean,
                            double* per_set);

/* ---- solver ------------------------------------------------------------ */

typedef enum ra_init_mode { RA_INIT_SPECTRAL = 0, RA_INIT_IDENTITY = 1 } ra_init_mode;
typedef enum ra_eig_method {
  RA_EIG_AUTOMATIC = 0,
  RA_EIG_DENSE = 1,
  RA_EIG_ITERATIVE = 2
} ra_eig_method;

typedef struct ra_solve_options {
  double rho;
  int max_iterations;
  double eps_abs;
  int init_mode;   /* ra_init_mode */
  int eig_method;  /* ra_eig_method */
  unsigned long long seed;
} ra_solve_options;

void ra_solve_options_init(ra_solve_options* options);

ra_status ra_register_sets(const ra_point_set* const* sets, int m,
                           const ra_correspondences* corr,
                           const ra_solve_options* options, ra_registration** out);

double ra_registration_objective(const ra_registration* reg);
int ra_registration_iterations(const ra_registration* reg);
int ra_registration_converged(const ra_registration* reg);
double ra_registration_determinant(const ra_registration* reg, int index);
ra_status ra_registration_transforms(const ra_registration* reg, ra_transforms** out);
/* Convergence history as CSV: iteration, objective, primal and dual residuals. */
ra_status ra_registration_save_trace(const ra_registration* reg, const char* path);
void ra_registration_free(ra_registration* reg);

/* Closed-form two-set fit; writes the row-major d*d rotation, the
 * translation, and the pair registration objective (any output may be
 * NULL). */
ra_status ra_umeyama_fit(const ra_point_set* x, const ra_point_set* y,
                         double* rotation, double* translation, double* objective);

/* ---- synthetic scenes and sweeps --------------------------------------- */

typedef struct ra_scene_options {
  int m;
  double theta_deg;
  double sigma;
  double eta;
  unsigned long long seed;
  double scan_rotation_deg;      /* < 0: Haar-uniform scan rotations */
  double scan_translation_scale; /* box scale relative to the model diameter */
  int all_pairs;
} ra_scene_options;

void ra_scene_options_init(ra_scene_options* options);

ra_status ra_scene_generate(const ra_point_set* model, const ra_scene_options* options,
                            ra_scene** out);
int ra_scene_scan_count(const ra_scene* scene);
ra_status ra_scene_scan(const ra_scene* scene, int index, ra_point_set** out);
ra_status ra_scene_correspondences(const ra_scene* scene, ra_correspondences** out);
ra_status ra_scene_true_transforms(const ra_scene* scene, ra_transforms** out);
/* Writes scan_###.json, true_transforms.json and correspondences.json into
 * the directory, creating it if needed. */
ra_status ra_scene_save(const ra_scene* scene, const char* directory);
void ra_scene_free(ra_scene* scene);

typedef struct ra_sweep_options {
  int m;
  double theta_deg;
  const double* sigmas;
  int sigma_count;
  const double* etas;
  int eta_count;
  int trials;
  unsigned long long seed;
  ra_solve_options solver;
} ra_sweep_options;

void ra_sweep_options_init(ra_sweep_options* options);

/* Runs the (sigma, eta) grid and writes the CSV table to csv_path. */
ra_status ra_sweep_run(const ra_point_set* model, const ra_sweep_options* options,
                       const char* csv_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* REGALIGN_H */
