#ifndef PRECESS_H
#define PRECESS_H

/* C interface to the rigid-body precession toolkit: integrable-top dynamics,
 * adaptive integration, precession-rate accumulation and mean-motion
 * estimation, level-set state manufacture, torus counting, bifurcation
 * classification, level-set Monte Carlo, and parameter sweeps.
 *
 * Conventions: every fallible function returns a precess_status; on failure a
 * thread-local message is available from precess_last_error(). Returned char*
 * buffers and opaque handles are owned by the caller and released with
 * precess_free() / the matching *_free() function. States are arrays
 * (p, q, r, g1, g2, g3). */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum precess_status {
    PRECESS_OK = 0,
    PRECESS_INVALID_ARGUMENT = 1,
    PRECESS_SINGULARITY = 2,
    PRECESS_ALIASING = 3,
    PRECESS_STEP_UNDERFLOW = 4,
    PRECESS_UNATTAINABLE = 5,
    PRECESS_INDETERMINATE = 6,
    PRECESS_SAMPLING = 7,
    PRECESS_DOMAIN = 8,
    PRECESS_IO = 9,
    PRECESS_INTERNAL = 10
} precess_status;

const char* precess_last_error(void);
void precess_free(void* p);
const char* precess_version(void);

/* ---- models ---- */

typedef struct precess_model precess_model;

/* kind: 0 Kovalevskaya (scaled), 1 Goryachev-Chaplygin (scaled), 2 general */
precess_model* precess_model_kovalevskaya(void);
precess_model* precess_model_goryachev_chaplygin(void);
precess_model* precess_model_general(double A, double B, double C, double l1, double l2,
                                     double l3, double mu);
void precess_model_free(precess_model* m);
int precess_model_kind(const precess_model* m);

typedef struct precess_integrals {
    double h;    /* energy */
    double c;    /* area */
    double k;    /* squared invariant (Kovalevskaya) or signed invariant (G-C) */
    double geom; /* |gamma|^2 */
    int has_k;
} precess_integrals;

int precess_field(const precess_model* m, const double s[6], double out[6]);
int precess_integrals_eval(const precess_model* m, const double s[6], precess_integrals* out);

/* map: 0 (-p,-q,r,g1,g2,-g3); 1 (-p,-q,-r,g1,g2,g3); 2 (p,q,-r,g1,g2,-g3);
 * 3 alias of 1. Maps 1-3 reverse time. */
int precess_symmetry_apply(int map, const double s[6], double out[6]);
int precess_symmetry_time_reversing(int map, int* out);

/* Precession rate; eps <= 0 selects the default pole guard width 1e-9. */
int precess_psi_rate(const precess_model* m, const double s[6], double eps, double* out);

/* ---- integration ---- */

typedef struct precess_integrator_config {
    double rel_tol;   /* default 1e-12 */
    double abs_tol;   /* default 1e-12 */
    double max_step;  /* default 0.1 */
    double sample_dt; /* default 0.01 */
    int renormalize_gamma;
} precess_integrator_config;

void precess_integrator_config_default(precess_integrator_config* cfg);

typedef struct precess_traj precess_traj;

int precess_integrate(const precess_model* m, const double s0[6], double t_end,
                      const precess_integrator_config* cfg, precess_traj** out);
void precess_traj_free(precess_traj* t);
int64_t precess_traj_size(const precess_traj* t);
int precess_traj_sample(const precess_traj* t, int64_t i, double* time, double s[6]);
/* Quadrature of the precession rate along the samples; fills psi. */
int precess_traj_accumulate_psi(precess_traj* t);
int precess_traj_has_psi(const precess_traj* t);
int precess_traj_psi_at(const precess_traj* t, int64_t i, double* out);
/* Largest relative drift across the model's first integrals. */
int precess_traj_drift(const precess_traj* t, double* out_max);
int precess_traj_csv(const precess_traj* t, char** out);

/* ---- mean motion ---- */

typedef struct precess_lambda_opts {
    double t0;        /* default 500 */
    double threshold; /* default 5e-4 */
    double abs_floor; /* default 1e-6 */
    int max_doublings; /* default 10 */
} precess_lambda_opts;

void precess_lambda_opts_default(precess_lambda_opts* opts);

typedef struct precess_lambda_result {
    double lambda;
    double psi0;
    double horizon;
    double rel_change;
    int has_rel_change;
    int converged;
    double residual_sup;
} precess_lambda_result;

int precess_estimate_lambda(const precess_traj* t, precess_lambda_result* out);
int precess_lambda_converged(const precess_model* m, const double s0[6],
                             const precess_lambda_opts* opts,
                             const precess_integrator_config* cfg, precess_lambda_result* out);
int precess_lambda_json(const precess_lambda_result* r, char** out);

/* ---- level sets and tori ---- */

/* Manufactures a state with the given integral values (k is the squared
 * invariant for Kovalevskaya, the signed one for G-C; c must be 0 for G-C). */
int precess_find_state(const precess_model* m, double h, double k, double c, uint64_t seed,
                       double out[6]);

/* G-C state from separating variables; sx..systar are branch signs (+-1). */
int precess_chaplygin_state(double h, double k, double x, double y, int sx, int sxstar, int sy,
                            int systar, double out[6]);

int precess_gram_volume(const precess_model* m, const double s[6], double* out);

typedef struct precess_torus_count precess_torus_count;

/* n_seeds <= 0 and t_span <= 0 select the defaults (32, 400). */
int precess_count_tori(const precess_model* m, double h, double k, double c, uint64_t seed,
                       int n_seeds, double t_span, precess_torus_count** out);
void precess_torus_count_free(precess_torus_count* tc);
int precess_torus_count_n(const precess_torus_count* tc);
int precess_torus_cluster(const precess_torus_count* tc, int idx, double rep_state[6],
                          int* crosses_r0, int* n_points);
int precess_torus_points_csv(const precess_torus_count* tc, char** out);
int precess_torus_points_svg(const precess_torus_count* tc, char** out);

/* ---- bifurcation data ---- */

int precess_gc_branch(double t, int sign, double* k, double* h);

typedef struct precess_region_label {
    char region[24]; /* "O1".."O5", "on-bifurcation", "inaccessible" */
    int torus_count; /* -1 when unknown */
    int crosses_r0;
    int above_hsq_k;
    int probe_ok;
} precess_region_label;

int precess_gc_classify(double h, double k, precess_region_label* out);
int precess_kov_critical_c(double out[4]);
int precess_kov_singular_h(double c, double k, double* out);
int precess_kov_on_singular(double h, double k, double c, double tol, int* out);
int precess_kov_classify_c0(double h, double k_sq, uint64_t seed, precess_region_label* out);

/* Branch polylines as JSON; model_kind 0 uses c, model_kind 1 ignores it. */
int precess_diagram_json(int model_kind, double c, char** out);

/* ---- level-set Monte Carlo (general top) ---- */

/* states must hold 6*n doubles, weights n doubles. */
int precess_sample_levelset(const precess_model* m, double h, int n, uint64_t seed,
                            double* states, double* weights);

typedef struct precess_ergodic_result {
    double h;
    int n;
    double horizon;
    double mean;
    double std_err;
    int has_std_err;
    int failures;
} precess_ergodic_result;

/* n_threads <= 0 defers to the PRECESS_THREADS environment variable. */
int precess_main_motion_average(const precess_model* m, double h, int n, double horizon,
                                uint64_t seed, int n_threads, precess_ergodic_result* out);
int precess_ergodic_json(const precess_ergodic_result* r, char** out);

/* ---- sweeps and sections ---- */

/* config_json: {model, c, grid{k_sq_min,k_sq_max,h_min,h_max,nx,ny} |
 * polyline{waypoints:[[k_sq,h],...],samples}, t0, threshold, seed, out}.
 * out_dir overrides the config's persistence directory when non-NULL and
 * non-empty. Returns the canonical rows CSV. */
int precess_sweep_run(const char* config_json, const char* out_dir, int n_threads,
                      char** rows_csv);

/* Polyline sweep plus the discontinuity report (JSON). */
int precess_section_run(const char* config_json, const char* out_dir, int n_threads,
                        char** report_json);

/* ---- plots ---- */

/* The sphere trace needs psi accumulated on the trajectory. */
int precess_trace_sphere_csv(const precess_traj* t, char** out);
int precess_trace_sphere_svg(const precess_traj* t, char** out);
int precess_project_rg3_csv(const precess_traj* t, char** out);
int precess_project_rg3_svg(const precess_traj* t, char** out);

/* ---- selftest ---- */

/* cfg NULL uses defaults. as_json selects the report format. n_failed may be
 * NULL. */
int precess_selftest(const precess_integrator_config* cfg, int as_json, char** report,
                     int* n_failed);

#ifdef __cplusplus
}
#endif

#endif /* PRECESS_H */
