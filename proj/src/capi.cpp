#include "precess/precess.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "bifurcation.hpp"
#include "ergodic.hpp"
#include "errors.hpp"
#include "integrator.hpp"
#include "levelset.hpp"
#include "models.hpp"
#include "precession.hpp"
#include "selftest.hpp"
#include "sweep.hpp"
#include "trace.hpp"

using namespace precess;

struct precess_model {
    Model m;
};

struct precess_traj {
    Model m;
    Trajectory t;
};

struct precess_torus_count {
    TorusCount tc;
};

namespace {

thread_local std::string g_last_error;

int status_of(errc c) {
    switch (c) {
        case errc::invalid_argument: return PRECESS_INVALID_ARGUMENT;
        case errc::singularity: return PRECESS_SINGULARITY;
        case errc::aliasing: return PRECESS_ALIASING;
        case errc::step_underflow: return PRECESS_STEP_UNDERFLOW;
        case errc::unattainable: return PRECESS_UNATTAINABLE;
        case errc::indeterminate: return PRECESS_INDETERMINATE;
        case errc::sampling: return PRECESS_SAMPLING;
        case errc::domain: return PRECESS_DOMAIN;
        case errc::io: return PRECESS_IO;
        case errc::internal: return PRECESS_INTERNAL;
    }
    return PRECESS_INTERNAL;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return PRECESS_OK;
    } catch (const error& e) {
        g_last_error = e.what();
        return status_of(e.code);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return PRECESS_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return PRECESS_INTERNAL;
    }
}

int bad_arg(const char* msg) {
    g_last_error = msg;
    return PRECESS_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) return nullptr;
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

int give_string(const std::string& s, char** out) {
    *out = dup_string(s);
    if (!*out) {
        g_last_error = "out of memory";
        return PRECESS_INTERNAL;
    }
    return PRECESS_OK;
}

State6 to_state(const double s[6]) {
    return State6{s[0], s[1], s[2], s[3], s[4], s[5]};
}

void from_state(const State6& s, double out[6]) {
    for (int i = 0; i < 6; ++i) out[i] = s[i];
}

IntegratorConfig to_icfg(const precess_integrator_config* cfg) {
    if (!cfg) return IntegratorConfig{};
    IntegratorConfig c;
    c.rel_tol = cfg->rel_tol;
    c.abs_tol = cfg->abs_tol;
    c.max_step = cfg->max_step;
    c.sample_dt = cfg->sample_dt;
    c.renormalize_gamma = cfg->renormalize_gamma != 0;
    return c;
}

void fill_region(const RegionLabel& lab, precess_region_label* out) {
    std::snprintf(out->region, sizeof out->region, "%s", region_name(lab.region));
    out->torus_count = lab.torus_count;
    out->crosses_r0 = lab.crosses_r0 ? 1 : 0;
    out->above_hsq_k = lab.above_hsq_k ? 1 : 0;
    out->probe_ok = lab.probe_ok ? 1 : 0;
}

void fill_lambda(const LambdaEstimate& est, precess_lambda_result* out) {
    out->lambda = est.lambda;
    out->psi0 = est.psi0;
    out->horizon = est.horizon;
    out->rel_change = est.rel_change;
    out->has_rel_change = est.has_rel_change ? 1 : 0;
    out->converged = est.converged ? 1 : 0;
    out->residual_sup = est.residual_sup;
}

LambdaEstimate to_lambda(const precess_lambda_result* r) {
    LambdaEstimate est;
    est.lambda = r->lambda;
    est.psi0 = r->psi0;
    est.horizon = r->horizon;
    est.rel_change = r->rel_change;
    est.has_rel_change = r->has_rel_change != 0;
    est.converged = r->converged != 0;
    est.residual_sup = r->residual_sup;
    return est;
}

SymmetryMap to_map(int map) {
    if (map < 0 || map > 3) throw error(errc::invalid_argument, "symmetry map must be 0..3");
    return static_cast<SymmetryMap>(map);
}

} // namespace

extern "C" {

const char* precess_last_error(void) { return g_last_error.c_str(); }

void precess_free(void* p) { std::free(p); }

const char* precess_version(void) { return "0.1.0"; }

precess_model* precess_model_kovalevskaya(void) {
    return new precess_model{Model::make_kovalevskaya()};
}

precess_model* precess_model_goryachev_chaplygin(void) {
    return new precess_model{Model::make_goryachev_chaplygin()};
}

precess_model* precess_model_general(double A, double B, double C, double l1, double l2,
                                     double l3, double mu) {
    try {
        return new precess_model{Model::make_general(A, B, C, l1, l2, l3, mu)};
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return nullptr;
    }
}

void precess_model_free(precess_model* m) { delete m; }

int precess_model_kind(const precess_model* m) {
    if (!m) return -1;
    return static_cast<int>(m->m.kind);
}

int precess_field(const precess_model* m, const double s[6], double out[6]) {
    if (!m || !s || !out) return bad_arg("null argument");
    return guarded([&] { from_state(vector_field(m->m, to_state(s)), out); });
}

int precess_integrals_eval(const precess_model* m, const double s[6], precess_integrals* out) {
    if (!m || !s || !out) return bad_arg("null argument");
    return guarded([&] {
        IntegralValues v = integrals(m->m, to_state(s));
        out->h = v.h;
        out->c = v.c;
        out->k = v.k;
        out->geom = v.geom;
        out->has_k = v.has_k ? 1 : 0;
    });
}

int precess_symmetry_apply(int map, const double s[6], double out[6]) {
    if (!s || !out) return bad_arg("null argument");
    return guarded([&] { from_state(symmetry_apply(to_map(map), to_state(s)), out); });
}

int precess_symmetry_time_reversing(int map, int* out) {
    if (!out) return bad_arg("null argument");
    return guarded([&] { *out = symmetry_time_reversing(to_map(map)) ? 1 : 0; });
}

int precess_psi_rate(const precess_model* m, const double s[6], double eps, double* out) {
    if (!m || !s || !out) return bad_arg("null argument");
    return guarded([&] { *out = psi_rate(m->m, to_state(s), eps > 0 ? eps : 1e-9); });
}

void precess_integrator_config_default(precess_integrator_config* cfg) {
    if (!cfg) return;
    IntegratorConfig d;
    cfg->rel_tol = d.rel_tol;
    cfg->abs_tol = d.abs_tol;
    cfg->max_step = d.max_step;
    cfg->sample_dt = d.sample_dt;
    cfg->renormalize_gamma = d.renormalize_gamma ? 1 : 0;
}

int precess_integrate(const precess_model* m, const double s0[6], double t_end,
                      const precess_integrator_config* cfg, precess_traj** out) {
    if (!m || !s0 || !out) return bad_arg("null argument");
    *out = nullptr;
    return guarded([&] {
        auto* t = new precess_traj{m->m, Trajectory{}};
        try {
            t->t = integrate(m->m, to_state(s0), t_end, to_icfg(cfg));
        } catch (...) {
            delete t;
            throw;
        }
        *out = t;
    });
}

void precess_traj_free(precess_traj* t) { delete t; }

int64_t precess_traj_size(const precess_traj* t) { return t ? int64_t(t->t.size()) : 0; }

int precess_traj_sample(const precess_traj* t, int64_t i, double* time, double s[6]) {
    if (!t) return bad_arg("null argument");
    if (i < 0 || size_t(i) >= t->t.size()) return bad_arg("sample index out of range");
    if (time) *time = t->t.times[size_t(i)];
    if (s) from_state(t->t.states[size_t(i)], s);
    return PRECESS_OK;
}

int precess_traj_accumulate_psi(precess_traj* t) {
    if (!t) return bad_arg("null argument");
    return guarded([&] { accumulate_psi(t->m, t->t); });
}

int precess_traj_has_psi(const precess_traj* t) { return t && t->t.has_psi() ? 1 : 0; }

int precess_traj_psi_at(const precess_traj* t, int64_t i, double* out) {
    if (!t || !out) return bad_arg("null argument");
    if (!t->t.has_psi()) return bad_arg("psi not accumulated");
    if (i < 0 || size_t(i) >= t->t.psi.size()) return bad_arg("sample index out of range");
    *out = t->t.psi[size_t(i)];
    return PRECESS_OK;
}

int precess_traj_drift(const precess_traj* t, double* out_max) {
    if (!t || !out_max) return bad_arg("null argument");
    return guarded([&] {
        double worst = 0;
        for (double d : t->t.integral_drift) worst = d > worst ? d : worst;
        *out_max = worst;
    });
}

int precess_traj_csv(const precess_traj* t, char** out) {
    if (!t || !out) return bad_arg("null argument");
    *out = nullptr;
    std::string csv;
    int rc = guarded([&] { csv = trajectory_csv(t->t); });
    if (rc != PRECESS_OK) return rc;
    return give_string(csv, out);
}

void precess_lambda_opts_default(precess_lambda_opts* opts) {
    if (!opts) return;
    LambdaOpts d;
    opts->t0 = d.t0;
    opts->threshold = d.threshold;
    opts->abs_floor = d.abs_floor;
    opts->max_doublings = d.max_doublings;
}

int precess_estimate_lambda(const precess_traj* t, precess_lambda_result* out) {
    if (!t || !out) return bad_arg("null argument");
    return guarded([&] { fill_lambda(estimate_lambda(t->t), out); });
}

int precess_lambda_converged(const precess_model* m, const double s0[6],
                             const precess_lambda_opts* opts,
                             const precess_integrator_config* cfg, precess_lambda_result* out) {
    if (!m || !s0 || !out) return bad_arg("null argument");
    return guarded([&] {
        LambdaOpts lo;
        if (opts) {
            lo.t0 = opts->t0;
            lo.threshold = opts->threshold;
            lo.abs_floor = opts->abs_floor;
            lo.max_doublings = opts->max_doublings;
        }
        fill_lambda(lambda_converged(m->m, to_state(s0), lo, to_icfg(cfg)), out);
    });
}

int precess_lambda_json(const precess_lambda_result* r, char** out) {
    if (!r || !out) return bad_arg("null argument");
    *out = nullptr;
    std::string s;
    int rc = guarded([&] { s = lambda_json(to_lambda(r)); });
    if (rc != PRECESS_OK) return rc;
    return give_string(s, out);
}

int precess_find_state(const precess_model* m, double h, double k, double c, uint64_t seed,
                       double out[6]) {
    if (!m || !out) return bad_arg("null argument");
    return guarded([&] { from_state(find_state(m->m, TargetIntegrals{h, k, c}, seed), out); });
}

int precess_chaplygin_state(double h, double k, double x, double y, int sx, int sxstar, int sy,
                            int systar, double out[6]) {
    if (!out) return bad_arg("null argument");
    return guarded([&] {
        ChaplyginPoint cp;
        cp.x = x;
        cp.y = y;
        cp.sx = sx >= 0 ? 1 : -1;
        cp.sxstar = sxstar >= 0 ? 1 : -1;
        cp.sy = sy >= 0 ? 1 : -1;
        cp.systar = systar >= 0 ? 1 : -1;
        from_state(chaplygin_to_state(cp, h, k), out);
    });
}

int precess_gram_volume(const precess_model* m, const double s[6], double* out) {
    if (!m || !s || !out) return bad_arg("null argument");
    return guarded([&] { *out = gram_volume(m->m, to_state(s)); });
}

int precess_count_tori(const precess_model* m, double h, double k, double c, uint64_t seed,
                       int n_seeds, double t_span, precess_torus_count** out) {
    if (!m || !out) return bad_arg("null argument");
    *out = nullptr;
    return guarded([&] {
        TorusCountOpts opts;
        if (n_seeds > 0) opts.n_seeds = n_seeds;
        if (t_span > 0) opts.t_span = t_span;
        auto* tc = new precess_torus_count{count_tori(m->m, TargetIntegrals{h, k, c}, seed, opts)};
        *out = tc;
    });
}

void precess_torus_count_free(precess_torus_count* tc) { delete tc; }

int precess_torus_count_n(const precess_torus_count* tc) { return tc ? tc->tc.count : -1; }

int precess_torus_cluster(const precess_torus_count* tc, int idx, double rep_state[6],
                          int* crosses_r0, int* n_points) {
    if (!tc) return bad_arg("null argument");
    if (idx < 0 || size_t(idx) >= tc->tc.clusters.size())
        return bad_arg("cluster index out of range");
    const TorusCluster& cl = tc->tc.clusters[size_t(idx)];
    if (rep_state) from_state(cl.representative, rep_state);
    if (crosses_r0) *crosses_r0 = cl.crosses_r0 ? 1 : 0;
    if (n_points) *n_points = cl.n_points;
    return PRECESS_OK;
}

int precess_torus_points_csv(const precess_torus_count* tc, char** out) {
    if (!tc || !out) return bad_arg("null argument");
    *out = nullptr;
    return give_string(section_points_csv(tc->tc), out);
}

int precess_torus_points_svg(const precess_torus_count* tc, char** out) {
    if (!tc || !out) return bad_arg("null argument");
    *out = nullptr;
    return give_string(project_rg3_svg(tc->tc), out);
}

int precess_gc_branch(double t, int sign, double* k, double* h) {
    if (!k || !h) return bad_arg("null argument");
    return guarded([&] { gc_branch(t, sign, *k, *h); });
}

int precess_gc_classify(double h, double k, precess_region_label* out) {
    if (!out) return bad_arg("null argument");
    return guarded([&] { fill_region(gc_classify(h, k), out); });
}

int precess_kov_critical_c(double out[4]) {
    if (!out) return bad_arg("null argument");
    auto cc = kov_critical_c();
    for (int i = 0; i < 4; ++i) out[i] = cc[i];
    return PRECESS_OK;
}

int precess_kov_singular_h(double c, double k, double* out) {
    if (!out) return bad_arg("null argument");
    return guarded([&] { *out = kov_singular_h(c, k); });
}

int precess_kov_on_singular(double h, double k, double c, double tol, int* out) {
    if (!out) return bad_arg("null argument");
    return guarded([&] { *out = kov_on_singular(h, k, c, tol > 0 ? tol : 1e-9) ? 1 : 0; });
}

int precess_kov_classify_c0(double h, double k_sq, uint64_t seed, precess_region_label* out) {
    if (!out) return bad_arg("null argument");
    return guarded([&] { fill_region(kov_classify_c0(h, k_sq, seed), out); });
}

int precess_diagram_json(int model_kind, double c, char** out) {
    if (!out) return bad_arg("null argument");
    *out = nullptr;
    std::string s;
    int rc = guarded([&] {
        if (model_kind == 0)
            s = kov_diagram_json(c);
        else if (model_kind == 1)
            s = gc_diagram_json();
        else
            throw error(errc::invalid_argument, "diagram covers the two integrable models");
    });
    if (rc != PRECESS_OK) return rc;
    return give_string(s, out);
}

int precess_sample_levelset(const precess_model* m, double h, int n, uint64_t seed,
                            double* states, double* weights) {
    if (!m || !states || !weights) return bad_arg("null argument");
    return guarded([&] {
        auto samples = sample_levelset(m->m, h, n, seed);
        for (size_t i = 0; i < samples.size(); ++i) {
            from_state(samples[i].state, states + 6 * i);
            weights[i] = samples[i].weight;
        }
    });
}

int precess_main_motion_average(const precess_model* m, double h, int n, double horizon,
                                uint64_t seed, int n_threads, precess_ergodic_result* out) {
    if (!m || !out) return bad_arg("null argument");
    return guarded([&] {
        ErgodicResult r = main_motion_average(m->m, h, n, horizon, seed, n_threads);
        out->h = r.h;
        out->n = r.n;
        out->horizon = r.horizon;
        out->mean = r.mean;
        out->std_err = r.stderr_;
        out->has_std_err = r.has_stderr ? 1 : 0;
        out->failures = r.failures;
    });
}

int precess_ergodic_json(const precess_ergodic_result* r, char** out) {
    if (!r || !out) return bad_arg("null argument");
    *out = nullptr;
    std::string s;
    int rc = guarded([&] {
        ErgodicResult er;
        er.h = r->h;
        er.n = r->n;
        er.horizon = r->horizon;
        er.mean = r->mean;
        er.stderr_ = r->std_err;
        er.has_stderr = r->has_std_err != 0;
        er.failures = r->failures;
        s = ergodic_json(er);
    });
    if (rc != PRECESS_OK) return rc;
    return give_string(s, out);
}

int precess_sweep_run(const char* config_json, const char* out_dir, int n_threads,
                      char** rows_csv) {
    if (!config_json || !rows_csv) return bad_arg("null argument");
    *rows_csv = nullptr;
    std::string s;
    int rc = guarded([&] {
        SweepConfig cfg = sweep_config_from_json(config_json);
        if (out_dir && out_dir[0]) cfg.out = out_dir;
        s = sweep_rows_csv(run_sweep(cfg, n_threads));
    });
    if (rc != PRECESS_OK) return rc;
    return give_string(s, rows_csv);
}

int precess_section_run(const char* config_json, const char* out_dir, int n_threads,
                        char** report_json) {
    if (!config_json || !report_json) return bad_arg("null argument");
    *report_json = nullptr;
    std::string s;
    int rc = guarded([&] {
        SweepConfig cfg = sweep_config_from_json(config_json);
        if (out_dir && out_dir[0]) cfg.out = out_dir;
        s = section_report_json(emit_section(cfg, n_threads));
    });
    if (rc != PRECESS_OK) return rc;
    return give_string(s, report_json);
}

int precess_trace_sphere_csv(const precess_traj* t, char** out) {
    if (!t || !out) return bad_arg("null argument");
    *out = nullptr;
    std::string s;
    int rc = guarded([&] { s = trace_sphere_csv(t->t); });
    if (rc != PRECESS_OK) return rc;
    return give_string(s, out);
}

int precess_trace_sphere_svg(const precess_traj* t, char** out) {
    if (!t || !out) return bad_arg("null argument");
    *out = nullptr;
    std::string s;
    int rc = guarded([&] { s = trace_sphere_svg(t->t); });
    if (rc != PRECESS_OK) return rc;
    return give_string(s, out);
}

int precess_project_rg3_csv(const precess_traj* t, char** out) {
    if (!t || !out) return bad_arg("null argument");
    *out = nullptr;
    std::string s;
    int rc = guarded([&] { s = project_rg3_csv(t->t); });
    if (rc != PRECESS_OK) return rc;
    return give_string(s, out);
}

int precess_project_rg3_svg(const precess_traj* t, char** out) {
    if (!t || !out) return bad_arg("null argument");
    *out = nullptr;
    std::string s;
    int rc = guarded([&] { s = project_rg3_svg(t->t); });
    if (rc != PRECESS_OK) return rc;
    return give_string(s, out);
}

int precess_selftest(const precess_integrator_config* cfg, int as_json, char** report,
                     int* n_failed) {
    if (!report) return bad_arg("null argument");
    *report = nullptr;
    std::string s;
    int failed = 0;
    int rc = guarded([&] {
        SelftestReport rep = run_selftest(cfg ? to_icfg(cfg) : IntegratorConfig{});
        failed = rep.n_failed;
        s = as_json ? selftest_json(rep) : selftest_text(rep);
    });
    if (rc != PRECESS_OK) return rc;
    if (n_failed) *n_failed = failed;
    return give_string(s, report);
}

} // extern "C"
