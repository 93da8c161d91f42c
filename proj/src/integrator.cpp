#include "integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dop853_tableau.hpp"
#include "errors.hpp"

namespace precess {

FlowSampler::FlowSampler(const Model& m, const State6& s0, const IntegratorConfig& cfg)
    : m_(m), cfg_(cfg), y_(s0), t_(0.0), next_k_(1) {
    if (!(cfg.rel_tol > 0) || !(cfg.abs_tol > 0))
        throw error(errc::invalid_argument, "tolerances must be positive");
    if (!(cfg.sample_dt > 0)) throw error(errc::invalid_argument, "sample_dt must be positive");
    if (!(cfg.max_step > 0)) throw error(errc::invalid_argument, "max_step must be positive");
    if (!on_manifold(s0, 1e-8))
        throw error(errc::invalid_argument, "initial gamma is not on the unit sphere");

    k_[0] = vector_field(m_, y_);
    // initial step from the scaled derivative magnitude
    double dn = 0.0, yn = 0.0;
    for (int i = 0; i < 6; ++i) {
        double sk = cfg_.abs_tol + cfg_.rel_tol * std::fabs(y_[i]);
        dn = std::max(dn, std::fabs(k_[0][i]) / sk);
        yn = std::max(yn, std::fabs(y_[i]) / sk);
    }
    h_ = (dn > 0) ? std::min(cfg_.max_step, 0.01 * std::max(1.0, yn) / dn) : cfg_.max_step;
    h_ = std::max(h_, 1e-8);
}

void FlowSampler::step_once(double h, bool& accepted, double& h_next, double& h_used) {
    using namespace dop853;
    const State6& y = y_;

    for (int s = 1; s < n_stages; ++s) {
        State6 ys;
        for (int i = 0; i < 6; ++i) {
            double acc = 0.0;
            for (int j = 0; j < s; ++j) acc += A[s][j] * k_[j][i];
            ys[i] = y[i] + h * acc;
        }
        k_[s] = vector_field(m_, ys);
    }

    for (int i = 0; i < 6; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n_stages; ++j) acc += B[j] * k_[j][i];
        y_new_[i] = y[i] + h * acc;
    }
    k_[n_stages] = vector_field(m_, y_new_); // FSAL stage, also feeds both estimators

    double e5n2 = 0.0, e3n2 = 0.0;
    for (int i = 0; i < 6; ++i) {
        double sk = cfg_.abs_tol + cfg_.rel_tol * std::max(std::fabs(y[i]), std::fabs(y_new_[i]));
        double s5 = 0.0, s3 = 0.0;
        for (int j = 0; j <= n_stages; ++j) {
            s5 += E5[j] * k_[j][i];
            s3 += E3[j] * k_[j][i];
        }
        e5n2 += (s5 / sk) * (s5 / sk);
        e3n2 += (s3 / sk) * (s3 / sk);
    }
    // the 5th-order estimate damped by the 3rd-order one
    double denom = e5n2 + 0.01 * e3n2;
    double err = denom > 0.0 ? std::fabs(h) * e5n2 / std::sqrt(6.0 * denom) : 0.0;

    double fac = 0.9 * std::pow(std::max(err, 1e-30), -1.0 / 8.0);
    accepted = err <= 1.0;
    h_used = h;
    if (accepted) {
        h_next = h * std::min(5.0, std::max(0.2, fac));
    } else {
        h_next = h * std::min(1.0, std::max(0.2, fac));
    }
    h_next = std::min(h_next, cfg_.max_step);
}

void FlowSampler::dense_prepare() {
    using namespace dop853;
    const double h = hlast_;
    // three extra stages evaluated on the accepted step
    for (int s = n_stages + 1; s < n_stages_extended; ++s) {
        State6 ys;
        for (int i = 0; i < 6; ++i) {
            double acc = 0.0;
            for (int j = 0; j < s; ++j) acc += A[s][j] * k_[j][i];
            ys[i] = y_[i] + h * acc;
        }
        k_[s] = vector_field(m_, ys);
    }
    for (int i = 0; i < 6; ++i) {
        double ydiff = y_new_[i] - y_[i];
        rc_[0][i] = ydiff;
        rc_[1][i] = h * k_[0][i] - ydiff;
        rc_[2][i] = 2.0 * ydiff - h * (k_[n_stages][i] + k_[0][i]);
        for (int row = 0; row < 4; ++row) {
            double acc = 0.0;
            for (int j = 0; j < n_stages_extended; ++j) acc += D[row][j] * k_[j][i];
            rc_[3 + row][i] = h * acc;
        }
    }
}

State6 FlowSampler::dense_eval(double theta) const {
    State6 o;
    double th1 = 1.0 - theta;
    for (int i = 0; i < 6; ++i) {
        double v = rc_[6][i];
        v = rc_[5][i] + theta * v;
        v = rc_[4][i] + th1 * v;
        v = rc_[3][i] + theta * v;
        v = rc_[2][i] + th1 * v;
        v = rc_[1][i] + theta * v;
        v = rc_[0][i] + th1 * v;
        o[i] = y_[i] + theta * v;
    }
    return o;
}

void FlowSampler::advance_to(double t_target,
                             const std::function<void(int64_t, double, const State6&)>& on_sample) {
    const double dt = cfg_.sample_dt;
    while (t_ < t_target - 1e-12 * std::max(1.0, t_target)) {
        double h = std::min(h_, t_target - t_);
        bool accepted = false;
        double h_next = h;
        int rejects = 0;
        for (;;) {
            if (h < 1e-14 * std::max(1.0, std::fabs(t_))) {
                char buf[128];
                std::snprintf(buf, sizeof buf, "step size underflow at t=%.6g", t_);
                throw error(errc::step_underflow, buf);
            }
            step_once(h, accepted, h_next, hlast_);
            if (accepted) break;
            h = h_next;
            if (++rejects > 200) {
                char buf[128];
                std::snprintf(buf, sizeof buf, "step control stalled at t=%.6g", t_);
                throw error(errc::step_underflow, buf);
            }
        }
        dense_prepare();
        double t1 = t_ + hlast_;
        while (true) {
            double ts = double(next_k_) * dt;
            if (ts > t1 + 1e-9 * dt || ts > t_target + 1e-9 * dt) break;
            double theta = (ts - t_) / hlast_;
            theta = std::min(1.0, std::max(0.0, theta));
            State6 ys = dense_eval(theta);
            on_sample(next_k_, ts, ys);
            ++next_k_;
        }
        t_ = t1;
        y_ = y_new_;
        if (cfg_.renormalize_gamma) {
            double g = std::sqrt(y_[3] * y_[3] + y_[4] * y_[4] + y_[5] * y_[5]);
            if (g > 0) {
                y_[3] /= g;
                y_[4] /= g;
                y_[5] /= g;
                k_[dop853::n_stages] = vector_field(m_, y_);
            }
        }
        k_[0] = k_[dop853::n_stages]; // FSAL
        h_ = h_next;
    }
}

Trajectory integrate(const Model& m, const State6& s0, double t_end,
                     const IntegratorConfig& cfg) {
    if (!(t_end > 0)) throw error(errc::invalid_argument, "t_end must be positive");
    Trajectory tr;
    size_t expect = size_t(t_end / cfg.sample_dt) + 2;
    tr.times.reserve(expect);
    tr.states.reserve(expect);
    tr.times.push_back(0.0);
    tr.states.push_back(s0);

    IntegralValues i0 = integrals(m, s0);
    // the Goryachev-Chaplygin cubic is an integral only on the zero-area level
    bool track_k = i0.has_k &&
                   !(m.kind == ModelKind::goryachev_chaplygin && std::fabs(i0.c) > 1e-9);
    double refv[4];
    int map[4];
    int nvals = 0;
    map[nvals] = 0; refv[nvals++] = i0.h;
    map[nvals] = 1; refv[nvals++] = i0.c;
    if (track_k) { map[nvals] = 2; refv[nvals++] = i0.k; }
    map[nvals] = 3; refv[nvals++] = i0.geom;
    std::vector<double> drift(nvals, 0.0);

    auto track = [&](const State6& s) {
        IntegralValues iv = integrals(m, s);
        double cur[4] = {iv.h, iv.c, iv.k, iv.geom};
        for (int j = 0; j < nvals; ++j) {
            double d = std::fabs(cur[map[j]] - refv[j]) / std::max(1.0, std::fabs(refv[j]));
            if (d > drift[j]) drift[j] = d;
        }
    };
    track(s0);

    FlowSampler fs(m, s0, cfg);
    fs.advance_to(t_end, [&](int64_t, double t, const State6& y) {
        tr.times.push_back(t);
        tr.states.push_back(y);
        track(y);
    });
    tr.integral_drift = drift;
    return tr;
}

std::vector<double> invariant_drift(const Model& m, const Trajectory& traj) {
    if (traj.size() == 0) throw error(errc::invalid_argument, "empty trajectory");
    IntegralValues i0 = integrals(m, traj.states[0]);
    bool track_k = i0.has_k &&
                   !(m.kind == ModelKind::goryachev_chaplygin && std::fabs(i0.c) > 1e-9);
    double refv[4];
    int map[4];
    int nvals = 0;
    map[nvals] = 0; refv[nvals++] = i0.h;
    map[nvals] = 1; refv[nvals++] = i0.c;
    if (track_k) { map[nvals] = 2; refv[nvals++] = i0.k; }
    map[nvals] = 3; refv[nvals++] = i0.geom;

    std::vector<double> drift(nvals, 0.0);
    for (const State6& s : traj.states) {
        IntegralValues iv = integrals(m, s);
        double cur[4] = {iv.h, iv.c, iv.k, iv.geom};
        for (int j = 0; j < nvals; ++j) {
            double d = std::fabs(cur[map[j]] - refv[j]) / std::max(1.0, std::fabs(refv[j]));
            if (d > drift[j]) drift[j] = d;
        }
    }
    return drift;
}

std::string trajectory_csv(const Trajectory& traj) {
    if (!traj.has_psi())
        throw error(errc::invalid_argument, "trajectory has no psi column yet");
    std::string out = "t,p,q,r,g1,g2,g3,psi\n";
    out.reserve(out.size() + traj.size() * 8 * 26);
    char buf[64];
    for (size_t i = 0; i < traj.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.16e", traj.times[i]);
        out += buf;
        for (int j = 0; j < 6; ++j) {
            std::snprintf(buf, sizeof buf, ",%.16e", traj.states[i][j]);
            out += buf;
        }
        std::snprintf(buf, sizeof buf, ",%.16e\n", traj.psi[i]);
        out += buf;
    }
    return out;
}

} // namespace precess
