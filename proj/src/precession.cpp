#include "precession.hpp"

#include <cmath>
#include <cstdio>

#include "errors.hpp"
#include "json.hpp"

namespace precess {

double psi_rate(const Model& m, const State6& s, double eps) {
    if (!(eps > 0)) throw error(errc::invalid_argument, "eps must be positive");
    const double p = s[0], q = s[1];
    const double g1 = s[3], g2 = s[4], g3 = s[5];
    double den = g1 * g1 + g2 * g2;
    if (den > eps) return (p * g1 + q * g2) / den;
    if (m.kind == ModelKind::goryachev_chaplygin) {
        double pq = p * p + q * q;
        if (pq < 1e-30)
            throw error(errc::singularity, "degenerate pole state (p=q=0)");
        double sg = (g3 >= 0) ? 1.0 : -1.0;
        double k = s[2] * pq - p * g3;
        return (2.0 * p + sg * k) / (8.0 * pq);
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "precession rate singular at g3=+-1 for this model "
                  "(state p=%.3g q=%.3g r=%.3g g1=%.3g g2=%.3g g3=%.3g)",
                  s[0], s[1], s[2], s[3], s[4], s[5]);
    throw error(errc::singularity, buf);
}

void PsiAccumulator::push_value(int64_t idx, double v,
                                const std::function<void(int64_t, double)>& emit) {
    double prev = (idx == 1) ? 0.0 : psi_last_;
    if (guard_ && std::fabs(v - prev) >= 1.5707963267948966) {
        char buf[96];
        std::snprintf(buf, sizeof buf,
                      "psi increment %.3g >= pi/2 at sample %lld; reduce sample_dt",
                      v - prev, (long long)idx);
        throw error(errc::aliasing, buf);
    }
    psi_prev2_ = psi_prev_;
    psi_prev_ = psi_last_;
    psi_last_ = v;
    if (emit) emit(idx, v);
}

void PsiAccumulator::feed(double f, const std::function<void(int64_t, double)>& emit) {
    int64_t i = n_++;
    if (i == 0) {
        f0_ = f;
        psi_last_ = 0.0;
        if (emit) emit(0, 0.0);
        return;
    }
    if (i == 1) {
        f1_ = f;
        return; // psi_1 needs f_2 (three-point startup rule)
    }
    if (i == 2) {
        f2_ = f;
        double psi1 = dt_ / 12.0 * (5.0 * f0_ + 8.0 * f1_ - f2_);
        push_value(1, psi1, emit);
        double psi2 = 0.0 + dt_ / 3.0 * (f0_ + 4.0 * f1_ + f2_);
        push_value(2, psi2, emit);
        return;
    }
    double fm2 = f1_, fm1 = f2_;
    f0_ = f1_;
    f1_ = f2_;
    f2_ = f;
    double v;
    if (i % 2 == 0) {
        v = psi_prev_ + dt_ / 3.0 * (fm2 + 4.0 * fm1 + f);
    } else {
        v = psi_last_ + dt_ / 12.0 * (-fm2 + 8.0 * fm1 + 5.0 * f);
    }
    push_value(i, v, emit);
}

void accumulate_psi(const Model& m, Trajectory& traj) {
    size_t n = traj.size();
    if (n == 0) throw error(errc::invalid_argument, "empty trajectory");
    traj.psi.assign(n, 0.0);
    if (n == 1) return;
    if (n == 2) {
        // trapezoid fallback for a two-sample trajectory
        double dt = traj.times[1] - traj.times[0];
        double fa = psi_rate(m, traj.states[0]);
        double fb = psi_rate(m, traj.states[1]);
        traj.psi[1] = 0.5 * dt * (fa + fb);
        return;
    }
    double dt = traj.times[1] - traj.times[0];
    PsiAccumulator acc(dt);
    for (size_t i = 0; i < n; ++i) {
        double f = psi_rate(m, traj.states[i]);
        acc.feed(f, [&](int64_t idx, double v) { traj.psi[size_t(idx)] = v; });
    }
}

LambdaEstimate estimate_lambda(const std::vector<double>& times,
                               const std::vector<double>& psi) {
    size_t n = times.size();
    if (n != psi.size()) throw error(errc::invalid_argument, "length mismatch");
    if (n < 100) throw error(errc::invalid_argument, "need at least 100 psi samples");
    double tm = 0, pm = 0;
    for (size_t i = 0; i < n; ++i) {
        tm += times[i];
        pm += psi[i];
    }
    tm /= double(n);
    pm /= double(n);
    double stt = 0, stp = 0;
    for (size_t i = 0; i < n; ++i) {
        double dt = times[i] - tm;
        stt += dt * dt;
        stp += dt * (psi[i] - pm);
    }
    if (stt == 0) throw error(errc::invalid_argument, "degenerate time grid");
    LambdaEstimate e;
    e.lambda = stp / stt;
    e.psi0 = pm - e.lambda * tm;
    e.horizon = times.back() - times.front();
    double sup = 0;
    for (size_t i = 0; i < n; ++i) {
        double res = std::fabs(psi[i] - (e.psi0 + e.lambda * times[i]));
        if (res > sup) sup = res;
    }
    e.residual_sup = sup;
    return e;
}

LambdaEstimate estimate_lambda(const Trajectory& traj) {
    if (!traj.has_psi()) throw error(errc::invalid_argument, "trajectory has no psi");
    return estimate_lambda(traj.times, traj.psi);
}

LambdaEstimate lambda_converged(const Model& m, const State6& s0, const LambdaOpts& opts,
                                const IntegratorConfig& cfg) {
    if (!(opts.t0 > 0)) throw error(errc::invalid_argument, "t0 must be positive");
    if (!(opts.threshold > 0)) throw error(errc::invalid_argument, "threshold must be positive");

    FlowSampler fs(m, s0, cfg);
    PsiAccumulator acc(cfg.sample_dt);

    // retained (t, psi) samples; the buffer decimates itself (stride doubling)
    // so runaway horizons cannot exhaust memory
    std::vector<double> ts, ps;
    std::vector<int64_t> ks;
    const size_t cap = size_t(1) << 21;
    int64_t stride = 1;

    auto retain = [&](int64_t k, double t, double v) {
        if (k % stride != 0) return;
        if (ts.size() >= cap) {
            stride *= 2;
            size_t w = 0;
            for (size_t i = 0; i < ts.size(); ++i) {
                if (ks[i] % stride == 0) {
                    ts[w] = ts[i];
                    ps[w] = ps[i];
                    ks[w] = ks[i];
                    ++w;
                }
            }
            ts.resize(w);
            ps.resize(w);
            ks.resize(w);
            if (k % stride != 0) return;
        }
        ts.push_back(t);
        ps.push_back(v);
        ks.push_back(k);
    };

    acc.feed(psi_rate(m, s0), [&](int64_t idx, double v) { retain(idx, 0.0, v); });

    auto run_to = [&](double T) {
        fs.advance_to(T, [&](int64_t k, double t, const State6& y) {
            double f = psi_rate(m, y);
            acc.feed(f, [&](int64_t idx, double v) {
                retain(idx, double(idx) * cfg.sample_dt, v);
            });
        });
    };

    run_to(opts.t0);
    LambdaEstimate prev = estimate_lambda(ts, ps);
    prev.horizon = opts.t0;

    for (int j = 1; j <= opts.max_doublings; ++j) {
        double T = opts.t0 * std::pow(2.0, j);
        run_to(T);
        LambdaEstimate cur = estimate_lambda(ts, ps);
        cur.horizon = T;
        bool floor_path = std::fabs(prev.lambda) < opts.abs_floor;
        double change = std::fabs(prev.lambda - cur.lambda);
        cur.has_rel_change = true;
        if (floor_path) {
            cur.rel_change = change;
            cur.converged = change < opts.abs_floor;
        } else {
            cur.rel_change = change / std::fabs(prev.lambda);
            cur.converged = cur.rel_change < opts.threshold;
        }
        if (cur.converged || j == opts.max_doublings) return cur;
        prev = cur;
    }
    return prev; // unreachable
}

std::string lambda_json(const LambdaEstimate& est) {
    nlohmann::json j;
    j["lambda"] = est.lambda;
    j["psi0"] = est.psi0;
    j["horizon"] = est.horizon;
    if (est.has_rel_change)
        j["rel_change"] = est.rel_change;
    else
        j["rel_change"] = nullptr;
    j["converged"] = est.converged;
    j["residual_sup"] = est.residual_sup;
    return j.dump(2);
}

} // namespace precess
