#include "ergodic.hpp"

#include <cmath>
#include <cstdio>

#include "errors.hpp"
#include "integrator.hpp"
#include "json.hpp"
#include "linalg.hpp"
#include "precession.hpp"
#include "rng.hpp"
#include "threadpool.hpp"

namespace precess {

namespace {

using Vec3 = std::array<double, 3>;

Vec3 apply_inertia(const Model& m, const Vec3& v) {
    return {m.A * v[0], m.B * v[1], m.C * v[2]};
}

} // namespace

// The area constraint confines omega to the plane orthogonal to M*gamma; the
// energy quadric cuts an ellipse out of that plane. We parametrize the ellipse
// by its principal axes, omega(phi) = sqrt(2E/d1) cos(phi) e1 + sqrt(2E/d2)
// sin(phi) e2, and weight each draw by |d omega/d phi| / |(M omega) x (M gamma)|,
// the arc-length element of the fiber over the gradient volume of the cut, so
// that weighted sums over (gamma, phi) draws integrate against the invariant
// density 1/V.
LevelSample level_sample_at(const Model& m, double h, const Vec3& gamma, double phi) {
    if (m.kind != ModelKind::general_top)
        throw error(errc::invalid_argument, "level-set sampling targets the general top");
    Vec3 lam = {m.l1, m.l2, m.l3};
    double E = h - m.mu * dot3(lam, gamma);
    if (E <= 0) throw error(errc::domain, "empty ellipse: energy at or below the potential");
    Vec3 mg = apply_inertia(m, gamma);
    Vec3 nrm = mg;
    double mgn = norm3(mg);
    for (auto& v : nrm) v /= mgn;
    Vec3 a = std::fabs(nrm[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    Vec3 u1 = cross3(nrm, a);
    double u1n = norm3(u1);
    for (auto& v : u1) v /= u1n;
    Vec3 u2 = cross3(nrm, u1);

    Vec3 mu1 = apply_inertia(m, u1), mu2 = apply_inertia(m, u2);
    double s11 = dot3(u1, mu1), s12 = dot3(u1, mu2), s22 = dot3(u2, mu2);
    double d1, d2, v1[2], v2[2];
    eig_sym2(s11, s12, s22, d1, d2, v1, v2);
    if (d1 <= 0) throw error(errc::domain, "energy form is not positive on the plane");

    Vec3 e1 = {v1[0] * u1[0] + v1[1] * u2[0], v1[0] * u1[1] + v1[1] * u2[1],
               v1[0] * u1[2] + v1[1] * u2[2]};
    Vec3 e2 = {v2[0] * u1[0] + v2[1] * u2[0], v2[0] * u1[1] + v2[1] * u2[1],
               v2[0] * u1[2] + v2[1] * u2[2]};
    double r1 = std::sqrt(2.0 * E / d1), r2 = std::sqrt(2.0 * E / d2);
    double c = std::cos(phi), s = std::sin(phi);
    Vec3 omega = {r1 * c * e1[0] + r2 * s * e2[0], r1 * c * e1[1] + r2 * s * e2[1],
                  r1 * c * e1[2] + r2 * s * e2[2]};
    Vec3 domega = {-r1 * s * e1[0] + r2 * c * e2[0], -r1 * s * e1[1] + r2 * c * e2[1],
                   -r1 * s * e1[2] + r2 * c * e2[2]};
    Vec3 momega = apply_inertia(m, omega);
    Vec3 grad = cross3(momega, mg);
    double gn = norm3(grad);
    if (gn < 1e-14) throw error(errc::domain, "degenerate fiber: gradients collapse");

    LevelSample out;
    out.state = {omega[0], omega[1], omega[2], gamma[0], gamma[1], gamma[2]};
    out.weight = norm3(domega) / gn;
    return out;
}

std::vector<LevelSample> sample_levelset(const Model& m, double h, int n, uint64_t seed) {
    if (m.kind != ModelKind::general_top)
        throw error(errc::invalid_argument, "level-set sampling targets the general top");
    if (n <= 0) throw error(errc::invalid_argument, "need n > 0");
    Vec3 lam = {m.l1, m.l2, m.l3};
    if (h <= -m.mu * norm3(lam))
        throw error(errc::domain, "empty level set: h not above the potential minimum");

    std::vector<LevelSample> out;
    out.reserve(n);
    const int64_t cap = std::max<int64_t>(1000000, 500ll * n);
    for (int64_t attempt = 0; attempt < cap && int(out.size()) < n; ++attempt) {
        rng r(split_seed(seed, uint64_t(attempt)));
        Vec3 g = {r.normal(), r.normal(), r.normal()};
        double gn = norm3(g);
        if (gn < 1e-12) continue;
        for (auto& v : g) v /= gn;
        if (h - m.mu * dot3(lam, g) <= 0) continue;
        double phi = r.uniform(0.0, 2.0 * 3.14159265358979323846);
        LevelSample ls = level_sample_at(m, h, g, phi);
        IntegralValues iv = integrals(m, ls.state);
        if (!(ls.weight > 0) || std::fabs(iv.c) >= 1e-12 || std::fabs(iv.h - h) >= 1e-12)
            continue;
        out.push_back(ls);
    }
    if (int(out.size()) < n)
        throw error(errc::sampling, "rejection sampling exhausted its attempt budget");
    return out;
}

ErgodicResult main_motion_average(const Model& m, double h, int n, double horizon,
                                  uint64_t seed, int n_threads) {
    if (horizon <= 0) throw error(errc::invalid_argument, "need horizon > 0");
    std::vector<LevelSample> samples = sample_levelset(m, h, n, seed);

    struct PerSample {
        double value = 0.0;
        bool ok = false;
    };
    std::vector<PerSample> results(samples.size());
    IntegratorConfig cfg;

    parallel_for(resolve_threads(n_threads), int64_t(samples.size()), [&](int64_t i) {
        PerSample& ps = results[size_t(i)];
        try {
            FlowSampler fs(m, samples[size_t(i)].state, cfg);
            PsiAccumulator acc(cfg.sample_dt, false);
            auto rate = [](const State6& y) {
                double den = y[3] * y[3] + y[4] * y[4];
                return (y[0] * y[3] + y[1] * y[4]) / den;
            };
            acc.feed(rate(samples[size_t(i)].state), nullptr);
            fs.advance_to(horizon,
                          [&](int64_t, double, const State6& y) { acc.feed(rate(y), nullptr); });
            double psi_T = acc.current();
            if (!std::isfinite(psi_T)) return;
            ps.value = psi_T / horizon;
            ps.ok = true;
        } catch (const error&) {
            // counted as a failure below
        }
    });

    ErgodicResult res;
    res.h = h;
    res.n = n;
    res.horizon = horizon;
    double sw = 0, swf = 0;
    for (size_t i = 0; i < samples.size(); ++i) {
        if (!results[i].ok) {
            ++res.failures;
            continue;
        }
        sw += samples[i].weight;
        swf += samples[i].weight * results[i].value;
    }
    if (res.failures * 20 > n) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%d of %d sample integrations failed", res.failures, n);
        throw error(errc::sampling, buf);
    }
    int n_ok = n - res.failures;
    res.mean = swf / sw;
    if (n_ok > 1) {
        double var = 0;
        for (size_t i = 0; i < samples.size(); ++i) {
            if (!results[i].ok) continue;
            double d = results[i].value - res.mean;
            var += samples[i].weight * samples[i].weight * d * d;
        }
        res.stderr_ = std::sqrt(var) / sw;
        res.has_stderr = true;
    }
    return res;
}

std::string ergodic_json(const ErgodicResult& r) {
    nlohmann::json j;
    j["h"] = r.h;
    j["n"] = r.n;
    j["horizon"] = r.horizon;
    j["mean"] = r.mean;
    if (r.has_stderr)
        j["stderr"] = r.stderr_;
    else
        j["stderr"] = nullptr;
    j["failures"] = r.failures;
    return j.dump(2);
}

} // namespace precess
