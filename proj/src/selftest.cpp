#include "selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "bifurcation.hpp"
#include "errors.hpp"
#include "ergodic.hpp"
#include "json.hpp"
#include "levelset.hpp"
#include "precession.hpp"
#include "rng.hpp"

namespace precess {

namespace {

struct Runner {
    SelftestReport& rep;
    void check(const std::string& name, const std::function<std::string()>& body) {
        SelftestEntry e;
        e.name = name;
        try {
            e.detail = body();
            e.pass = true;
        } catch (const std::exception& ex) {
            e.pass = false;
            e.detail = ex.what();
        }
        if (!e.pass) ++rep.n_failed;
        rep.entries.push_back(std::move(e));
    }
};

[[noreturn]] void fail(const std::string& msg) { throw error(errc::internal, msg); }

void expect_near(double got, double want, double tol, const char* what) {
    if (!(std::fabs(got - want) <= tol)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: got %.16g, want %.16g (tol %.3g)", what, got, want,
                      tol);
        fail(buf);
    }
}

State6 random_unit_gamma_state(rng& r, double amp) {
    double g1 = r.normal(), g2 = r.normal(), g3 = r.normal();
    double n = std::sqrt(g1 * g1 + g2 * g2 + g3 * g3);
    if (n < 1e-6) return random_unit_gamma_state(r, amp);
    return State6{r.uniform(-amp, amp), r.uniform(-amp, amp), r.uniform(-amp, amp),
                  g1 / n, g2 / n, g3 / n};
}

std::string check_field_examples() {
    State6 s{1, 2, 3, 0.1, 0.2, 0.3};
    State6 f = vector_field(Model::make_kovalevskaya(), s);
    expect_near(f[0], 3.0, 1e-14, "kov dp");
    expect_near(f[1], -1.35, 1e-14, "kov dq");
    expect_near(f[2], -0.2, 1e-14, "kov dr");
    expect_near(f[3], 0.0, 1e-14, "kov dg1");
    expect_near(f[4], 0.0, 1e-14, "kov dg2");
    expect_near(f[5], 0.0, 1e-14, "kov dg3");
    f = vector_field(Model::make_goryachev_chaplygin(), s);
    expect_near(f[0], 4.5, 1e-14, "gc dp");
    expect_near(f[1], -2.175, 1e-14, "gc dq");
    expect_near(f[2], -0.2, 1e-14, "gc dr");
    Model gen = Model::make_general(1, 2, 3, 0.1, 0.2, 0.3, 2);
    State6 sg{1, 2, 3, 0.3, 0.1, 0.2};
    f = vector_field(gen, sg);
    expect_near(f[0], -6.02, 1e-12, "gen dp");
    expect_near(f[1], 2.93, 1e-12, "gen dq");
    expect_near(f[2], -1.9 / 3.0, 1e-12, "gen dr");
    expect_near(f[3], -0.1, 1e-14, "gen dg1");
    expect_near(f[4], -0.7, 1e-14, "gen dg2");
    expect_near(f[5], 0.5, 1e-14, "gen dg3");
    return "hand examples match for all three models";
}

std::string check_integral_examples() {
    State6 s{1, 2, 3, 0.1, 0.2, 0.3};
    IntegralValues v = integrals(Model::make_kovalevskaya(), s);
    expect_near(v.h, 9.6, 1e-13, "kov h");
    expect_near(v.c, 1.9, 1e-13, "kov c");
    expect_near(v.k, 24.05, 1e-13, "kov k_sq");
    expect_near(v.geom, 0.14, 1e-14, "kov geom");
    v = integrals(Model::make_goryachev_chaplygin(), s);
    expect_near(v.h, 14.6, 1e-13, "gc h");
    expect_near(v.c, 2.9, 1e-13, "gc area");
    expect_near(v.k, 14.7, 1e-13, "gc k");
    Model gen = Model::make_general(1, 2, 3, 0.1, 0.2, 0.3, 2);
    State6 sg{1, 2, 3, 0.3, 0.1, 0.2};
    v = integrals(gen, sg);
    expect_near(v.h, 18.22, 1e-13, "gen h");
    expect_near(v.c, 2.5, 1e-13, "gen c");
    return "integral values match hand computations";
}

std::string check_symmetries() {
    rng r(11);
    const SymmetryMap maps[] = {SymmetryMap::alpha, SymmetryMap::neg_pqr,
                                SymmetryMap::neg_r_neg_g3, SymmetryMap::neg_pq_neg_r};
    for (Model m : {Model::make_kovalevskaya(), Model::make_goryachev_chaplygin()}) {
        for (int trial = 0; trial < 50; ++trial) {
            State6 s = random_unit_gamma_state(r, 2.0);
            for (SymmetryMap map : maps) {
                State6 ms = symmetry_apply(map, s);
                State6 mms = symmetry_apply(map, ms);
                for (int i = 0; i < 6; ++i)
                    if (mms[i] != s[i]) fail("symmetry map is not an involution");
                double sign = symmetry_time_reversing(map) ? -1.0 : 1.0;
                State6 fs = vector_field(m, s);
                State6 fms = vector_field(m, ms);
                State6 mfs = symmetry_apply(map, fs);
                for (int i = 0; i < 6; ++i)
                    if (std::fabs(fms[i] - sign * mfs[i]) > 1e-14)
                        fail("field is not equivariant under the symmetry map");
                auto sg = symmetry_integral_signs(m, map);
                IntegralValues vs = integrals(m, s);
                IntegralValues vm = integrals(m, ms);
                expect_near(vm.h, sg[0] * vs.h, 1e-12, "h under map");
                expect_near(vm.c, sg[1] * vs.c, 1e-12, "c under map");
                if (vs.has_k) expect_near(vm.k, sg[2] * vs.k, 1e-11, "k under map");
                expect_near(vm.geom, sg[3] * vs.geom, 1e-13, "geom under map");
            }
        }
    }
    return "involution, field equivariance and integral signs hold";
}

std::string check_equilibrium(const IntegratorConfig& cfg) {
    Model m = Model::make_kovalevskaya();
    State6 s0{0, 0, 0, -1, 0, 0};
    Trajectory tr = integrate(m, s0, 10.0, cfg);
    for (size_t i = 0; i < tr.size(); ++i)
        for (int j = 0; j < 6; ++j)
            if (std::fabs(tr.states[i][j] - s0[j]) > 1e-12) fail("equilibrium drifted");
    return "hanging equilibrium is a fixed point of the integrator";
}

std::string check_drift(const IntegratorConfig& cfg) {
    double gn = std::sqrt(0.04 + 0.09 + 0.81);
    State6 s0{0.3, 0.2, 0.4, 0.2 / gn, -0.3 / gn, 0.9 / gn};
    // zero-area variant: the cubic is an integral of the G-C flow only there
    double zn = std::sqrt(0.04 + 0.09);
    State6 s0_gc{0.3, 0.2, 0.4, 0.2 / zn, -0.3 / zn, 0.0};
    double worst = 0;
    for (Model m : {Model::make_kovalevskaya(), Model::make_goryachev_chaplygin(),
                    Model::make_general(1.0, 2.0, 2.5, 0.3, 0.2, 0.1, 1.0)}) {
        const State6& s = m.kind == ModelKind::goryachev_chaplygin ? s0_gc : s0;
        Trajectory tr = integrate(m, s, 1000.0, cfg);
        for (double d : tr.integral_drift) worst = std::max(worst, d);
    }
    if (worst >= 1e-8) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "max relative invariant drift %.3g >= 1e-8", worst);
        fail(buf);
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "max relative invariant drift %.3g", worst);
    return buf;
}

std::string check_reversibility(const IntegratorConfig& cfg) {
    Model m = Model::make_kovalevskaya();
    double gn = std::sqrt(0.04 + 0.09 + 0.81);
    State6 s0{0.3, 0.2, 0.4, 0.2 / gn, -0.3 / gn, 0.9 / gn};
    Trajectory fwd = integrate(m, s0, 100.0, cfg);
    State6 rs = symmetry_apply(SymmetryMap::neg_pqr, fwd.states.back());
    Trajectory back = integrate(m, rs, 100.0, cfg);
    State6 rb = symmetry_apply(SymmetryMap::neg_pqr, back.states.back());
    double worst = 0;
    for (int i = 0; i < 6; ++i) worst = std::max(worst, std::fabs(rb[i] - s0[i]));
    if (worst >= 1e-6) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "forward-reverse mismatch %.3g >= 1e-6", worst);
        fail(buf);
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "forward-reverse mismatch %.3g", worst);
    return buf;
}

std::string check_rate_identity() {
    rng r(12);
    for (int trial = 0; trial < 1000; ++trial) {
        State6 s = random_unit_gamma_state(r, 1.5);
        if (std::fabs(s[5]) < 0.05 || std::fabs(s[5]) > 0.95) continue;
        Model kov = Model::make_kovalevskaya();
        s[2] = -2.0 * (s[0] * s[3] + s[1] * s[4]) / s[5];
        double quot = psi_rate(kov, s);
        double alt = 0.5 * s[2] * s[5] / (s[5] * s[5] - 1.0);
        if (std::fabs(quot - alt) > 1e-12 * std::max(1.0, std::fabs(quot)))
            fail("zero-area rate identity violated for the first model");
        Model gc = Model::make_goryachev_chaplygin();
        s[2] = -4.0 * (s[0] * s[3] + s[1] * s[4]) / s[5];
        quot = psi_rate(gc, s);
        alt = 0.25 * s[2] * s[5] / (s[5] * s[5] - 1.0);
        if (std::fabs(quot - alt) > 1e-12 * std::max(1.0, std::fabs(quot)))
            fail("zero-area rate identity violated for the second model");
    }
    return "quotient and pole-regular forms agree on zero-area states";
}

std::string check_r0_bound() {
    rng r(13);
    Model kov = Model::make_kovalevskaya();
    for (int trial = 0; trial < 1000; ++trial) {
        State6 s = random_unit_gamma_state(r, 1.5);
        if (std::fabs(s[4]) < 0.05) continue;
        s[2] = 0.0;
        s[1] = -s[0] * s[3] / s[4];
        IntegralValues v = integrals(kov, s);
        if (std::fabs(v.c) > 1e-12) fail("constructed state has nonzero area");
        if (v.h * v.h > v.k + 1e-12) fail("r=0 state with h^2 above the quartic invariant");
    }
    return "r=0 zero-area states satisfy h^2 <= k^2";
}

std::string check_volume_symmetry() {
    rng r(14);
    for (Model m : {Model::make_kovalevskaya(), Model::make_goryachev_chaplygin()}) {
        for (int trial = 0; trial < 1000; ++trial) {
            State6 s = random_unit_gamma_state(r, 1.5);
            double v = gram_volume(m, s);
            double va = gram_volume(m, symmetry_apply(SymmetryMap::alpha, s));
            if (std::fabs(v - va) > 1e-10 * std::max(1.0, v))
                fail("gradient volume is not symmetric under the axis flip");
        }
    }
    return "gradient volume invariant under the axis flip on both models";
}

std::string check_branch_data() {
    double k, h;
    gc_branch(0, +1, k, h);
    expect_near(k, 0, 0, "branch k at t=0");
    expect_near(h, 1, 0, "branch h at t=0");
    gc_branch(2, +1, k, h);
    expect_near(k, 4, 1e-15, "branch k at t=2");
    expect_near(h, 7, 1e-15, "branch h at t=2");
    gc_branch(1, -1, k, h);
    expect_near(k, 0.5, 1e-15, "branch k at t=1");
    expect_near(h, 0.5, 1e-15, "branch h at t=1");
    auto cc = kov_critical_c();
    expect_near(cc[0], 0, 0, "critical c0");
    expect_near(cc[1], 1.4142135623730951, 1e-15, "critical c1");
    if (std::fabs(cc[2] - 1.75) > 0.01) fail("third critical value far from 1.75");
    expect_near(cc[3], 2, 0, "critical c3");
    if (gc_classify(3, 0.5).torus_count != 2) fail("(3, 0.5) should have two tori");
    if (gc_classify(1, 0.5).torus_count != 1) fail("(1, 0.5) should have one torus");
    if (gc_classify(1, 0).region != Region::OnBifurcation) fail("(1, 0) should sit on a branch");
    if (gc_classify(-2, 0.001).region != Region::Inaccessible)
        fail("(-2, 0.001) should be inaccessible");
    rng r(15);
    for (int i = 0; i < 1000; ++i) {
        double t = r.uniform(-2, 2);
        int sign = r.sign();
        gc_branch(t, sign, k, h);
        if (gc_classify(h, k).region != Region::OnBifurcation)
            fail("branch point not flagged by the classifier");
        double hq = r.uniform(-2, 8), kq = r.uniform(-3, 3);
        if (gc_classify(hq, kq).region != gc_classify(hq, -kq).region)
            fail("classifier is not symmetric in the invariant sign");
    }
    if (!kov_on_singular(1, 1, 0)) fail("(h=1, k=1, c=0) should sit on the singular curve");
    expect_near(kov_singular_h(2, 0), 1.4142135623730951, 1e-15, "singular h at c=2, k=0");
    return "branch formulas, critical values and classifiers agree";
}

std::string check_chaplygin() {
    rng r(16);
    Model gc = Model::make_goryachev_chaplygin();
    int found = 0;
    for (int trial = 0; trial < 40000 && found < 100; ++trial) {
        double h = r.uniform(0.5, 2.0), k = r.uniform(-0.5, 0.5);
        ChaplyginPoint cp;
        cp.x = r.uniform(-3, 3);
        cp.y = r.uniform(-3, 3);
        if (std::fabs(cp.x - cp.y) < 0.1) continue;
        if (chap_Z(cp.x, h, k) > 0 || chap_Zstar(cp.x, h, k) < 0) continue;
        if (chap_Z(cp.y, h, k) < 0 || chap_Zstar(cp.y, h, k) > 0) continue;
        cp.sx = r.sign();
        cp.sxstar = r.sign();
        cp.sy = r.sign();
        cp.systar = r.sign();
        State6 s = chaplygin_to_state(cp, h, k);
        IntegralValues v = integrals(gc, s);
        if (std::fabs(v.h - h) > 1e-10 || std::fabs(v.k - k) > 1e-10 ||
            std::fabs(v.c) > 1e-10 || std::fabs(v.geom - 1.0) > 1e-10)
            fail("separating-variable lift misses its integral targets");
        ++found;
    }
    if (found < 50) fail("too few admissible separating-variable points sampled");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d lifted points hit their targets", found);
    return buf;
}

std::string check_ols() {
    std::vector<double> ts, ps;
    for (int i = 0; i <= 10000; ++i) {
        double t = 0.1 * i;
        ts.push_back(t);
        ps.push_back(2.0 * t + 0.3 + 0.05 * std::sin(t));
    }
    LambdaEstimate est = estimate_lambda(ts, ps);
    expect_near(est.lambda, 2.0, 0.01, "fitted slope");
    return "synthetic slope recovered";
}

std::string check_torus_count() {
    TorusCountOpts opts;
    opts.n_seeds = 8;
    TorusCount tc = count_tori(Model::make_kovalevskaya(), TargetIntegrals{0.5, 0.5, 0.0}, 101,
                               opts);
    if (tc.count != 1) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "expected one cluster, found %d", tc.count);
        fail(buf);
    }
    return "single invariant torus detected at the reference point";
}

std::string check_rate_examples() {
    Model kov = Model::make_kovalevskaya();
    State6 s{1, 2, 0.5, 0.6, 0.8, 0};
    expect_near(psi_rate(kov, s), 2.2, 1e-14, "plain quotient");
    Model gc = Model::make_goryachev_chaplygin();
    State6 pole{-0.2, std::sqrt(0.46), 0, 0, 0, 1};
    expect_near(psi_rate(gc, pole), -0.05, 1e-12, "pole-limit rate");
    bool threw = false;
    try {
        psi_rate(kov, State6{0.1, 0.2, 0.3, 0, 0, 1});
    } catch (const error& e) {
        threw = e.code == errc::singularity;
    }
    if (!threw) fail("pole state did not raise a singularity for the first model");
    return "quotient, pole limit and singularity guard behave";
}

std::string check_aliasing_guard() {
    PsiAccumulator acc(4.0);
    bool threw = false;
    try {
        acc.feed(1.0, nullptr);
        acc.feed(1.0, nullptr);
        acc.feed(1.0, nullptr);
    } catch (const error& e) {
        threw = e.code == errc::aliasing;
    }
    if (!threw) fail("coarse grid did not trip the aliasing guard");
    return "aliasing guard trips on a too-coarse grid";
}

std::string check_level_weights() {
    Model gen = Model::make_general(1.0, 2.0, 2.5, 0.3, 0.2, 0.1, 1.0);
    auto samples = sample_levelset(gen, 2.0, 500, 7);
    for (const LevelSample& ls : samples) {
        if (!(ls.weight > 0)) fail("nonpositive sample weight");
        IntegralValues v = integrals(gen, ls.state);
        if (std::fabs(v.c) >= 1e-12) fail("sample misses the zero-area constraint");
        if (std::fabs(v.h - 2.0) >= 1e-12) fail("sample misses the energy level");
        State6 refl{-ls.state[0], -ls.state[1], -ls.state[2],
                    ls.state[3], ls.state[4], ls.state[5]};
        IntegralValues vr = integrals(gen, refl);
        if (std::fabs(vr.h - 2.0) >= 1e-12 || std::fabs(vr.c) >= 1e-12)
            fail("reflected sample leaves the level set");
    }
    double wsum = 0;
    for (const LevelSample& ls : samples) wsum += ls.weight * integrals(gen, ls.state).c;
    if (std::fabs(wsum) > 1e-10) fail("weighted area average is not zero");
    return "level-set samples satisfy their invariants";
}

} // namespace

SelftestReport run_selftest(const IntegratorConfig& cfg) {
    SelftestReport rep;
    Runner run{rep};
    run.check("field-examples", check_field_examples);
    run.check("integral-examples", check_integral_examples);
    run.check("symmetry-maps", check_symmetries);
    run.check("equilibrium-fixed", [&] { return check_equilibrium(cfg); });
    run.check("invariant-drift", [&] { return check_drift(cfg); });
    run.check("reversibility", [&] { return check_reversibility(cfg); });
    run.check("rate-identity", check_rate_identity);
    run.check("r0-energy-bound", check_r0_bound);
    run.check("volume-symmetry", check_volume_symmetry);
    run.check("branch-data", check_branch_data);
    run.check("chaplygin-lift", check_chaplygin);
    run.check("ols-line", check_ols);
    run.check("torus-count", check_torus_count);
    run.check("rate-examples", check_rate_examples);
    run.check("aliasing-guard", check_aliasing_guard);
    run.check("level-weights", check_level_weights);
    return rep;
}

std::string selftest_text(const SelftestReport& rep) {
    std::string out;
    for (const SelftestEntry& e : rep.entries) {
        out += e.pass ? "PASS " : "FAIL ";
        out += e.name;
        if (!e.detail.empty()) {
            out += ": ";
            out += e.detail;
        }
        out += "\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%zu checks, %d failed\n", rep.entries.size(), rep.n_failed);
    out += buf;
    return out;
}

std::string selftest_json(const SelftestReport& rep) {
    nlohmann::json j;
    j["entries"] = nlohmann::json::array();
    for (const SelftestEntry& e : rep.entries)
        j["entries"].push_back({{"name", e.name}, {"pass", e.pass}, {"detail", e.detail}});
    j["n_failed"] = rep.n_failed;
    return j.dump(2);
}

} // namespace precess
