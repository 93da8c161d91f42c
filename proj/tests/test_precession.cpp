#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "integrator.hpp"
#include "levelset.hpp"
#include "models.hpp"
#include "precession.hpp"
#include "rng.hpp"

using namespace precess;

TEST_CASE("rate quotient on pinned states") {
    Model kov = Model::make_kovalevskaya();
    CHECK(psi_rate(kov, {0, 1, 0, 1, 0, 0}) == 0.0);
    CHECK(psi_rate(kov, {1, 2, 0.5, 0.6, 0.8, 0}) == doctest::Approx(2.2).epsilon(1e-14));
    CHECK_THROWS_AS(psi_rate(kov, {1, 2, 0.5, 0, 0, 1}), error);
    CHECK_THROWS_AS(psi_rate(kov, {1, 2, 0.5, 0.6, 0.8, 0}, 0.0), error);

    Model gc = Model::make_goryachev_chaplygin();
    double q = std::sqrt(0.46);
    CHECK(psi_rate(gc, {-0.2, q, 0, 0, 0, 1}) == doctest::Approx(-0.05).epsilon(1e-14));
    // p = q = 0 leaves no flow direction to take the limit along
    CHECK_THROWS_AS(psi_rate(gc, {0, 0, 1, 0, 0, 1}), error);
}

TEST_CASE("rate collapses to a function of r and g3 on the zero-area level") {
    rng r(2024);
    Model kov = Model::make_kovalevskaya();
    Model gc = Model::make_goryachev_chaplygin();
    int done = 0;
    while (done < 10000) {
        double p = r.uniform(-2, 2), q = r.uniform(-2, 2);
        double g3 = r.uniform(-0.99, 0.99);
        if (std::fabs(g3) < 0.05) continue;
        double phi = r.uniform(0, 6.283185307179586);
        double sg = std::sqrt(1.0 - g3 * g3);
        double g1 = sg * std::cos(phi), g2 = sg * std::sin(phi);
        double dot = p * g1 + q * g2;

        // Kovalevskaya area 2(p g1 + q g2) + r g3 = 0
        double rr = -2.0 * dot / g3;
        State6 s{p, q, rr, g1, g2, g3};
        double want = 0.5 * rr * g3 / (g3 * g3 - 1.0);
        CHECK(std::fabs(psi_rate(kov, s) - want) <= 1e-12 * std::max(1.0, std::fabs(want)));

        // Goryachev-Chaplygin area 4(p g1 + q g2) + r g3 = 0
        rr = -4.0 * dot / g3;
        s = State6{p, q, rr, g1, g2, g3};
        want = 0.25 * rr * g3 / (g3 * g3 - 1.0);
        CHECK(std::fabs(psi_rate(gc, s) - want) <= 1e-12 * std::max(1.0, std::fabs(want)));
        ++done;
    }
}

TEST_CASE("pole rate is the limit of the quotient along the flow") {
    Model gc = Model::make_goryachev_chaplygin();
    double k = 0.2, h = 1.0;
    State6 pole{-k, std::sqrt(h / 2 - k * k), 0, 0, 0, 1};
    double limit = psi_rate(gc, pole);
    CHECK(limit == doctest::Approx(-0.05).epsilon(1e-14));

    IntegratorConfig cfg;
    cfg.sample_dt = 1e-3;
    Trajectory tr = integrate(gc, pole, 0.032, cfg);
    auto quotient_at = [&](double t) {
        size_t i = size_t(std::lround(t / cfg.sample_dt));
        const State6& s = tr.states.at(i);
        double den = s[3] * s[3] + s[4] * s[4];
        REQUIRE(den > 1e-9);
        return (s[0] * s[3] + s[1] * s[4]) / den;
    };
    // one-sided Richardson in the time offset: f(tau) = L + a tau + O(tau^2)
    double f1 = quotient_at(0.032), f2 = quotient_at(0.016), f3 = quotient_at(0.008);
    double r1 = 2.0 * f2 - f1, r2 = 2.0 * f3 - f2;
    double extrap = 2.0 * r2 - r1;
    CHECK(std::fabs(extrap - limit) < 1e-4);
    CHECK(std::fabs(f3 - limit) < std::fabs(f1 - limit));
}

TEST_CASE("accumulator reproduces closed-form quadrature") {
    double dt = 0.01;

    PsiAccumulator flat(dt);
    std::vector<double> psis;
    std::vector<int64_t> idxs;
    for (int i = 0; i <= 1000; ++i)
        flat.feed(0.5, [&](int64_t k, double v) {
            idxs.push_back(k);
            psis.push_back(v);
        });
    // emission catches up at feed 2, then tracks the feeds one-to-one
    REQUIRE(idxs.size() == 1001);
    for (size_t j = 0; j < idxs.size(); ++j) {
        CHECK(idxs[j] == int64_t(j));
        CHECK(psis[j] == doctest::Approx(0.5 * dt * double(j)).epsilon(1e-12));
    }
    CHECK(flat.current() == doctest::Approx(0.5 * 1000 * dt).epsilon(1e-12));

    double w = 1.3;
    PsiAccumulator osc(dt);
    double last = 0.0;
    for (int i = 0; i <= 1000; ++i)
        osc.feed(std::cos(w * dt * double(i)), [&](int64_t, double v) { last = v; });
    double T = dt * 1000.0;
    CHECK(last == doctest::Approx(std::sin(w * T) / w).epsilon(1e-9));
}

TEST_CASE("aliasing guard") {
    PsiAccumulator guarded(4.0);
    auto nop = [](int64_t, double) {};
    int fed = 0;
    CHECK_THROWS_AS([&] {
        for (int i = 0; i < 10; ++i) {
            guarded.feed(1.0, nop);
            ++fed;
        }
    }(), error);
    CHECK(fed == 2); // the third feed trips the guard

    PsiAccumulator open(4.0, false);
    for (int i = 0; i < 10; ++i) open.feed(1.0, nop);
    CHECK(open.current() > 0.0);
}

TEST_CASE("psi accumulation along trajectories") {
    Model m = Model::make_kovalevskaya();

    Trajectory eq = integrate(m, {0, 0, 0, -1, 0, 0}, 10.0);
    accumulate_psi(m, eq);
    REQUIRE(eq.has_psi());
    for (double v : eq.psi) CHECK(std::fabs(v) < 1e-14);
    CHECK(eq.psi[0] == 0.0);

    State6 s0 = find_state(m, TargetIntegrals{1.0, 1.5, 0.0}, 3);
    Trajectory tr = integrate(m, s0, 100.0);
    accumulate_psi(m, tr);
    REQUIRE(tr.psi.size() == tr.size());
    // cross-check one interior value against direct Simpson over the rates
    std::vector<double> f(tr.size());
    for (size_t i = 0; i < tr.size(); ++i) f[i] = psi_rate(m, tr.states[i]);
    size_t n = tr.size() - 1;
    if (n % 2) --n;
    double simpson = 0.0;
    for (size_t i = 0; i + 2 <= n; i += 2)
        simpson += (f[i] + 4.0 * f[i + 1] + f[i + 2]) / 3.0 * 0.01;
    CHECK(tr.psi[n] == doctest::Approx(simpson).epsilon(1e-8));
}

TEST_CASE("least squares mean motion on synthetic series") {
    double dt = 0.01;

    std::vector<double> t, psi;
    for (int i = 0; i <= 1000; ++i) {
        t.push_back(dt * i);
        psi.push_back(0.7 + 3.0 * dt * i);
    }
    LambdaEstimate e = estimate_lambda(t, psi);
    CHECK(e.lambda == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(e.psi0 == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(e.horizon == doctest::Approx(10.0));
    CHECK(e.residual_sup < 1e-10);

    auto quasi = [](double tt) {
        return 1.0 + 2.0 * tt + 0.3 * std::sin(5.0 * tt) + 0.2 * std::sin(std::sqrt(2.0) * tt);
    };
    double errs[3];
    int horizons[3] = {100, 1000, 10000};
    for (int j = 0; j < 3; ++j) {
        std::vector<double> tj, pj;
        for (int i = 0; i <= horizons[j] * 10; ++i) {
            tj.push_back(0.1 * i);
            pj.push_back(quasi(0.1 * i));
        }
        LambdaEstimate ej = estimate_lambda(tj, pj);
        errs[j] = std::fabs(ej.lambda - 2.0);
        if (horizons[j] == 1000) {
            CHECK(ej.lambda == doctest::Approx(2.0).epsilon(0.01));
            CHECK(ej.residual_sup < 0.7);
        }
    }
    CHECK(errs[1] < errs[0]);
    CHECK(errs[2] < errs[1]);

    std::vector<double> shortt(t.begin(), t.begin() + 50), shortp(psi.begin(), psi.begin() + 50);
    CHECK_THROWS_AS(estimate_lambda(shortt, shortp), error);
    shortp.pop_back();
    CHECK_THROWS_AS(estimate_lambda(shortt, shortp), error);
}

TEST_CASE("horizon doubling on an equilibrium settles on the absolute floor") {
    Model m = Model::make_kovalevskaya();
    LambdaOpts opts;
    opts.t0 = 10.0;
    LambdaEstimate e = lambda_converged(m, {0, 0, 0, -1, 0, 0}, opts);
    CHECK(e.converged);
    CHECK(std::fabs(e.lambda) < 1e-9);
    CHECK(e.horizon <= 40.0);
}

TEST_CASE("mean motion vanishes on a slow family and not on a fast one") {
    Model m = Model::make_kovalevskaya();

    State6 slow = find_state(m, TargetIntegrals{0.5, 0.5, 0.0}, 11);
    LambdaEstimate es = lambda_converged(m, slow);
    CHECK(es.converged);
    CHECK(std::fabs(es.lambda) < 1e-3);

    State6 fast = find_state(m, TargetIntegrals{1.0, 1.5, 0.0}, 11);
    LambdaEstimate ef = lambda_converged(m, fast);
    CHECK(ef.converged);
    CHECK(std::fabs(ef.lambda) > 0.5);
    CHECK(std::fabs(std::fabs(ef.lambda) - 0.6157809) < 0.01);
    // psi stays within a bounded tube around the fitted line
    CHECK(ef.residual_sup < 2.0);

    // the non-reversing flip sends the torus to its mirror with opposite motion
    LambdaEstimate em = lambda_converged(m, symmetry_apply(SymmetryMap::alpha, fast));
    CHECK(em.converged);
    CHECK(std::fabs(em.lambda + ef.lambda) < 0.01 * std::fabs(ef.lambda));
}

TEST_CASE("mean motion is a torus invariant") {
    Model m = Model::make_goryachev_chaplygin();
    State6 a = find_state(m, TargetIntegrals{1.7, 1.0, 0.0}, 5);
    State6 b = integrate(m, a, 37.1).states.back();
    LambdaEstimate ea = lambda_converged(m, a);
    LambdaEstimate eb = lambda_converged(m, b);
    CHECK(ea.converged);
    CHECK(eb.converged);
    CHECK(std::fabs(ea.lambda - eb.lambda) < 1e-3 * std::max(1.0, std::fabs(ea.lambda)));
}

TEST_CASE("estimate json shape") {
    LambdaEstimate e;
    e.lambda = 1.5;
    e.horizon = 100.0;
    e.converged = true;
    e.has_rel_change = false;
    std::string j = lambda_json(e);
    CHECK(j.find("\"lambda\"") != std::string::npos);
    CHECK(j.find("\"rel_change\": null") != std::string::npos);
    CHECK(j.find("\"converged\": true") != std::string::npos);
    e.has_rel_change = true;
    e.rel_change = 0.25;
    j = lambda_json(e);
    CHECK(j.find("\"rel_change\": 0.25") != std::string::npos);
}
