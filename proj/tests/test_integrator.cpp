#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>

#include "errors.hpp"
#include "integrator.hpp"
#include "levelset.hpp"
#include "precession.hpp"
#include "models.hpp"

using namespace precess;

namespace {

// Classical fixed-step RK4, independent of the production stepper.
State6 rk4(const Model& m, State6 y, double t_end, double dt) {
    long n = std::lround(t_end / dt);
    for (long i = 0; i < n; ++i) {
        State6 k1 = vector_field(m, y);
        State6 y2;
        for (int j = 0; j < 6; ++j) y2[j] = y[j] + 0.5 * dt * k1[j];
        State6 k2 = vector_field(m, y2);
        for (int j = 0; j < 6; ++j) y2[j] = y[j] + 0.5 * dt * k2[j];
        State6 k3 = vector_field(m, y2);
        for (int j = 0; j < 6; ++j) y2[j] = y[j] + dt * k3[j];
        State6 k4 = vector_field(m, y2);
        for (int j = 0; j < 6; ++j)
            y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    return y;
}

double sup_diff(const State6& a, const State6& b) {
    double d = 0.0;
    for (int i = 0; i < 6; ++i) d = std::max(d, std::fabs(a[i] - b[i]));
    return d;
}

const State6 kov_torus_state = [] {
    return find_state(Model::make_kovalevskaya(), TargetIntegrals{0.5, 0.5, 0.0}, 42);
}();

} // namespace

TEST_CASE("long-horizon conservation on a regular torus") {
    Model m = Model::make_kovalevskaya();
    Trajectory tr = integrate(m, kov_torus_state, 1e4);
    REQUIRE(tr.integral_drift.size() == 4);
    for (double d : tr.integral_drift) CHECK(d < 1e-8);
    CHECK(invariant_drift(m, tr) == tr.integral_drift);
}

TEST_CASE("agreement with an independent fixed-step integrator") {
    Model m = Model::make_kovalevskaya();
    State6 s0 = kov_torus_state;
    Trajectory tr = integrate(m, s0, 10.0);
    State6 ref = rk4(m, s0, 10.0, 2e-4);
    CHECK(sup_diff(tr.states.back(), ref) < 1e-9);

    Model gc = Model::make_goryachev_chaplygin();
    State6 g0 = find_state(gc, TargetIntegrals{1.7, 1.0, 0.0}, 7);
    Trajectory tg = integrate(gc, g0, 10.0);
    CHECK(sup_diff(tg.states.back(), rk4(gc, g0, 10.0, 2e-4)) < 1e-9);
}

TEST_CASE("sample grid is the exact multiples of sample_dt") {
    Model m = Model::make_kovalevskaya();
    IntegratorConfig cfg;
    cfg.sample_dt = 0.007;
    Trajectory tr = integrate(m, kov_torus_state, 1.0, cfg);
    REQUIRE(tr.size() == size_t(1.0 / 0.007) + 1); // t = 0 plus every k*dt <= 1
    CHECK(tr.times[0] == 0.0);
    CHECK(tr.states[0] == kov_torus_state);
    for (size_t i = 0; i < tr.size(); ++i)
        CHECK(tr.times[i] == doctest::Approx(double(i) * 0.007).epsilon(1e-15));

    Trajectory te = integrate(m, kov_torus_state, 1.0);
    CHECK(te.size() == 101);
    CHECK(te.times.back() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("equilibria are fixed points of the sampled flow") {
    for (Model m : {Model::make_kovalevskaya(), Model::make_goryachev_chaplygin()}) {
        State6 eq{0, 0, 0, -1, 0, 0};
        Trajectory tr = integrate(m, eq, 10.0);
        for (const State6& s : tr.states) CHECK(sup_diff(s, eq) < 1e-12);
    }
}

TEST_CASE("zero-area level is preserved for goryachev-chaplygin") {
    Model m = Model::make_goryachev_chaplygin();
    double zn = std::sqrt(0.13);
    State6 s0{0.3, 0.2, 0.4, 0.2 / zn, -0.3 / zn, 0.0};
    REQUIRE(std::fabs(integrals(m, s0).c) < 1e-15);
    Trajectory tr = integrate(m, s0, 100.0);
    REQUIRE(tr.integral_drift.size() == 4); // zero area keeps the cubic tracked
    for (double d : tr.integral_drift) CHECK(d < 1e-9);
}

TEST_CASE("cubic drift column is dropped off the zero-area level") {
    Model m = Model::make_goryachev_chaplygin();
    State6 s0{0.3, 0.2, 0.4, 0.6, 0.0, 0.8}; // c = 4*0.18 + 0.32 != 0
    REQUIRE(std::fabs(integrals(m, s0).c) > 1e-3);
    Trajectory tr = integrate(m, s0, 50.0);
    REQUIRE(tr.integral_drift.size() == 3); // (h, c, geom) only
    for (double d : tr.integral_drift) CHECK(d < 1e-9);
    CHECK(invariant_drift(m, tr).size() == 3);
}

TEST_CASE("looser tolerances degrade accuracy monotonically") {
    Model m = Model::make_kovalevskaya();
    State6 s0 = kov_torus_state;
    Trajectory ref = integrate(m, s0, 50.0);

    // max_step would dominate at these tolerances, so lift it and let the
    // error control drive the step size
    double err[3];
    double tols[3] = {1e-5, 1e-7, 1e-9};
    for (int i = 0; i < 3; ++i) {
        IntegratorConfig cfg;
        cfg.rel_tol = cfg.abs_tol = tols[i];
        cfg.max_step = 50.0;
        err[i] = sup_diff(integrate(m, s0, 50.0, cfg).states.back(), ref.states.back());
    }
    CHECK(err[0] > 2.0 * err[1]);
    CHECK(err[1] > 2.0 * err[2]);
    CHECK(err[2] < 1e-7);
}

TEST_CASE("flow is compatible with the time-reversing flip") {
    Model m = Model::make_kovalevskaya();
    State6 s0 = kov_torus_state;
    State6 fwd = integrate(m, s0, 100.0).states.back();
    State6 back = integrate(m, symmetry_apply(SymmetryMap::neg_pqr, fwd), 100.0).states.back();
    CHECK(sup_diff(symmetry_apply(SymmetryMap::neg_pqr, back), s0) < 1e-6);
}

TEST_CASE("config and state validation") {
    Model m = Model::make_kovalevskaya();
    State6 off{0, 0, 0, 1.1, 0, 0};
    CHECK_THROWS_AS(integrate(m, off, 1.0), error);
    try {
        integrate(m, off, 1.0);
    } catch (const error& e) {
        CHECK(e.code == errc::invalid_argument);
    }

    CHECK_THROWS_AS(integrate(m, kov_torus_state, -1.0), error);
    IntegratorConfig bad;
    bad.sample_dt = 0.0;
    CHECK_THROWS_AS(integrate(m, kov_torus_state, 1.0, bad), error);
    bad = IntegratorConfig{};
    bad.rel_tol = -1.0;
    CHECK_THROWS_AS(integrate(m, kov_torus_state, 1.0, bad), error);
}

TEST_CASE("piecewise advance matches a single advance") {
    // each target lands on a clamped step, so the step sequences differ and
    // only roundoff-level agreement is promised
    Model m = Model::make_kovalevskaya();
    IntegratorConfig cfg;
    FlowSampler one(m, kov_torus_state, cfg);
    std::vector<State6> a;
    one.advance_to(20.0, [&](int64_t, double, const State6& y) { a.push_back(y); });

    FlowSampler two(m, kov_torus_state, cfg);
    std::vector<State6> b;
    auto grab = [&](int64_t, double, const State6& y) { b.push_back(y); };
    two.advance_to(7.0, grab);
    two.advance_to(13.5, grab);
    two.advance_to(20.0, grab);

    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(sup_diff(a[i], b[i]) < 1e-11);
    CHECK(one.time() == doctest::Approx(two.time()).epsilon(1e-15));
}

TEST_CASE("gamma renormalization keeps the internal state on the sphere") {
    Model m = Model::make_kovalevskaya();
    IntegratorConfig cfg;
    cfg.renormalize_gamma = true;
    FlowSampler fs(m, kov_torus_state, cfg);
    fs.advance_to(200.0, [](int64_t, double, const State6&) {});
    const State6& y = fs.state();
    double g = y[3] * y[3] + y[4] * y[4] + y[5] * y[5];
    CHECK(std::fabs(g - 1.0) < 1e-15);

    // samples come from the dense interpolant and are only near the sphere
    Trajectory tr = integrate(m, kov_torus_state, 200.0, cfg);
    for (const State6& s : tr.states) {
        double gs = s[3] * s[3] + s[4] * s[4] + s[5] * s[5];
        CHECK(std::fabs(gs - 1.0) < 1e-11);
    }
    Trajectory plain = integrate(m, kov_torus_state, 200.0);
    CHECK(sup_diff(tr.states.back(), plain.states.back()) < 1e-8);
}

TEST_CASE("trajectory csv needs psi and round-trips the samples") {
    Model m = Model::make_kovalevskaya();
    Trajectory tr = integrate(m, kov_torus_state, 1.0);
    CHECK_THROWS_AS(trajectory_csv(tr), error);

    accumulate_psi(m, tr);
    std::string csv = trajectory_csv(tr);
    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "t,p,q,r,g1,g2,g3,psi");
    size_t rows = 0;
    while (std::getline(in, line)) {
        const char* p = line.c_str();
        char* end = nullptr;
        double t = std::strtod(p, &end);
        CHECK(*end == ',');
        CHECK(t == tr.times[rows]);
        double v = std::strtod(end + 1, &end); // p column round-trips exactly
        CHECK(v == tr.states[rows][0]);
        ++rows;
    }
    CHECK(rows == tr.size());
}
