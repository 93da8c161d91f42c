#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <vector>

#include "ergodic.hpp"
#include "errors.hpp"
#include "models.hpp"
#include "rng.hpp"

using namespace precess;

namespace {

Model instance() { return Model::make_general(1.0, 2.0, 2.5, 0.3, 0.2, 0.1, 1.0); }

struct Weighted {
    double mean = 0.0;
    double sigma = 0.0;
};

template <class F>
Weighted weighted_average(const std::vector<LevelSample>& samples, F&& f) {
    double sw = 0, swf = 0;
    for (const LevelSample& ls : samples) {
        sw += ls.weight;
        swf += ls.weight * f(ls.state);
    }
    Weighted out;
    out.mean = swf / sw;
    double var = 0;
    for (const LevelSample& ls : samples) {
        double d = f(ls.state) - out.mean;
        var += ls.weight * ls.weight * d * d;
    }
    out.sigma = std::sqrt(var) / sw;
    return out;
}

} // namespace

TEST_CASE("weighted samples land on the level set") {
    Model m = instance();
    std::vector<LevelSample> ss = sample_levelset(m, 2.0, 500, 11);
    REQUIRE(ss.size() == 500);
    for (const LevelSample& ls : ss) {
        CHECK(ls.weight > 0.0);
        CHECK(std::isfinite(ls.weight));
        CHECK(on_manifold(ls.state, 1e-10));
        IntegralValues v = integrals(m, ls.state);
        CHECK(std::fabs(v.h - 2.0) < 1e-12);
        CHECK(std::fabs(v.c) < 1e-12);
    }

    // deterministic per seed
    std::vector<LevelSample> tt = sample_levelset(m, 2.0, 50, 11);
    for (int i = 0; i < 50; ++i) {
        CHECK(tt[i].state == ss[i].state);
        CHECK(tt[i].weight == ss[i].weight);
    }
}

TEST_CASE("single-point construction and rejections") {
    Model m = instance();
    std::array<double, 3> g{0.0, 0.6, 0.8};
    LevelSample ls = level_sample_at(m, 2.0, g, 1.234);
    CHECK(ls.state[3] == 0.0);
    CHECK(ls.state[4] == 0.6);
    CHECK(ls.state[5] == 0.8);
    IntegralValues v = integrals(m, ls.state);
    CHECK(v.h == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::fabs(v.c) < 1e-12);

    // energy at or below the potential leaves no ellipse
    CHECK_THROWS_AS(level_sample_at(m, 0.05, {1, 0, 0}, 0.0), error);
    CHECK_THROWS_AS(level_sample_at(m, 0.3, {1, 0, 0}, 0.0), error);
    CHECK_THROWS_AS(level_sample_at(Model::make_kovalevskaya(), 2.0, g, 0.0), error);
    CHECK_THROWS_AS(sample_levelset(m, -0.5, 10, 1), error);
    CHECK_THROWS_AS(sample_levelset(m, 2.0, 0, 1), error);
}

TEST_CASE("odd momentum observables average to zero") {
    Model m = instance();
    std::vector<LevelSample> ss = sample_levelset(m, 2.0, 20000, 5);
    Weighted wp = weighted_average(ss, [](const State6& s) { return s[0]; });
    CHECK(std::fabs(wp.mean) <= 3.0 * wp.sigma);
    Weighted wr = weighted_average(ss, [](const State6& s) { return s[2]; });
    CHECK(std::fabs(wr.mean) <= 3.0 * wr.sigma);
    // sanity: the distribution is not degenerate
    CHECK(wp.sigma > 0.0);
}

TEST_CASE("fiber weights match a thin-shell rejection sampler") {
    Model m = instance();
    std::array<double, 3> g{0.0, 0.6, 0.8};

    // dense quadrature over the ellipse angle with the production weights
    std::vector<LevelSample> ring;
    for (int i = 0; i < 2880; ++i)
        ring.push_back(level_sample_at(m, 2.0, g, 2.0 * M_PI * i / 2880.0));
    Weighted gl_p2 = weighted_average(ring, [](const State6& s) { return s[0] * s[0]; });
    Weighted gl_r2 = weighted_average(ring, [](const State6& s) { return s[2] * s[2]; });

    // uniform box draws kept inside |H - h| < dh, |C| < dc approximate the
    // same conditional measure as the shell shrinks
    rng rr(77);
    double E = 2.0 - (0.2 * 0.6 + 0.1 * 0.8);
    double pb = std::sqrt(2 * E / 1.0), qb = std::sqrt(2 * E / 2.0), rb = std::sqrt(2 * E / 2.5);
    const double dh = 0.02, dc = 0.02;
    double sp2 = 0, sr2 = 0;
    long kept = 0;
    for (long it = 0; it < 40000000 && kept < 2500; ++it) {
        double p = rr.uniform(-pb, pb), q = rr.uniform(-qb, qb), r = rr.uniform(-rb, rb);
        double H = 0.5 * (p * p + 2.0 * q * q + 2.5 * r * r) + 0.2;
        if (std::fabs(H - 2.0) >= dh) continue;
        double C = 1.0 * p * g[0] + 2.0 * q * g[1] + 2.5 * r * g[2];
        if (std::fabs(C) >= dc) continue;
        sp2 += p * p;
        sr2 += r * r;
        ++kept;
    }
    REQUIRE(kept >= 2500);
    CHECK(sp2 / double(kept) == doctest::Approx(gl_p2.mean).epsilon(0.05));
    CHECK(sr2 / double(kept) == doctest::Approx(gl_r2.mean).epsilon(0.05));
}

TEST_CASE("monte carlo average of the mean motion") {
    Model m = instance();
    ErgodicResult res = main_motion_average(m, 2.0, 60, 500.0, 3, 1);
    CHECK(res.h == 2.0);
    CHECK(res.n == 60);
    CHECK(res.horizon == 500.0);
    CHECK(res.failures <= 3);
    REQUIRE(res.has_stderr);
    CHECK(res.stderr_ > 0.0);
    CHECK(std::fabs(res.mean) <= 3.0 * res.stderr_);

    // per-sample work is pure, so the thread count cannot change the result
    ErgodicResult r3 = main_motion_average(m, 2.0, 60, 500.0, 3, 3);
    CHECK(r3.mean == res.mean);
    CHECK(r3.stderr_ == res.stderr_);
    CHECK(r3.failures == res.failures);

    CHECK_THROWS_AS(main_motion_average(m, 2.0, 10, -1.0, 3, 1), error);
}

TEST_CASE("result json shape") {
    Model m = instance();
    ErgodicResult one = main_motion_average(m, 2.0, 1, 50.0, 3, 1);
    CHECK_FALSE(one.has_stderr);
    std::string j = ergodic_json(one);
    CHECK(j.find("\"stderr\": null") != std::string::npos);
    CHECK(j.find("\"failures\": 0") != std::string::npos);

    ErgodicResult res = main_motion_average(m, 2.0, 20, 50.0, 3, 1);
    std::string j2 = ergodic_json(res);
    CHECK(j2.find("\"mean\"") != std::string::npos);
    CHECK(j2.find("\"stderr\": null") == std::string::npos);
}
