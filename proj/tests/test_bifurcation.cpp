#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bifurcation.hpp"
#include "errors.hpp"
#include "json.hpp"
#include "rng.hpp"

using namespace precess;

TEST_CASE("branch parametrization of the goryachev-chaplygin diagram") {
    double k = 0, h = 0;
    gc_branch(0.0, 1, k, h);
    CHECK(k == 0.0);
    CHECK(h == 1.0);
    gc_branch(2.0, 1, k, h);
    CHECK(k == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(h == doctest::Approx(7.0).epsilon(1e-15));
    gc_branch(1.0, -1, k, h);
    CHECK(k == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(h == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(gc_branch(1.0, 0, k, h), error);
    CHECK_THROWS_AS(gc_branch(1.0, 2, k, h), error);
}

TEST_CASE("goryachev-chaplygin region classification") {
    RegionLabel lab = gc_classify(3.0, 0.5);
    CHECK(lab.region == Region::O2);
    CHECK(lab.torus_count == 2);

    lab = gc_classify(1.0, 0.5);
    CHECK(lab.region == Region::O1);
    CHECK(lab.torus_count == 1);

    lab = gc_classify(1.0, 0.0); // on the degenerate axis k = 0
    CHECK(lab.region == Region::OnBifurcation);

    lab = gc_classify(-2.0, 0.001);
    CHECK(lab.region == Region::Inaccessible);

    // every branch point classifies as on-bifurcation, both branch signs
    for (int i = 0; i <= 100; ++i) {
        double t = 0.05 + 2.0 * i / 100.0;
        for (int sign : {1, -1}) {
            double k = 0, h = 0;
            gc_branch(t, sign, k, h);
            CHECK(gc_classify(h, k).region == Region::OnBifurcation);
        }
    }

    // just above and below the upper branch the count flips
    double k1 = 0, h1 = 0;
    gc_branch(1.0, 1, k1, h1);
    CHECK(gc_classify(h1 + 1e-6, k1).torus_count == 2);
    CHECK(gc_classify(h1 - 1e-6, k1).torus_count == 1);

    // the diagram is symmetric in the sign of the cubic invariant
    rng r(4);
    for (int trial = 0; trial < 1000; ++trial) {
        double h = r.uniform(-2, 8), k = r.uniform(0.01, 3);
        RegionLabel a = gc_classify(h, k), b = gc_classify(h, -k);
        CHECK(a.region == b.region);
        CHECK(a.torus_count == b.torus_count);
    }
}

TEST_CASE("critical area values") {
    auto cs = kov_critical_c();
    CHECK(cs[0] == 0.0);
    CHECK(cs[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(cs[2] == doctest::Approx(4.0 * std::pow(3.0, -0.75)).epsilon(1e-12));
    CHECK(cs[2] == doctest::Approx(1.7548).epsilon(0.01));
    CHECK(cs[3] == 2.0);
    for (int i = 1; i < 4; ++i) CHECK(cs[i] > cs[i - 1]);
}

TEST_CASE("singular curve of the kovalevskaya diagram") {
    CHECK(kov_singular_h(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(kov_singular_h(2.0, 0.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(kov_singular_h(2.0, -1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(kov_singular_h(0.0, -1.0), error);

    CHECK(kov_on_singular(1.0, 1.0, 0.0));
    CHECK(kov_on_singular(1.0 + 1e-10, 1.0, 0.0));
    CHECK_FALSE(kov_on_singular(1.1, 1.0, 0.0));
    CHECK(kov_on_singular(-1.0, 1.0, 0.0)); // negative sheet

    rng r(6);
    for (int trial = 0; trial < 1000; ++trial) {
        double h = r.uniform(-2, 2), k = r.uniform(-1, 4), c = r.uniform(-2, 2);
        CHECK(kov_on_singular(h, k, c) == kov_on_singular(h, k, -c));
        CHECK(kov_on_singular(h, k, c, 1e-3) == (std::fabs(h * h - c * c / 2 - k) < 1e-3));
    }
}

TEST_CASE("numerical classification of the zero-area kovalevskaya plane") {
    TorusCountOpts fast;
    fast.n_seeds = 16;
    fast.t_span = 250.0;

    RegionLabel lab = kov_classify_c0(0.5, 0.5, 9, fast);
    CHECK(lab.region == Region::O1);
    CHECK(lab.torus_count == 1);
    CHECK(lab.crosses_r0);
    CHECK(lab.probe_ok);

    lab = kov_classify_c0(1.0, 1.5, 9, fast);
    CHECK(lab.region == Region::O4);
    CHECK(lab.torus_count == 2);
    CHECK(lab.crosses_r0);

    lab = kov_classify_c0(1.6, 2.0, 9, fast);
    CHECK(lab.region == Region::O2);
    CHECK(lab.torus_count == 2);
    CHECK_FALSE(lab.crosses_r0);
    CHECK(lab.above_hsq_k);

    lab = kov_classify_c0(-5.0, 1.0, 9, fast);
    CHECK(lab.region == Region::Inaccessible);
    CHECK(lab.torus_count == -1);

    CHECK_THROWS_AS(kov_classify_c0(1.0, -0.5, 9, fast), error);

    RegionLabel again = kov_classify_c0(1.0, 1.5, 9, fast);
    CHECK(again.region == Region::O4);
    CHECK(again.torus_count == 2);
}

TEST_CASE("region names") {
    CHECK(std::string(region_name(Region::O1)) == "O1");
    CHECK(std::string(region_name(Region::O5)) == "O5");
    CHECK(std::string(region_name(Region::OnBifurcation)) == "on-bifurcation");
    CHECK(std::string(region_name(Region::Inaccessible)) == "inaccessible");
}

TEST_CASE("diagram json payloads") {
    auto gj = nlohmann::json::parse(gc_diagram_json(11, 2.0));
    CHECK(gj["model"] == "goryachev-chaplygin");
    REQUIRE(gj["branches"].size() == 3);
    bool saw_upper = false, saw_lower = false, saw_axis = false;
    for (const auto& br : gj["branches"]) {
        std::string name = br["name"];
        const auto& pts = br["points"];
        if (name == "upper") {
            saw_upper = true;
            REQUIRE(pts.size() == 11);
            for (const auto& pt : pts) {
                double k = pt[0], h = pt[1];
                double t = std::cbrt(2.0 * k);
                CHECK(h == doctest::Approx(1.5 * t * t + 1.0).epsilon(1e-9));
            }
        } else if (name == "lower") {
            saw_lower = true;
        } else if (name == "axis") {
            saw_axis = true;
        }
    }
    CHECK(saw_upper);
    CHECK(saw_lower);
    CHECK(saw_axis);

    auto kj = nlohmann::json::parse(kov_diagram_json(1.0, 21, 4.0));
    CHECK(kj["model"] == "kovalevskaya");
    CHECK(kj["c"] == 1.0);
    REQUIRE(kj["critical_c"].size() == 4);
    CHECK(double(kj["critical_c"][3]) == 2.0);
    REQUIRE(kj["branches"].size() >= 1);
    for (const auto& br : kj["branches"]) {
        if (br["name"] != "singular") continue;
        for (const auto& pt : br["points"]) {
            double k = pt[0], h = pt[1];
            CHECK(h == doctest::Approx(std::sqrt(0.5 + k)).epsilon(1e-9));
            CHECK(k >= -0.5 - 1e-12);
        }
    }

    CHECK_THROWS_AS(gc_diagram_json(1, 2.0), error);
    CHECK_THROWS_AS(kov_diagram_json(1.0, 10, -1.0), error);
}
