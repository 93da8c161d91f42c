#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "integrator.hpp"
#include "models.hpp"

namespace precess {

// Target first-integral values; k holds k^2 for Kovalevskaya and the signed
// cubic invariant for Goryachev-Chaplygin (whose c must be 0).
struct TargetIntegrals {
    double h = 0.0;
    double k = 0.0;
    double c = 0.0;
};

// Manufactures an on-manifold state with the prescribed integral values by
// randomized multi-start damped Newton; the two slack dimensions are pinned by
// the section g2 = 0, a drawn g3 value, and discrete sign choices.
// Deterministic per seed. Throws unattainable after 200 failed starts.
State6 find_state(const Model& m, const TargetIntegrals& t, uint64_t seed);

// First n_states successful Newton roots with distinct slack draws.
std::vector<State6> find_states(const Model& m, const TargetIntegrals& t, int n_states,
                                uint64_t seed);

struct ChaplyginPoint {
    double x = 0.0, y = 0.0;
    int sx = 1, sxstar = 1, sy = 1, systar = 1;
};

// Z(z) = z^3 - 2(h+1)z - 4k, Zstar(z) = z^3 - 2(h-1)z - 4k.
double chap_Z(double z, double h, double k);
double chap_Zstar(double z, double h, double k);

// Reconstructs a Goryachev-Chaplygin state from separating variables; requires
// Z(x) <= 0 <= Zstar(x), Zstar(y) <= 0 <= Z(y), x != y.
State6 chaplygin_to_state(const ChaplyginPoint& cp, double h, double k);

// sqrt(det G) of the Gram matrix of the model's integral gradients; zero iff
// the gradients are dependent.
double gram_volume(const Model& m, const State6& s);

struct SectionPoint {
    double t;
    double r;
    double g3;
    int cluster = -1;
    int seed_index = -1;
};

struct TorusCluster {
    int id = 0;
    double r_min = 0, r_max = 0;
    double g3_min = 0, g3_max = 0;
    double sec_r_min = 0, sec_r_max = 0;
    double sec_g3_min = 0, sec_g3_max = 0;
    bool crosses_r0 = false; // measured along trajectories, not section points
    State6 representative{};
    int n_points = 0;
};

struct TorusCount {
    int count = 0;
    std::vector<TorusCluster> clusters;
    std::vector<SectionPoint> points;
};

struct TorusCountOpts {
    int n_seeds = 32;
    double t_span = 400.0;
    double cell = 0.05;
    IntegratorConfig icfg{1e-10, 1e-10, 0.1, 0.01, false};
};

// Integrates several manufactured states, collects oriented Poincare-section
// crossings (g2 = 0, dg2/dt > 0) projected to (r, g3), and clusters the
// crossing sets by grid-cell occupancy. Ambiguous adjacency between distinct
// clusters raises an indeterminate error.
TorusCount count_tori(const Model& m, const TargetIntegrals& t, uint64_t seed,
                      const TorusCountOpts& opts = {});

std::string section_points_csv(const TorusCount& tc);

} // namespace precess
