#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "levelset.hpp"
#include "models.hpp"

namespace precess {

enum class Region { O1, O2, O3, O4, O5, OnBifurcation, Inaccessible };

const char* region_name(Region r);

struct RegionLabel {
    Region region = Region::OnBifurcation;
    int torus_count = -1;    // -1 when unknown
    bool crosses_r0 = false; // any cluster's trajectories cross r = 0
    bool above_hsq_k = false;
    bool probe_ok = true; // false: probing failed, region is meaningless
};

// Branch point of the Goryachev-Chaplygin diagram: k = t^3/2, h = (3/2)t^2 + sign.
void gc_branch(double t, int sign, double& k, double& h);

// One torus below the upper branch, two above; OnBifurcation within 1e-9 of any
// branch (including k = 0, h > -1); Inaccessible below the lower envelope.
// The region label only encodes the torus count here (O1 = one, O2 = two).
RegionLabel gc_classify(double h, double k);

// The four critical area-integral values, ascending.
std::array<double, 4> kov_critical_c();

// Positive sheet of the curve h^2 = c^2/2 + k; negative radicand is a domain error.
double kov_singular_h(double c, double k);

// Predicate form, valid on both sheets.
bool kov_on_singular(double h, double k, double c, double tol = 1e-9);

// Numerical classification of a (h, k^2) point on the zero-area Kovalevskaya
// diagram by torus count and the r-sign geometry of the clusters. Deterministic
// per seed. Newton exhaustion reads as Inaccessible, clustering ambiguity as
// OnBifurcation.
RegionLabel kov_classify_c0(double h, double k_sq, uint64_t seed,
                            const TorusCountOpts& opts = {});

// Branch polylines for diagram plots, t-sampled, as JSON text.
std::string gc_diagram_json(int n_samples = 201, double t_max = 2.5);
std::string kov_diagram_json(double c, int n_samples = 201, double k_max = 4.0);

} // namespace precess
