#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace precess {

// Phase point (p, q, r, g1, g2, g3): angular velocity in the body frame and
// the unit vertical vector. g1^2 + g2^2 + g3^2 = 1 on the physical manifold.
using State6 = std::array<double, 6>;

enum class ModelKind { kovalevskaya, goryachev_chaplygin, general_top };

struct Model {
    ModelKind kind = ModelKind::kovalevskaya;
    // general_top parameters (ignored for the two scaled models)
    double A = 1.0, B = 1.0, C = 1.0;
    double l1 = 0.0, l2 = 0.0, l3 = 0.0;
    double mu = 1.0;

    static Model make_kovalevskaya();
    static Model make_goryachev_chaplygin();
    // Triangle inequalities A+B >= C (and cyclic) are checked; a violation
    // sets triangle_ok=false but is not an error.
    static Model make_general(double A, double B, double C, double l1, double l2,
                              double l3, double mu);

    bool triangle_ok = true;
    int integral_count() const { return kind == ModelKind::general_top ? 3 : 4; }
    std::string name() const;
};

struct IntegralValues {
    double h = 0.0;    // energy
    double c = 0.0;    // area (vertical momentum); the identically-zero area value for G-C
    double k = 0.0;    // k^2 for Kovalevskaya, signed k for G-C
    double geom = 0.0; // |gamma|^2
    bool has_k = true;
};

// Signed coordinate flips that send solutions to (possibly time-reversed) solutions
// of the two scaled models.
enum class SymmetryMap : int {
    alpha = 0,         // (-p,-q, r, g1, g2,-g3)
    neg_pqr = 1,       // (-p,-q,-r, g1, g2, g3), time-reversing
    neg_r_neg_g3 = 2,  // ( p, q,-r, g1, g2,-g3), time-reversing
    neg_pq_neg_r = 3,  // (-p,-q,-r, g1, g2, g3), time-reversing
};

State6 vector_field(const Model& m, const State6& s);
IntegralValues integrals(const Model& m, const State6& s);

// Gradients of the model's first integrals, rows ordered (h, c, k, geom) for the
// scaled models and (h, c, geom) for the general top.
std::vector<std::array<double, 6>> integral_gradients(const Model& m, const State6& s);

State6 symmetry_apply(SymmetryMap m, const State6& s);
bool symmetry_time_reversing(SymmetryMap m);
// Sign picked up by each integral value (h, c, k, geom order) under the map,
// for the given model.
std::array<double, 4> symmetry_integral_signs(const Model& model, SymmetryMap m);

bool on_manifold(const State6& s, double tol = 1e-10);

} // namespace precess
