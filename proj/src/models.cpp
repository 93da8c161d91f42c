#include "models.hpp"

#include <cmath>

#include "errors.hpp"

namespace precess {

Model Model::make_kovalevskaya() {
    Model m;
    m.kind = ModelKind::kovalevskaya;
    return m;
}

Model Model::make_goryachev_chaplygin() {
    Model m;
    m.kind = ModelKind::goryachev_chaplygin;
    return m;
}

Model Model::make_general(double A, double B, double C, double l1, double l2,
                          double l3, double mu) {
    if (!(A > 0.0) || !(B > 0.0) || !(C > 0.0))
        throw error(errc::invalid_argument, "moments of inertia must be positive");
    if (!(mu > 0.0)) throw error(errc::invalid_argument, "mu must be positive");
    Model m;
    m.kind = ModelKind::general_top;
    m.A = A;
    m.B = B;
    m.C = C;
    m.l1 = l1;
    m.l2 = l2;
    m.l3 = l3;
    m.mu = mu;
    m.triangle_ok = (A + B >= C) && (B + C >= A) && (C + A >= B);
    return m;
}

std::string Model::name() const {
    switch (kind) {
        case ModelKind::kovalevskaya: return "kovalevskaya";
        case ModelKind::goryachev_chaplygin: return "goryachev_chaplygin";
        case ModelKind::general_top: return "general";
    }
    return "?";
}

static void check_finite(const State6& s) {
    for (double v : s)
        if (!std::isfinite(v)) throw error(errc::domain, "non-finite state");
}

State6 vector_field(const Model& m, const State6& s) {
    check_finite(s);
    const double p = s[0], q = s[1], r = s[2];
    const double g1 = s[3], g2 = s[4], g3 = s[5];
    State6 d;
    switch (m.kind) {
        case ModelKind::kovalevskaya:
            d[0] = 0.5 * q * r;
            d[1] = 0.5 * (g3 - r * p);
            d[2] = -g2;
            break;
        case ModelKind::goryachev_chaplygin:
            d[0] = 0.75 * q * r;
            d[1] = 0.25 * (g3 - 3.0 * r * p);
            d[2] = -g2;
            break;
        case ModelKind::general_top:
            d[0] = ((m.B - m.C) * q * r + m.mu * (m.l3 * g2 - m.l2 * g3)) / m.A;
            d[1] = ((m.C - m.A) * r * p + m.mu * (m.l1 * g3 - m.l3 * g1)) / m.B;
            d[2] = ((m.A - m.B) * p * q + m.mu * (m.l2 * g1 - m.l1 * g2)) / m.C;
            break;
    }
    // identical across models, evaluated by one shared expression
    d[3] = r * g2 - q * g3;
    d[4] = p * g3 - r * g1;
    d[5] = q * g1 - p * g2;
    return d;
}

IntegralValues integrals(const Model& m, const State6& s) {
    check_finite(s);
    const double p = s[0], q = s[1], r = s[2];
    const double g1 = s[3], g2 = s[4], g3 = s[5];
    IntegralValues v;
    v.geom = g1 * g1 + g2 * g2 + g3 * g3;
    switch (m.kind) {
        case ModelKind::kovalevskaya: {
            v.h = p * p + q * q + 0.5 * r * r + g1;
            v.c = 2.0 * (p * g1 + q * g2) + r * g3;
            double u = p * p - q * q - g1;
            double w = 2.0 * p * q - g2;
            v.k = u * u + w * w;
            break;
        }
        case ModelKind::goryachev_chaplygin:
            v.h = 2.0 * (p * p + q * q) + 0.5 * r * r + g1;
            v.c = 4.0 * (p * g1 + q * g2) + r * g3;
            v.k = r * (p * p + q * q) - p * g3;
            break;
        case ModelKind::general_top:
            v.h = 0.5 * (m.A * p * p + m.B * q * q + m.C * r * r) +
                  m.mu * (m.l1 * g1 + m.l2 * g2 + m.l3 * g3);
            v.c = m.A * p * g1 + m.B * q * g2 + m.C * r * g3;
            v.k = 0.0;
            v.has_k = false;
            break;
    }
    return v;
}

std::vector<std::array<double, 6>> integral_gradients(const Model& m, const State6& s) {
    const double p = s[0], q = s[1], r = s[2];
    const double g1 = s[3], g2 = s[4], g3 = s[5];
    std::array<double, 6> geom = {0, 0, 0, 2 * g1, 2 * g2, 2 * g3};
    switch (m.kind) {
        case ModelKind::kovalevskaya: {
            double u = p * p - q * q - g1;
            double w = 2.0 * p * q - g2;
            return {
                {2 * p, 2 * q, r, 1, 0, 0},
                {2 * g1, 2 * g2, g3, 2 * p, 2 * q, r},
                {4 * u * p + 4 * w * q, -4 * u * q + 4 * w * p, 0, -2 * u, -2 * w, 0},
                geom,
            };
        }
        case ModelKind::goryachev_chaplygin:
            return {
                {4 * p, 4 * q, r, 1, 0, 0},
                {4 * g1, 4 * g2, g3, 4 * p, 4 * q, r},
                {2 * r * p - g3, 2 * r * q, p * p + q * q, 0, 0, -p},
                geom,
            };
        case ModelKind::general_top:
            return {
                {m.A * p, m.B * q, m.C * r, m.mu * m.l1, m.mu * m.l2, m.mu * m.l3},
                {m.A * g1, m.B * g2, m.C * g3, m.A * p, m.B * q, m.C * r},
                geom,
            };
    }
    throw error(errc::internal, "bad model kind");
}

State6 symmetry_apply(SymmetryMap m, const State6& s) {
    State6 o = s;
    switch (m) {
        case SymmetryMap::alpha:
            o[0] = -s[0];
            o[1] = -s[1];
            o[5] = -s[5];
            break;
        case SymmetryMap::neg_pqr:
        case SymmetryMap::neg_pq_neg_r:
            o[0] = -s[0];
            o[1] = -s[1];
            o[2] = -s[2];
            break;
        case SymmetryMap::neg_r_neg_g3:
            o[2] = -s[2];
            o[5] = -s[5];
            break;
    }
    return o;
}

bool symmetry_time_reversing(SymmetryMap m) {
    return m != SymmetryMap::alpha;
}

std::array<double, 4> symmetry_integral_signs(const Model& model, SymmetryMap m) {
    // order (h, c, k, geom); h and geom are even in every flipped variable
    double ck = 1.0, kk = 1.0;
    switch (m) {
        case SymmetryMap::alpha:
            ck = -1.0;
            kk = 1.0;
            break;
        case SymmetryMap::neg_pqr:
        case SymmetryMap::neg_pq_neg_r:
            ck = -1.0;
            // the G-C cubic invariant is odd in (p,q,r) jointly
            kk = (model.kind == ModelKind::goryachev_chaplygin) ? -1.0 : 1.0;
            break;
        case SymmetryMap::neg_r_neg_g3:
            ck = 1.0;
            kk = (model.kind == ModelKind::goryachev_chaplygin) ? -1.0 : 1.0;
            break;
    }
    return {1.0, ck, kk, 1.0};
}

bool on_manifold(const State6& s, double tol) {
    double g = s[3] * s[3] + s[4] * s[4] + s[5] * s[5];
    return std::fabs(g - 1.0) <= tol;
}

} // namespace precess
