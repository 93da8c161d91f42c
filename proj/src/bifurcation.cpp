#include "bifurcation.hpp"

#include <cmath>

#include "errors.hpp"
#include "json.hpp"

namespace precess {

const char* region_name(Region r) {
    switch (r) {
        case Region::O1: return "O1";
        case Region::O2: return "O2";
        case Region::O3: return "O3";
        case Region::O4: return "O4";
        case Region::O5: return "O5";
        case Region::OnBifurcation: return "on-bifurcation";
        case Region::Inaccessible: return "inaccessible";
    }
    return "?";
}

void gc_branch(double t, int sign, double& k, double& h) {
    if (sign != 1 && sign != -1) throw error(errc::invalid_argument, "sign must be +1 or -1");
    k = 0.5 * t * t * t;
    h = 1.5 * t * t + sign;
}

RegionLabel gc_classify(double h, double k) {
    const double tol = 1e-9;
    double env = 1.5 * std::cbrt(2.0 * std::fabs(k) * 2.0 * std::fabs(k));
    double upper = env + 1.0, lower = env - 1.0;
    RegionLabel out;
    if (h < lower - tol) {
        out.region = Region::Inaccessible;
        return out;
    }
    bool on_axis = std::fabs(k) < tol && h > -1.0;
    if (std::fabs(h - upper) < tol || std::fabs(h - lower) < tol || on_axis) {
        out.region = Region::OnBifurcation;
        return out;
    }
    if (h > upper) {
        out.region = Region::O2;
        out.torus_count = 2;
    } else {
        out.region = Region::O1;
        out.torus_count = 1;
    }
    return out;
}

std::array<double, 4> kov_critical_c() {
    return {0.0, std::sqrt(2.0), 4.0 * std::pow(3.0, -0.75), 2.0};
}

double kov_singular_h(double c, double k) {
    double rad = 0.5 * c * c + k;
    if (rad < 0) throw error(errc::domain, "negative radicand: no real sheet at these values");
    return std::sqrt(rad);
}

bool kov_on_singular(double h, double k, double c, double tol) {
    return std::fabs(h * h - 0.5 * c * c - k) < tol;
}

RegionLabel kov_classify_c0(double h, double k_sq, uint64_t seed, const TorusCountOpts& opts) {
    if (k_sq < 0) throw error(errc::invalid_argument, "k_sq cannot be negative");
    RegionLabel out;
    out.above_hsq_k = h * h > std::sqrt(k_sq);
    Model m = Model::make_kovalevskaya();
    TargetIntegrals tg{h, k_sq, 0.0};
    TorusCount tc;
    try {
        tc = count_tori(m, tg, seed, opts);
    } catch (const error& e) {
        if (e.code == errc::unattainable) {
            out.region = Region::Inaccessible;
            return out;
        }
        if (e.code == errc::indeterminate) {
            out.region = Region::OnBifurcation;
            return out;
        }
        out.probe_ok = false;
        return out;
    }
    out.torus_count = tc.count;
    for (const TorusCluster& cl : tc.clusters)
        if (cl.crosses_r0) out.crosses_r0 = true;
    if (tc.count == 1) {
        out.region = Region::O1;
    } else if (tc.count == 2) {
        if (out.crosses_r0)
            out.region = Region::O4;
        else
            out.region = out.above_hsq_k ? Region::O2 : Region::O3;
    } else if (tc.count == 4) {
        out.region = Region::O5;
    } else {
        out.probe_ok = false;
    }
    return out;
}

std::string gc_diagram_json(int n_samples, double t_max) {
    if (n_samples < 2 || t_max <= 0)
        throw error(errc::invalid_argument, "need n_samples >= 2 and t_max > 0");
    nlohmann::json j;
    j["model"] = "goryachev-chaplygin";
    for (int sign : {+1, -1}) {
        nlohmann::json pts = nlohmann::json::array();
        for (int i = 0; i < n_samples; ++i) {
            double t = -t_max + 2.0 * t_max * i / (n_samples - 1);
            double k, h;
            gc_branch(t, sign, k, h);
            pts.push_back({k, h});
        }
        j["branches"].push_back(
            {{"name", sign > 0 ? "upper" : "lower"}, {"points", pts}});
    }
    {
        nlohmann::json pts = nlohmann::json::array();
        double h_top = 1.5 * t_max * t_max + 1.0;
        for (int i = 0; i < n_samples; ++i)
            pts.push_back({0.0, -1.0 + (h_top + 1.0) * i / (n_samples - 1)});
        j["branches"].push_back({{"name", "axis"}, {"points", pts}});
    }
    return j.dump(2);
}

std::string kov_diagram_json(double c, int n_samples, double k_max) {
    if (n_samples < 2 || k_max <= 0)
        throw error(errc::invalid_argument, "need n_samples >= 2 and k_max > 0");
    nlohmann::json j;
    j["model"] = "kovalevskaya";
    j["c"] = c;
    j["critical_c"] = kov_critical_c();
    nlohmann::json pts = nlohmann::json::array();
    double k_lo = std::max(-0.5 * c * c, -k_max);
    for (int i = 0; i < n_samples; ++i) {
        double k = k_lo + (k_max - k_lo) * i / (n_samples - 1);
        pts.push_back({k, kov_singular_h(c, k)});
    }
    j["branches"].push_back({{"name", "singular"}, {"points", pts}});
    return j.dump(2);
}

} // namespace precess
