#include "levelset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "errors.hpp"
#include "linalg.hpp"
#include "rng.hpp"

namespace precess {

namespace {

// residuals of (h, c, k) against targets at the slack-pinned state
struct NewtonProblem {
    const Model& m;
    const TargetIntegrals& tg;
    double g1, g3; // g2 = 0

    State6 assemble(const std::array<double, 3>& x) const {
        return State6{x[0], x[1], x[2], g1, 0.0, g3};
    }

    std::array<double, 3> residual(const std::array<double, 3>& x) const {
        IntegralValues v = integrals(m, assemble(x));
        return {v.h - tg.h, v.c - tg.c, v.k - tg.k};
    }

    std::array<std::array<double, 3>, 3> jacobian(const std::array<double, 3>& x) const {
        auto g = integral_gradients(m, assemble(x));
        // rows (h, c, k), columns (p, q, r)
        return {{{g[0][0], g[0][1], g[0][2]},
                 {g[1][0], g[1][1], g[1][2]},
                 {g[2][0], g[2][1], g[2][2]}}};
    }
};

bool newton_solve(const NewtonProblem& prob, std::array<double, 3>& x) {
    auto norm_inf = [](const std::array<double, 3>& v) {
        return std::max({std::fabs(v[0]), std::fabs(v[1]), std::fabs(v[2])});
    };
    auto r = prob.residual(x);
    for (int it = 0; it < 60; ++it) {
        double rn = norm_inf(r);
        if (rn < 1e-13) return true;
        std::array<double, 3> step;
        try {
            step = solve_small<3>(prob.jacobian(x), r);
        } catch (const error&) {
            return false;
        }
        double lam = 1.0;
        bool moved = false;
        for (int half = 0; half < 14; ++half) {
            std::array<double, 3> xn = {x[0] - lam * step[0], x[1] - lam * step[1],
                                        x[2] - lam * step[2]};
            auto rnew = prob.residual(xn);
            if (norm_inf(rnew) < (1.0 - 0.25 * lam) * rn) {
                x = xn;
                r = rnew;
                moved = true;
                break;
            }
            lam *= 0.5;
        }
        if (!moved) return false;
    }
    return norm_inf(prob.residual(x)) < 1e-13;
}

bool residuals_ok(const Model& m, const TargetIntegrals& tg, const State6& s) {
    IntegralValues v = integrals(m, s);
    return std::fabs(v.h - tg.h) < 1e-12 && std::fabs(v.c - tg.c) < 1e-12 &&
           std::fabs(v.k - tg.k) < 1e-12 && std::fabs(v.geom - 1.0) < 1e-12;
}

} // namespace

std::vector<State6> find_states(const Model& m, const TargetIntegrals& tg, int n_states,
                                uint64_t seed) {
    if (m.kind == ModelKind::general_top)
        throw error(errc::invalid_argument, "state manufacture targets the integrable models");
    if (!std::isfinite(tg.h) || !std::isfinite(tg.k) || !std::isfinite(tg.c))
        throw error(errc::invalid_argument, "targets must be finite");
    if (m.kind == ModelKind::kovalevskaya && tg.k < 0)
        throw error(errc::invalid_argument, "the quartic invariant target cannot be negative");
    if (m.kind == ModelKind::goryachev_chaplygin && tg.c != 0.0)
        throw error(errc::invalid_argument, "area must be zero for this model");

    std::vector<State6> found;
    const int max_attempts = 200 + 25 * std::max(0, n_states - 1);
    double amp = std::sqrt(2.0 * std::max(1.0, std::fabs(tg.h)) + 2.0);
    bool gc = m.kind == ModelKind::goryachev_chaplygin;
    for (int attempt = 0; attempt < max_attempts && int(found.size()) < n_states; ++attempt) {
        rng r(split_seed(seed, uint64_t(attempt)));
        double g3 = r.uniform(-0.995, 0.995);
        double g1 = r.sign() * std::sqrt(1.0 - g3 * g3);
        int qs = r.sign();
        NewtonProblem prob{m, tg, g1, g3};
        // Start on the exact (h, c) slice when one exists at the pinned gammas:
        // p follows from the linear area constraint, q from the energy budget.
        // Newton then only has to pull in the remaining invariant, which keeps
        // it out of the flat quartic valleys that defeat fully random starts.
        std::array<double, 3> x{};
        bool seeded = false;
        for (int draw = 0; draw < 16 && !seeded; ++draw) {
            double rr = r.uniform(-amp, amp);
            double p = gc ? -rr * g3 / (4.0 * g1) : (tg.c - rr * g3) / (2.0 * g1);
            double q2 = gc ? 0.5 * (tg.h - g1 - 0.5 * rr * rr) - p * p
                           : tg.h - g1 - p * p - 0.5 * rr * rr;
            if (q2 < 0.0) continue;
            x = {p, qs * std::sqrt(q2), rr};
            seeded = true;
        }
        if (!seeded)
            x = {r.uniform(-amp, amp), qs * r.uniform(0.05, amp), r.uniform(-amp, amp)};
        if (!newton_solve(prob, x)) continue;
        State6 s = prob.assemble(x);
        if (!residuals_ok(m, tg, s)) continue;
        found.push_back(s);
    }
    if (found.empty()) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "no state found for targets h=%.6g k=%.6g c=%.6g after %d starts",
                      tg.h, tg.k, tg.c, max_attempts);
        throw error(errc::unattainable, buf);
    }
    if (int(found.size()) < n_states && int(found.size()) < 6) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "only %zu of %d states manufactured", found.size(),
                      n_states);
        throw error(errc::indeterminate, buf);
    }
    return found;
}

State6 find_state(const Model& m, const TargetIntegrals& tg, uint64_t seed) {
    return find_states(m, tg, 1, seed)[0];
}

double chap_Z(double z, double h, double k) { return z * z * z - 2.0 * (h + 1.0) * z - 4.0 * k; }
double chap_Zstar(double z, double h, double k) {
    return z * z * z - 2.0 * (h - 1.0) * z - 4.0 * k;
}

State6 chaplygin_to_state(const ChaplyginPoint& cp, double h, double k) {
    double Zx = chap_Z(cp.x, h, k), Zsx = chap_Zstar(cp.x, h, k);
    double Zy = chap_Z(cp.y, h, k), Zsy = chap_Zstar(cp.y, h, k);
    const double slack = 1e-12;
    if (Zx > slack || Zsx < -slack || Zsy > slack || Zy < -slack)
        throw error(errc::domain, "separating variables outside their admissible intervals");
    if (cp.x == cp.y) throw error(errc::domain, "x and y must differ");
    double X = cp.sx * std::sqrt(std::max(0.0, -Zx));
    double Xs = cp.sxstar * std::sqrt(std::max(0.0, Zsx));
    double Y = cp.sy * std::sqrt(std::max(0.0, Zy));
    double Ys = cp.systar * std::sqrt(std::max(0.0, -Zsy));
    double dxy = cp.x - cp.y;
    State6 s;
    s[0] = (X * Ys + Xs * Y) / 8.0;
    s[1] = (Xs * Ys - X * Y) / 8.0;
    s[2] = cp.x + cp.y;
    s[3] = h - 0.5 * (cp.x * cp.x + cp.x * cp.y + cp.y * cp.y);
    s[4] = (X * Xs + Y * Ys) / (2.0 * dxy);
    s[5] = (Xs * Y - X * Ys) / (2.0 * dxy);
    return s;
}

double gram_volume(const Model& m, const State6& s) {
    auto g = integral_gradients(m, s);
    int n = int(g.size());
    double G[4][4] = {};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0;
            for (int c = 0; c < 6; ++c) acc += g[i][c] * g[j][c];
            G[i][j] = acc;
        }
    double det = det_small(G, n);
    return det > 0 ? std::sqrt(det) : 0.0;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

} // namespace

TorusCount count_tori(const Model& m, const TargetIntegrals& tg, uint64_t seed,
                      const TorusCountOpts& opts) {
    std::vector<State6> seeds = find_states(m, tg, opts.n_seeds, seed);
    int ns = int(seeds.size());

    struct Traj {
        std::vector<SectionPoint> cross;
        double r_min = 1e300, r_max = -1e300;
        double g3_min = 1e300, g3_max = -1e300;
    };
    std::vector<Traj> trajs(ns);

    for (int i = 0; i < ns; ++i) {
        Traj& tr = trajs[i];
        State6 prev = seeds[i];
        double tprev = 0.0;
        bool first = true;
        FlowSampler fs(m, seeds[i], opts.icfg);
        auto note = [&](double t, const State6& y) {
            tr.r_min = std::min(tr.r_min, y[2]);
            tr.r_max = std::max(tr.r_max, y[2]);
            tr.g3_min = std::min(tr.g3_min, y[5]);
            tr.g3_max = std::max(tr.g3_max, y[5]);
            if (!first && prev[4] < 0.0 && y[4] >= 0.0) {
                double w = prev[4] / (prev[4] - y[4]); // linear crossing fraction
                SectionPoint sp;
                sp.t = tprev + w * (t - tprev);
                sp.r = prev[2] + w * (y[2] - prev[2]);
                sp.g3 = prev[5] + w * (y[5] - prev[5]);
                sp.seed_index = i;
                tr.cross.push_back(sp);
            }
            prev = y;
            tprev = t;
            first = false;
        };
        note(0.0, seeds[i]);
        fs.advance_to(opts.t_span, [&](int64_t, double t, const State6& y) { note(t, y); });
    }

    // cluster by occupancy of (r, g3) cells
    std::map<std::pair<long, long>, int> cell_owner;
    UnionFind uf(ns);
    auto cell_of = [&](double r, double g3) {
        return std::pair<long, long>(long(std::floor(r / opts.cell)),
                                     long(std::floor(g3 / opts.cell)));
    };
    for (int i = 0; i < ns; ++i) {
        for (const SectionPoint& sp : trajs[i].cross) {
            auto key = cell_of(sp.r, sp.g3);
            auto it = cell_owner.find(key);
            if (it == cell_owner.end())
                cell_owner.emplace(key, i);
            else
                uf.unite(i, it->second);
        }
    }

    std::vector<int> with_cross;
    for (int i = 0; i < ns; ++i)
        if (!trajs[i].cross.empty()) with_cross.push_back(i);
    if (with_cross.empty())
        throw error(errc::indeterminate, "no section crossings observed; longer span needed");

    // canonical cluster ids ordered by (r_min, g3_min) of the cluster
    std::map<int, int> root_to_id;
    std::vector<TorusCluster> clusters;
    {
        std::map<int, TorusCluster> acc;
        for (int i : with_cross) {
            int root = uf.find(i);
            TorusCluster& cl = acc.try_emplace(root).first->second;
            if (cl.n_points == 0) {
                cl.r_min = trajs[i].r_min;
                cl.r_max = trajs[i].r_max;
                cl.g3_min = trajs[i].g3_min;
                cl.g3_max = trajs[i].g3_max;
                cl.sec_r_min = 1e300;
                cl.sec_r_max = -1e300;
                cl.sec_g3_min = 1e300;
                cl.sec_g3_max = -1e300;
                cl.representative = seeds[i];
            } else {
                cl.r_min = std::min(cl.r_min, trajs[i].r_min);
                cl.r_max = std::max(cl.r_max, trajs[i].r_max);
                cl.g3_min = std::min(cl.g3_min, trajs[i].g3_min);
                cl.g3_max = std::max(cl.g3_max, trajs[i].g3_max);
            }
            for (const SectionPoint& sp : trajs[i].cross) {
                cl.sec_r_min = std::min(cl.sec_r_min, sp.r);
                cl.sec_r_max = std::max(cl.sec_r_max, sp.r);
                cl.sec_g3_min = std::min(cl.sec_g3_min, sp.g3);
                cl.sec_g3_max = std::max(cl.sec_g3_max, sp.g3);
            }
            cl.n_points += int(trajs[i].cross.size());
        }
        std::vector<std::pair<int, TorusCluster>> items(acc.begin(), acc.end());
        std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
            if (a.second.r_min != b.second.r_min) return a.second.r_min < b.second.r_min;
            return a.second.g3_min < b.second.g3_min;
        });
        for (size_t idx = 0; idx < items.size(); ++idx) {
            root_to_id[items[idx].first] = int(idx);
            items[idx].second.id = int(idx);
            clusters.push_back(items[idx].second);
        }
    }

    // trajectory-level r-crossing per cluster
    for (int i : with_cross) {
        TorusCluster& cl = clusters[root_to_id[uf.find(i)]];
        if (trajs[i].r_min < 0.0 && trajs[i].r_max > 0.0) cl.crosses_r0 = true;
    }

    // ambiguity: two distinct clusters occupying adjacent cells cannot be told apart
    if (clusters.size() > 1) {
        std::map<std::pair<long, long>, int> cell_cluster;
        for (auto& [key, owner] : cell_owner) cell_cluster[key] = root_to_id[uf.find(owner)];
        for (auto& [key, cid] : cell_cluster) {
            for (long di = -1; di <= 1; ++di)
                for (long dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    auto it = cell_cluster.find({key.first + di, key.second + dj});
                    if (it != cell_cluster.end() && it->second != cid)
                        throw error(errc::indeterminate,
                                    "section clusters touch at cell resolution; more seeds or "
                                    "finer cells needed");
                }
        }
    }

    TorusCount out;
    out.count = int(clusters.size());
    out.clusters = clusters;
    for (int i : with_cross) {
        int cid = root_to_id[uf.find(i)];
        for (SectionPoint sp : trajs[i].cross) {
            sp.cluster = cid;
            out.points.push_back(sp);
        }
    }
    std::sort(out.points.begin(), out.points.end(), [](const SectionPoint& a, const SectionPoint& b) {
        if (a.seed_index != b.seed_index) return a.seed_index < b.seed_index;
        return a.t < b.t;
    });
    return out;
}

std::string section_points_csv(const TorusCount& tc) {
    std::string out = "t,r,g3,cluster_id\n";
    char buf[128];
    for (const SectionPoint& sp : tc.points) {
        std::snprintf(buf, sizeof buf, "%.16e,%.16e,%.16e,%d\n", sp.t, sp.r, sp.g3, sp.cluster);
        out += buf;
    }
    return out;
}

} // namespace precess
