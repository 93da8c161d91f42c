#include "sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "bifurcation.hpp"
#include "errors.hpp"
#include "json.hpp"
#include "levelset.hpp"
#include "precession.hpp"
#include "rng.hpp"
#include "threadpool.hpp"

namespace fs = std::filesystem;

namespace precess {

namespace {

ModelKind model_from_name(const std::string& name) {
    if (name == "kovalevskaya") return ModelKind::kovalevskaya;
    if (name == "goryachev-chaplygin") return ModelKind::goryachev_chaplygin;
    throw error(errc::invalid_argument, "unknown sweep model '" + name + "'");
}

const char* model_name_of(ModelKind k) {
    return k == ModelKind::kovalevskaya ? "kovalevskaya" : "goryachev-chaplygin";
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string row_fields_csv(const SweepRow& r) {
    std::string out;
    out += fmt_double(r.kx);
    out += ',';
    out += fmt_double(r.h);
    out += ',';
    out += fmt_double(r.c);
    out += ',';
    out += std::to_string(r.torus_id);
    out += ',';
    out += fmt_double(r.lambda);
    out += ',';
    out += r.converged ? '1' : '0';
    out += ',';
    out += fmt_double(r.horizon);
    out += ',';
    out += fmt_double(r.residual_sup);
    out += ',';
    out += r.status;
    return out;
}

const char* kPartialHeader = "point_index,k_sq,h,c,torus_id,lambda,converged,horizon,"
                             "residual_sup,status\n";
const char* kFinalHeader = "k_sq,h,c,torus_id,lambda,converged,horizon,residual_sup,status\n";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw error(errc::io, "cannot read " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void atomic_write(const fs::path& target, const std::string& content) {
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc | std::ios::binary);
        if (!f) throw error(errc::io, "cannot write " + tmp.string());
        f << content;
        if (!f.flush()) throw error(errc::io, "write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

// one row per point with no torus data
SweepRow point_status_row(int64_t idx, double kx, double h, double c, const char* status) {
    SweepRow r;
    r.point_index = idx;
    r.kx = kx;
    r.h = h;
    r.c = c;
    r.torus_id = -1;
    r.lambda = std::nan("");
    r.converged = false;
    r.horizon = 0;
    r.residual_sup = std::nan("");
    r.status = status;
    return r;
}

std::vector<SweepRow> sweep_point(const SweepConfig& cfg, int64_t idx, double kx, double h) {
    const double c = cfg.c;
    if (cfg.model == ModelKind::kovalevskaya) {
        if (kx >= 0) {
            double kroot = std::sqrt(kx);
            if (kov_on_singular(h, kroot, c, 1e-6) || kov_on_singular(h, -kroot, c, 1e-6))
                return {point_status_row(idx, kx, h, c, "on-singular-curve")};
        }
    } else {
        RegionLabel lab = gc_classify(h, kx);
        if (lab.region == Region::Inaccessible)
            return {point_status_row(idx, kx, h, c, "inaccessible")};
        if (lab.region == Region::OnBifurcation)
            return {point_status_row(idx, kx, h, c, "on-singular-curve")};
    }

    Model m = cfg.model == ModelKind::kovalevskaya ? Model::make_kovalevskaya()
                                                   : Model::make_goryachev_chaplygin();
    TargetIntegrals tg{h, kx, cfg.model == ModelKind::kovalevskaya ? c : 0.0};
    uint64_t pseed = split_seed(cfg.seed, uint64_t(idx));

    TorusCount tc;
    try {
        try {
            tc = count_tori(m, tg, pseed);
        } catch (const error& e) {
            if (e.code != errc::indeterminate) throw;
            TorusCountOpts wide;
            wide.n_seeds = 64;
            tc = count_tori(m, tg, pseed, wide);
        }
    } catch (const error& e) {
        if (e.code == errc::unattainable)
            return {point_status_row(idx, kx, h, c, "inaccessible")};
        return {point_status_row(idx, kx, h, c, "integration-failed")};
    }

    LambdaOpts lopts;
    lopts.t0 = cfg.t0;
    lopts.threshold = cfg.threshold;
    std::vector<SweepRow> rows;
    for (const TorusCluster& cl : tc.clusters) {
        SweepRow r;
        r.point_index = idx;
        r.kx = kx;
        r.h = h;
        r.c = c;
        r.torus_id = cl.id;
        try {
            LambdaEstimate est = lambda_converged(m, cl.representative, lopts);
            r.lambda = est.lambda;
            r.converged = est.converged;
            r.horizon = est.horizon;
            r.residual_sup = est.residual_sup;
            r.status = est.converged ? "ok" : "unconverged";
        } catch (const error&) {
            r.lambda = std::nan("");
            r.converged = false;
            r.horizon = 0;
            r.residual_sup = std::nan("");
            r.status = "integration-failed";
        }
        rows.push_back(r);
    }
    return rows;
}

nlohmann::json config_canonical_json(const SweepConfig& cfg) {
    nlohmann::json j;
    j["model"] = model_name_of(cfg.model);
    j["c"] = cfg.c;
    if (cfg.grid) {
        j["grid"] = {{"k_sq_min", cfg.grid->kx_min}, {"k_sq_max", cfg.grid->kx_max},
                     {"h_min", cfg.grid->h_min},     {"h_max", cfg.grid->h_max},
                     {"nx", cfg.grid->nx},           {"ny", cfg.grid->ny}};
    }
    if (cfg.polyline) {
        nlohmann::json wp = nlohmann::json::array();
        for (auto& w : cfg.polyline->waypoints) wp.push_back({w[0], w[1]});
        j["polyline"] = {{"waypoints", wp}, {"samples", cfg.polyline->samples}};
    }
    j["t0"] = cfg.t0;
    j["threshold"] = cfg.threshold;
    j["seed"] = cfg.seed;
    return j;
}

} // namespace

SweepConfig sweep_config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw error(errc::invalid_argument, std::string("config is not valid JSON: ") + e.what());
    }
    SweepConfig cfg;
    try {
        if (j.contains("model")) cfg.model = model_from_name(j.at("model").get<std::string>());
        if (cfg.model == ModelKind::general_top)
            throw error(errc::invalid_argument, "sweeps target the integrable models");
        cfg.c = j.value("c", 0.0);
        if (cfg.model == ModelKind::goryachev_chaplygin && cfg.c != 0.0)
            throw error(errc::invalid_argument, "area must be zero for this model");
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            SweepGrid grid;
            grid.kx_min = g.at("k_sq_min").get<double>();
            grid.kx_max = g.at("k_sq_max").get<double>();
            grid.h_min = g.at("h_min").get<double>();
            grid.h_max = g.at("h_max").get<double>();
            grid.nx = g.at("nx").get<int>();
            grid.ny = g.at("ny").get<int>();
            if (grid.nx < 1 || grid.ny < 1)
                throw error(errc::invalid_argument, "grid must have nx >= 1 and ny >= 1");
            cfg.grid = grid;
        }
        if (j.contains("polyline")) {
            const auto& p = j.at("polyline");
            SweepPolyline pl;
            for (const auto& w : p.at("waypoints"))
                pl.waypoints.push_back({w.at(0).get<double>(), w.at(1).get<double>()});
            pl.samples = p.at("samples").get<int>();
            if (pl.waypoints.size() < 2)
                throw error(errc::invalid_argument, "polyline needs at least two waypoints");
            if (pl.samples < 2)
                throw error(errc::invalid_argument, "polyline needs at least two samples");
            cfg.polyline = pl;
        }
        if (bool(cfg.grid) == bool(cfg.polyline))
            throw error(errc::invalid_argument, "config needs exactly one of grid or polyline");
        cfg.t0 = j.value("t0", 500.0);
        cfg.threshold = j.value("threshold", 0.0005);
        if (cfg.threshold <= 0) throw error(errc::invalid_argument, "threshold must be positive");
        if (cfg.t0 <= 0) throw error(errc::invalid_argument, "t0 must be positive");
        cfg.seed = j.value("seed", uint64_t(1));
        cfg.out = j.value("out", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw error(errc::invalid_argument, std::string("bad config field: ") + e.what());
    }
    return cfg;
}

std::string sweep_config_hash(const SweepConfig& cfg) {
    uint64_t h = fnv1a(config_canonical_json(cfg).dump());
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

std::vector<std::array<double, 2>> sweep_points(const SweepConfig& cfg) {
    std::vector<std::array<double, 2>> pts;
    if (cfg.grid) {
        const SweepGrid& g = *cfg.grid;
        for (int iy = 0; iy < g.ny; ++iy) {
            double h = g.ny == 1 ? g.h_min : g.h_min + (g.h_max - g.h_min) * iy / (g.ny - 1);
            for (int ix = 0; ix < g.nx; ++ix) {
                double kx =
                    g.nx == 1 ? g.kx_min : g.kx_min + (g.kx_max - g.kx_min) * ix / (g.nx - 1);
                pts.push_back({kx, h});
            }
        }
        return pts;
    }
    if (!cfg.polyline) throw error(errc::invalid_argument, "config has no grid or polyline");
    const SweepPolyline& p = *cfg.polyline;
    std::vector<double> cum{0.0};
    for (size_t i = 1; i < p.waypoints.size(); ++i) {
        double dx = p.waypoints[i][0] - p.waypoints[i - 1][0];
        double dh = p.waypoints[i][1] - p.waypoints[i - 1][1];
        cum.push_back(cum.back() + std::hypot(dx, dh));
    }
    double total = cum.back();
    if (total <= 0) throw error(errc::invalid_argument, "polyline has zero length");
    for (int i = 0; i < p.samples; ++i) {
        double s = total * i / (p.samples - 1);
        size_t seg = 1;
        while (seg + 1 < cum.size() && cum[seg] < s) ++seg;
        double w = (s - cum[seg - 1]) / (cum[seg] - cum[seg - 1]);
        pts.push_back({p.waypoints[seg - 1][0] + w * (p.waypoints[seg][0] - p.waypoints[seg - 1][0]),
                       p.waypoints[seg - 1][1] + w * (p.waypoints[seg][1] - p.waypoints[seg - 1][1])});
    }
    return pts;
}

namespace {

struct Persist {
    fs::path dir, partial, manifest, final_csv;
    std::string hash;
    int64_t total = 0;
    std::set<int64_t> completed;
    std::ofstream append;

    void write_manifest() {
        nlohmann::json j;
        j["config_hash"] = hash;
        j["total"] = total;
        j["completed"] = completed;
        atomic_write(manifest, j.dump());
    }
};

SweepRow parse_partial_row(const std::string& line) {
    auto f = split_csv(line);
    if (f.size() != 10) throw error(errc::io, "malformed partial row: " + line);
    SweepRow r;
    r.point_index = std::stoll(f[0]);
    r.kx = std::strtod(f[1].c_str(), nullptr);
    r.h = std::strtod(f[2].c_str(), nullptr);
    r.c = std::strtod(f[3].c_str(), nullptr);
    r.torus_id = std::stoi(f[4]);
    r.lambda = std::strtod(f[5].c_str(), nullptr);
    r.converged = f[6] == "1";
    r.horizon = std::strtod(f[7].c_str(), nullptr);
    r.residual_sup = std::strtod(f[8].c_str(), nullptr);
    r.status = f[9];
    return r;
}

} // namespace

SweepResult run_sweep(const SweepConfig& cfg, int n_threads) {
    std::vector<std::array<double, 2>> pts = sweep_points(cfg);
    const int64_t n = int64_t(pts.size());

    std::vector<std::vector<SweepRow>> per_point(n);
    std::vector<char> done(n, 0);

    std::optional<Persist> ps;
    if (!cfg.out.empty()) {
        ps.emplace();
        ps->dir = cfg.out;
        ps->partial = ps->dir / "rows.partial.csv";
        ps->manifest = ps->dir / "manifest.json";
        ps->final_csv = ps->dir / "rows.csv";
        ps->hash = sweep_config_hash(cfg);
        ps->total = n;
        fs::create_directories(ps->dir);

        bool resumed = false;
        if (fs::exists(ps->manifest) && fs::exists(ps->partial)) {
            try {
                nlohmann::json mj = nlohmann::json::parse(read_file(ps->manifest));
                if (mj.at("config_hash").get<std::string>() == ps->hash &&
                    mj.at("total").get<int64_t>() == n) {
                    for (int64_t i : mj.at("completed").get<std::vector<int64_t>>())
                        if (i >= 0 && i < n) ps->completed.insert(i);
                    std::ifstream pf(ps->partial);
                    std::string line;
                    std::getline(pf, line); // header
                    while (std::getline(pf, line)) {
                        if (line.empty()) continue;
                        try {
                            SweepRow r = parse_partial_row(line);
                            if (ps->completed.count(r.point_index))
                                per_point[r.point_index].push_back(r);
                        } catch (...) {
                            // torn tail line from a killed run; its point is not
                            // in the manifest, so dropping it is safe
                        }
                    }
                    resumed = true;
                }
            } catch (...) {
                ps->completed.clear();
                for (auto& v : per_point) v.clear();
            }
        }
        // rewrite the partial so it holds exactly the completed points; every
        // point yields at least one row, so an empty completed point is stale
        std::string body = kPartialHeader;
        for (int64_t i = 0; i < n; ++i) {
            if (!ps->completed.count(i)) continue;
            if (per_point[i].empty()) {
                ps->completed.erase(i);
                continue;
            }
            done[i] = 1;
            for (const SweepRow& r : per_point[i])
                body += std::to_string(r.point_index) + "," + row_fields_csv(r) + "\n";
        }
        atomic_write(ps->partial, body);
        ps->write_manifest();
        ps->append.open(ps->partial, std::ios::app | std::ios::binary);
        if (!ps->append) throw error(errc::io, "cannot append to " + ps->partial.string());
        (void)resumed;
    }

    std::mutex mtx;
    parallel_for(resolve_threads(n_threads), n, [&](int64_t i) {
        if (done[i]) return;
        std::vector<SweepRow> rows = sweep_point(cfg, i, pts[i][0], pts[i][1]);
        std::lock_guard<std::mutex> lk(mtx);
        per_point[i] = std::move(rows);
        if (ps) {
            for (const SweepRow& r : per_point[i])
                ps->append << r.point_index << ',' << row_fields_csv(r) << '\n';
            ps->append.flush();
            ps->completed.insert(i);
            ps->write_manifest();
        }
    });

    SweepResult res;
    res.n_points = n;
    for (int64_t i = 0; i < n; ++i)
        for (const SweepRow& r : per_point[i]) res.rows.push_back(r);
    std::stable_sort(res.rows.begin(), res.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.point_index != b.point_index) return a.point_index < b.point_index;
        return a.torus_id < b.torus_id;
    });
    if (ps) atomic_write(ps->final_csv, sweep_rows_csv(res));
    return res;
}

std::string sweep_rows_csv(const SweepResult& res) {
    std::string out = kFinalHeader;
    for (const SweepRow& r : res.rows) out += row_fields_csv(r) + "\n";
    return out;
}

SectionReport emit_section(const SweepConfig& cfg, int n_threads) {
    if (!cfg.polyline) throw error(errc::invalid_argument, "section needs a polyline config");
    SectionReport rep;
    rep.sweep = run_sweep(cfg, n_threads);

    std::vector<std::array<double, 2>> pts = sweep_points(cfg);
    const int64_t n = int64_t(pts.size());
    rep.arc.resize(n, 0.0);
    for (int64_t i = 1; i < n; ++i)
        rep.arc[i] = rep.arc[i - 1] +
                     std::hypot(pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1]);

    // |lambda| families per sample, ok rows only
    std::vector<std::vector<double>> fam(n);
    for (const SweepRow& r : rep.sweep.rows)
        if (r.status == "ok") fam[r.point_index].push_back(std::fabs(r.lambda));
    for (auto& f : fam) std::sort(f.begin(), f.end());

    auto match_dist = [](const std::vector<double>& a, const std::vector<double>& b) {
        const std::vector<double>& small = a.size() <= b.size() ? a : b;
        const std::vector<double>& big = a.size() <= b.size() ? b : a;
        std::vector<int> idx(big.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = int(i);
        double best = 1e300;
        do {
            double worst = 0;
            for (size_t i = 0; i < small.size(); ++i)
                worst = std::max(worst, std::fabs(small[i] - big[idx[i]]));
            best = std::min(best, worst);
        } while (std::next_permutation(idx.begin(), idx.end()));
        return best;
    };

    std::vector<int64_t> alive;
    for (int64_t i = 0; i < n; ++i)
        if (!fam[i].empty()) alive.push_back(i);

    std::vector<double> ds;
    for (size_t t = 0; t + 1 < alive.size(); ++t) {
        SectionGap g;
        g.i = int(alive[t]);
        g.j = int(alive[t + 1]);
        g.d = match_dist(fam[g.i], fam[g.j]);
        ds.push_back(g.d);
        rep.gaps.push_back(g);
    }
    if (!ds.empty()) {
        std::sort(ds.begin(), ds.end());
        size_t m = ds.size();
        rep.median_d = m % 2 ? ds[m / 2] : 0.5 * (ds[m / 2 - 1] + ds[m / 2]);
    }
    for (SectionGap& g : rep.gaps) {
        if (rep.median_d <= 0) continue;
        g.ratio = g.d / rep.median_d;
        if (g.ratio > 10.0) {
            g.jump = true;
            ++rep.n_jumps;
        }
    }
    return rep;
}

std::string section_report_json(const SectionReport& rep) {
    nlohmann::json j;
    nlohmann::json pts = nlohmann::json::array();
    std::vector<std::vector<double>> fam(rep.arc.size());
    std::vector<std::array<double, 2>> coord(rep.arc.size(), {0, 0});
    for (const SweepRow& r : rep.sweep.rows) {
        coord[r.point_index] = {r.kx, r.h};
        if (r.status == "ok") fam[r.point_index].push_back(r.lambda);
    }
    for (size_t i = 0; i < rep.arc.size(); ++i) {
        pts.push_back({{"arc", rep.arc[i]},
                       {"k_sq", coord[i][0]},
                       {"h", coord[i][1]},
                       {"lambdas", fam[i]}});
    }
    j["points"] = pts;
    nlohmann::json gaps = nlohmann::json::array();
    for (const SectionGap& g : rep.gaps)
        gaps.push_back({{"i", g.i}, {"j", g.j}, {"d", g.d}, {"ratio", g.ratio}, {"jump", g.jump}});
    j["gaps"] = gaps;
    j["median_d"] = rep.median_d;
    j["n_jumps"] = rep.n_jumps;
    return j.dump(2);
}

} // namespace precess
