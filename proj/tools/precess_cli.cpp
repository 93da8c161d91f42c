#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "precess/precess.h"

using nlohmann::json;

namespace {

// exit codes: 0 ok, 1 usage, 2 computation error, 3 selftest failure
struct CliFailure {
    int exit_code;
    std::string message;
};

[[noreturn]] void fail_usage(const std::string& msg) { throw CliFailure{1, msg}; }

void check(int rc) {
    if (rc == PRECESS_OK) return;
    int code = rc == PRECESS_INVALID_ARGUMENT ? 1 : 2;
    throw CliFailure{code, precess_last_error()};
}

struct ModelDel {
    void operator()(precess_model* m) const { precess_model_free(m); }
};
using ModelPtr = std::unique_ptr<precess_model, ModelDel>;

struct TrajDel {
    void operator()(precess_traj* t) const { precess_traj_free(t); }
};
using TrajPtr = std::unique_ptr<precess_traj, TrajDel>;

struct TorusDel {
    void operator()(precess_torus_count* tc) const { precess_torus_count_free(tc); }
};
using TorusPtr = std::unique_ptr<precess_torus_count, TorusDel>;

struct CStr {
    char* p = nullptr;
    ~CStr() { precess_free(p); }
    std::string str() const { return p ? std::string(p) : std::string(); }
};

struct Opts {
    std::string model = "kovalevskaya";
    std::string config;
    std::string out;
    std::string format;
    uint64_t seed = 1;
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail_usage("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json load_config(const std::string& path, bool required) {
    if (path.empty()) {
        if (required) fail_usage("this subcommand needs --config");
        return json::object();
    }
    try {
        return json::parse(read_file(path));
    } catch (const CliFailure&) {
        throw;
    } catch (const std::exception& e) {
        fail_usage(std::string("config parse: ") + e.what());
    }
}

double need_number(const json& j, const char* key, const char* where) {
    if (!j.contains(key) || !j.at(key).is_number())
        fail_usage(std::string(where) + " needs numeric key '" + key + "'");
    return j.at(key).get<double>();
}

ModelPtr make_model(const std::string& name, const json& cfg) {
    if (name == "kovalevskaya") return ModelPtr(precess_model_kovalevskaya());
    if (name == "goryachev-chaplygin") return ModelPtr(precess_model_goryachev_chaplygin());
    if (name == "general") {
        if (!cfg.contains("body"))
            fail_usage("general model needs config key body {A,B,C,l1,l2,l3,mu}");
        const json& b = cfg.at("body");
        precess_model* m = precess_model_general(
            need_number(b, "A", "body"), need_number(b, "B", "body"),
            need_number(b, "C", "body"), need_number(b, "l1", "body"),
            need_number(b, "l2", "body"), need_number(b, "l3", "body"),
            need_number(b, "mu", "body"));
        if (!m) fail_usage(precess_last_error());
        return ModelPtr(m);
    }
    fail_usage("unknown model '" + name +
               "' (kovalevskaya, goryachev-chaplygin, general)");
}

precess_integrator_config icfg_from(const json& cfg) {
    precess_integrator_config ic;
    precess_integrator_config_default(&ic);
    if (!cfg.contains("integrator")) return ic;
    const json& j = cfg.at("integrator");
    if (j.contains("rel_tol")) ic.rel_tol = j.at("rel_tol").get<double>();
    if (j.contains("abs_tol")) ic.abs_tol = j.at("abs_tol").get<double>();
    if (j.contains("max_step")) ic.max_step = j.at("max_step").get<double>();
    if (j.contains("sample_dt")) ic.sample_dt = j.at("sample_dt").get<double>();
    if (j.contains("renormalize_gamma"))
        ic.renormalize_gamma = j.at("renormalize_gamma").get<bool>() ? 1 : 0;
    return ic;
}

void read_targets(const json& t, double& h, double& k, double& c) {
    h = need_number(t, "h", "targets");
    k = 0.0;
    if (t.contains("k_sq"))
        k = t.at("k_sq").get<double>();
    else if (t.contains("k"))
        k = t.at("k").get<double>();
    c = t.contains("c") ? t.at("c").get<double>() : 0.0;
}

void initial_state(const precess_model* m, const json& cfg, uint64_t seed, double s[6]) {
    if (cfg.contains("state")) {
        const json& j = cfg.at("state");
        const char* keys[6] = {"p", "q", "r", "g1", "g2", "g3"};
        for (int i = 0; i < 6; ++i) s[i] = need_number(j, keys[i], "state");
        return;
    }
    if (cfg.contains("targets")) {
        double h, k, c;
        read_targets(cfg.at("targets"), h, k, c);
        check(precess_find_state(m, h, k, c, seed, s));
        return;
    }
    fail_usage("config needs either state {p,q,r,g1,g2,g3} or targets {h, k_sq|k, c}");
}

void write_output(const std::string& content, const std::string& out) {
    if (out.empty()) {
        std::fwrite(content.data(), 1, content.size(), stdout);
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) fail_usage("cannot write " + out);
    f << content;
    if (!f) throw CliFailure{2, "write failed: " + out};
}

void expect_format(const Opts& o, const char* only) {
    if (!o.format.empty() && o.format != only)
        fail_usage(std::string("this subcommand emits ") + only);
}

TrajPtr integrate_psi(const precess_model* m, const json& cfg, uint64_t seed, bool want_psi) {
    double s0[6];
    initial_state(m, cfg, seed, s0);
    double t_end = need_number(cfg, "t_end", "config");
    precess_integrator_config ic = icfg_from(cfg);
    precess_traj* raw = nullptr;
    check(precess_integrate(m, s0, t_end, &ic, &raw));
    TrajPtr t(raw);
    if (want_psi) check(precess_traj_accumulate_psi(t.get()));
    return t;
}

int cmd_simulate(const Opts& o) {
    expect_format(o, "csv");
    json cfg = load_config(o.config, true);
    ModelPtr m = make_model(o.model, cfg);
    TrajPtr t = integrate_psi(m.get(), cfg, o.seed, true);
    CStr csv;
    check(precess_traj_csv(t.get(), &csv.p));
    write_output(csv.str(), o.out);
    return 0;
}

int cmd_lambda(const Opts& o) {
    expect_format(o, "json");
    json cfg = load_config(o.config, true);
    ModelPtr m = make_model(o.model, cfg);
    double s0[6];
    initial_state(m.get(), cfg, o.seed, s0);
    precess_lambda_opts lo;
    precess_lambda_opts_default(&lo);
    if (cfg.contains("lambda")) {
        const json& j = cfg.at("lambda");
        if (j.contains("t0")) lo.t0 = j.at("t0").get<double>();
        if (j.contains("threshold")) lo.threshold = j.at("threshold").get<double>();
        if (j.contains("abs_floor")) lo.abs_floor = j.at("abs_floor").get<double>();
        if (j.contains("max_doublings")) lo.max_doublings = j.at("max_doublings").get<int>();
    }
    precess_integrator_config ic = icfg_from(cfg);
    precess_lambda_result r;
    check(precess_lambda_converged(m.get(), s0, &lo, &ic, &r));
    CStr j;
    check(precess_lambda_json(&r, &j.p));
    write_output(j.str() + "\n", o.out);
    return 0;
}

int cmd_sweep(const Opts& o) {
    expect_format(o, "csv");
    if (o.config.empty()) fail_usage("sweep needs --config");
    std::string text = read_file(o.config);
    CStr csv;
    check(precess_sweep_run(text.c_str(), o.out.empty() ? nullptr : o.out.c_str(), 0, &csv.p));
    if (o.out.empty()) write_output(csv.str(), "");
    return 0;
}

int cmd_section(const Opts& o) {
    expect_format(o, "json");
    if (o.config.empty()) fail_usage("section needs --config");
    std::string text = read_file(o.config);
    CStr rep;
    check(precess_section_run(text.c_str(), o.out.empty() ? nullptr : o.out.c_str(), 0, &rep.p));
    if (o.out.empty())
        write_output(rep.str() + "\n", "");
    else
        write_output(rep.str() + "\n",
                     (std::filesystem::path(o.out) / "section.json").string());
    return 0;
}

int cmd_diagram(const Opts& o) {
    expect_format(o, "json");
    json cfg = load_config(o.config, false);
    int kind;
    if (o.model == "kovalevskaya")
        kind = 0;
    else if (o.model == "goryachev-chaplygin")
        kind = 1;
    else
        fail_usage("diagram covers the two integrable models");
    double c = cfg.contains("c") ? cfg.at("c").get<double>() : 0.0;
    CStr j;
    check(precess_diagram_json(kind, c, &j.p));
    write_output(j.str() + "\n", o.out);
    return 0;
}

int cmd_trace_sphere(const Opts& o) {
    std::string fmt = o.format.empty() ? "csv" : o.format;
    if (fmt != "csv" && fmt != "svg") fail_usage("trace-sphere emits csv or svg");
    json cfg = load_config(o.config, true);
    ModelPtr m = make_model(o.model, cfg);
    TrajPtr t = integrate_psi(m.get(), cfg, o.seed, true);
    CStr s;
    if (fmt == "csv")
        check(precess_trace_sphere_csv(t.get(), &s.p));
    else
        check(precess_trace_sphere_svg(t.get(), &s.p));
    write_output(s.str(), o.out);
    return 0;
}

int cmd_project_rg3(const Opts& o) {
    std::string fmt = o.format.empty() ? "csv" : o.format;
    if (fmt != "csv" && fmt != "svg") fail_usage("project-rg3 emits csv or svg");
    json cfg = load_config(o.config, true);
    ModelPtr m = make_model(o.model, cfg);
    std::string mode = cfg.contains("mode") ? cfg.at("mode").get<std::string>() : "trajectory";
    if (mode == "section") {
        if (!cfg.contains("targets")) fail_usage("section mode needs targets {h, k_sq|k, c}");
        double h, k, c;
        read_targets(cfg.at("targets"), h, k, c);
        int n_seeds = cfg.contains("n_seeds") ? cfg.at("n_seeds").get<int>() : 0;
        double t_span = cfg.contains("t_span") ? cfg.at("t_span").get<double>() : 0.0;
        precess_torus_count* raw = nullptr;
        check(precess_count_tori(m.get(), h, k, c, o.seed, n_seeds, t_span, &raw));
        TorusPtr tc(raw);
        CStr s;
        if (fmt == "csv")
            check(precess_torus_points_csv(tc.get(), &s.p));
        else
            check(precess_torus_points_svg(tc.get(), &s.p));
        write_output(s.str(), o.out);
        return 0;
    }
    if (mode != "trajectory") fail_usage("mode must be trajectory or section");
    TrajPtr t = integrate_psi(m.get(), cfg, o.seed, false);
    CStr s;
    if (fmt == "csv")
        check(precess_project_rg3_csv(t.get(), &s.p));
    else
        check(precess_project_rg3_svg(t.get(), &s.p));
    write_output(s.str(), o.out);
    return 0;
}

int cmd_validate_ergodic(const Opts& o) {
    expect_format(o, "json");
    json cfg = load_config(o.config, true);
    if (o.model != "general") fail_usage("validate-ergodic needs --model general");
    ModelPtr m = make_model("general", cfg);
    double h = need_number(cfg, "h", "config");
    int n = cfg.contains("n") ? cfg.at("n").get<int>() : 200;
    double horizon = cfg.contains("horizon") ? cfg.at("horizon").get<double>() : 2000.0;
    precess_ergodic_result r;
    check(precess_main_motion_average(m.get(), h, n, horizon, o.seed, 0, &r));
    CStr j;
    check(precess_ergodic_json(&r, &j.p));
    write_output(j.str() + "\n", o.out);
    return 0;
}

int cmd_selftest(const Opts& o) {
    if (!o.format.empty() && o.format != "json" && o.format != "csv")
        fail_usage("selftest emits text or json");
    if (o.format == "csv") fail_usage("selftest emits text or json");
    json cfg = load_config(o.config, false);
    precess_integrator_config ic = icfg_from(cfg);
    CStr rep;
    int n_failed = 0;
    check(precess_selftest(&ic, o.format == "json" ? 1 : 0, &rep.p, &n_failed));
    write_output(rep.str(), o.out);
    return n_failed > 0 ? 3 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mean precession motion of heavy rigid bodies: simulation and analysis"};
    app.require_subcommand(1);

    struct SubDef {
        const char* name;
        const char* help;
        int (*run)(const Opts&);
    };
    const std::vector<SubDef> defs = {
        {"simulate", "integrate a trajectory, emit t,p,q,r,g1,g2,g3,psi CSV", cmd_simulate},
        {"lambda", "doubling-horizon mean-motion estimate as JSON", cmd_lambda},
        {"sweep", "grid or polyline sweep of converged mean motions", cmd_sweep},
        {"section", "polyline sweep plus the discontinuity report", cmd_section},
        {"diagram", "bifurcation-diagram polylines as JSON", cmd_diagram},
        {"trace-sphere", "absolute-frame trace of the symmetry axis (csv or svg)", cmd_trace_sphere},
        {"project-rg3", "(r, g3) projection of a trajectory or section (csv or svg)",
         cmd_project_rg3},
        {"validate-ergodic", "weighted level-set average of finite-horizon main motions",
         cmd_validate_ergodic},
        {"selftest", "fast built-in checks; nonzero exit on any failure", cmd_selftest},
    };

    std::vector<std::shared_ptr<Opts>> opts;
    std::vector<CLI::App*> cmds;
    for (const SubDef& d : defs) {
        auto o = std::make_shared<Opts>();
        CLI::App* c = app.add_subcommand(d.name, d.help);
        c->add_option("--model", o->model, "kovalevskaya | goryachev-chaplygin | general");
        c->add_option("--config", o->config, "JSON config file");
        c->add_option("--seed", o->seed, "RNG seed (default 1)");
        c->add_option("--out", o->out, "output file (sweep/section: output directory)");
        c->add_option("--format", o->format, "csv | json | svg")
            ->check(CLI::IsMember({"csv", "json", "svg"}));
        opts.push_back(o);
        cmds.push_back(c);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        for (size_t i = 0; i < cmds.size(); ++i)
            if (cmds[i]->parsed()) return defs[i].run(*opts[i]);
        fail_usage("no subcommand");
    } catch (const CliFailure& f) {
        std::fprintf(stderr, "error: %s\n", f.message.c_str());
        return f.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
