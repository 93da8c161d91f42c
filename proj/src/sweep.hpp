#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "models.hpp"

namespace precess {

struct SweepGrid {
    double kx_min = 0, kx_max = 1;
    double h_min = 0, h_max = 1;
    int nx = 1, ny = 1;
};

struct SweepPolyline {
    std::vector<std::array<double, 2>> waypoints; // (kx, h)
    int samples = 2;
};

// kx is the model's invariant coordinate: the squared invariant for
// Kovalevskaya, the signed cubic invariant for Goryachev-Chaplygin.
struct SweepConfig {
    ModelKind model = ModelKind::kovalevskaya;
    double c = 0.0;
    std::optional<SweepGrid> grid;
    std::optional<SweepPolyline> polyline;
    double t0 = 500.0;
    double threshold = 0.0005;
    uint64_t seed = 1;
    std::string out; // persistence directory; empty runs in memory only
};

SweepConfig sweep_config_from_json(const std::string& text);
std::string sweep_config_hash(const SweepConfig& cfg); // 16 hex digits

struct SweepRow {
    int64_t point_index = 0;
    double kx = 0, h = 0, c = 0;
    int torus_id = -1;
    double lambda = 0;
    bool converged = false;
    double horizon = 0;
    double residual_sup = 0;
    std::string status; // ok | inaccessible | on-singular-curve | unconverged | integration-failed
};

struct SweepResult {
    std::vector<SweepRow> rows; // canonical order: (point_index, torus_id)
    int64_t n_points = 0;
};

// Grid or polyline points in index order.
std::vector<std::array<double, 2>> sweep_points(const SweepConfig& cfg);

// Runs the sweep. Per-point work is pure given the config seed, so any worker
// count produces identical rows. With an output directory set, rows stream to
// rows.partial.csv with a manifest for resume, and the canonical rows.csv is
// rewritten at the end.
SweepResult run_sweep(const SweepConfig& cfg, int n_threads = 0);

std::string sweep_rows_csv(const SweepResult& res);

struct SectionGap {
    int i = 0; // left sample of the gap
    int j = 0; // right sample; j > i+1 when failed samples in between were bridged
    double d = 0;
    double ratio = 0;
    bool jump = false;
};

struct SectionReport {
    SweepResult sweep;
    std::vector<double> arc; // arc-length position per sample
    std::vector<SectionGap> gaps;
    double median_d = 0;
    int n_jumps = 0;
};

// Sweeps the polyline and flags discontinuities. Gaps run between consecutive
// samples that produced at least one estimate, bridging over failed samples;
// per gap, the |lambda| families of the two sides are matched injectively
// minimizing the largest difference d, and a gap jumps when d exceeds 10x the
// median d over all gaps.
SectionReport emit_section(const SweepConfig& cfg, int n_threads = 0);

std::string section_report_json(const SectionReport& rep);

} // namespace precess
