#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "models.hpp"

namespace precess {

struct LevelSample {
    State6 state{};
    double weight = 0.0;
};

// Builds the zero-area level-set sample at sphere point gamma (unit) and
// ellipse angle phi for the given general top; the weight is the co-area
// correction making weighted sums approximate the invariant-measure integral.
// Empty ellipse (energy at or below the potential) is a domain error.
LevelSample level_sample_at(const Model& m, double h, const std::array<double, 3>& gamma,
                            double phi);

// n weighted samples of the c = 0 energy-h level set, deterministic per seed.
std::vector<LevelSample> sample_levelset(const Model& m, double h, int n, uint64_t seed);

struct ErgodicResult {
    double h = 0.0;
    int n = 0;
    double horizon = 0.0;
    double mean = 0.0;
    double stderr_ = 0.0;
    bool has_stderr = false;
    int failures = 0;
};

// Weighted Monte-Carlo average of finite-horizon time averages of the
// precession rate over the level set. Per-sample integrations are independent;
// n_threads <= 0 defers to PRECESS_THREADS (default serial). More than 5%
// failed integrations is a sampling error.
ErgodicResult main_motion_average(const Model& m, double h, int n, double horizon,
                                  uint64_t seed, int n_threads = 0);

std::string ergodic_json(const ErgodicResult& r);

} // namespace precess
