#pragma once

#include <string>
#include <vector>

#include "integrator.hpp"

namespace precess {

struct SelftestEntry {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct SelftestReport {
    std::vector<SelftestEntry> entries;
    int n_failed = 0;
};

// Fast property subset (well under five minutes). The integrator config feeds
// the drift and reversibility checks, so a corrupted tolerance fails visibly.
SelftestReport run_selftest(const IntegratorConfig& cfg = {});

std::string selftest_text(const SelftestReport& rep);
std::string selftest_json(const SelftestReport& rep);

} // namespace precess
