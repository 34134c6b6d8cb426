#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mgme {

struct PropertyTally {
    std::string name;
    int checked = 0;
    int skipped = 0;  // preconditions not met for this config
    int failed = 0;
};

struct SelftestReport {
    int configs = 0;
    std::vector<PropertyTally> properties;
    std::vector<std::string> failures;  // first few diagnostics

    bool ok() const;
};

// Randomized invariant suite: budget identity, determinism, no-overshoot
// under the good event, context commitment, adaptive-weight pessimism and
// monotonicity, regret nonnegativity.
SelftestReport run_selftest(int configs = 1000, std::uint64_t seed = 20240601);

void print_report(std::ostream& out, const SelftestReport& report);

}  // namespace mgme
