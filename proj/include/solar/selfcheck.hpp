#pragma once

#include <string>
#include <vector>

namespace solar {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Fast invariant checks over the library: identity-at-init, attention row
/// sums, unit norms, gradient spot checks, serialization roundtrips and
/// metric sanity. Deterministic for a given seed.
std::vector<CheckResult> run_self_check(unsigned long long seed = 0);

}  // namespace solar
