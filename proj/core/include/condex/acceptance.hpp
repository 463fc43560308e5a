#pragma once

// The acceptance battery: end-to-end checks that exercise every module
// against frozen seeds and tolerances. Each criterion reports one line.

#include <iosfwd>
#include <string>
#include <vector>

namespace condex {

struct CriterionResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Runs all criteria in order; when log is given, prints one
// "[PASS]"/"[FAIL]" line per criterion as it completes.
std::vector<CriterionResult> run_acceptance(std::ostream* log = nullptr);

}  // namespace condex
