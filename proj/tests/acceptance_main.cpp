#include <iostream>
#include <vector>

#include "condex/acceptance.hpp"

int main() {
    const std::vector<condex::CriterionResult> results = condex::run_acceptance(&std::cout);
    bool all = true;
    for (const auto& r : results) all = all && r.pass;
    std::cout << (all ? "ACCEPTANCE: all criteria passed" : "ACCEPTANCE: failures present")
              << "\n";
    return all ? 0 : 1;
}
