#pragma once

// JSON wire format for spaces, fields, variables, and schedules:
//   {"schema": "1", "weights": [...],
//    "fields": {"name": [[0,1],[2]], ...},
//    "rvs": {"name": [v0, v1, ...], ...}}
// "schema" may be omitted; any value other than "1" is rejected. Errors name
// the first offending entry.

#include <map>
#include <memory>
#include <string>

#include "condex/operators.hpp"
#include "condex/prob_space.hpp"

namespace condex {

struct SpaceFile {
    std::shared_ptr<const ProbSpace> space;
    std::map<std::string, SigmaField> fields;
    std::map<std::string, RandomVar> rvs;
};

SpaceFile parse_space(const std::string& text);
SpaceFile load_space(const std::string& path);

std::string space_to_json(const SpaceFile& f);
void save_space(const SpaceFile& f, const std::string& path);

// {"kind": "periodic", "pattern": [...]} | {"kind": "explicit", "list": [...]}
// | {"kind": "random", "k": n, "seed": n} | {"kind": "rounds", "k": n, "seed": n}
Schedule parse_schedule(const std::string& text);
std::string schedule_to_json(const Schedule& s);

// Shortest decimal digits that round-trip the exact double.
std::string format_double(double v);

}  // namespace condex
