#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "condex/io.hpp"

using namespace condex;

TEST_SUITE("io") {

TEST_CASE("space files parse into live structures") {
    const std::string text = R"({
        "schema": "1",
        "weights": [0.2, 0.3, 0.5],
        "fields": {"coarse": [[0, 1], [2]]},
        "rvs": {"x": [1.0, 2.0, 3.0]}
    })";
    const SpaceFile f = parse_space(text);
    REQUIRE(f.space->atom_count() == 3);
    CHECK(f.space->weight(1) == 0.3);
    REQUIRE(f.fields.count("coarse") == 1);
    CHECK(f.fields.at("coarse") == SigmaField(3, {{0, 1}, {2}}));
    REQUIRE(f.rvs.count("x") == 1);
    CHECK(f.rvs.at("x").value(2) == 3.0);

    // Schema is optional; anything other than "1" is rejected.
    CHECK_NOTHROW(parse_space(R"({"weights": [0.5, 0.5]})"));
    CHECK_THROWS_AS(parse_space(R"({"schema": "2", "weights": [1.0]})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_space(R"({"fields": {}})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_space("not json"), std::invalid_argument);

    // Errors carry the offending name.
    try {
        parse_space(R"({"weights": [0.5, 0.5], "rvs": {"bad": [1.0]}})");
        FAIL("expected a throw");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("bad") != std::string::npos);
    }
}

TEST_CASE("space files round trip exactly") {
    SpaceFile f;
    f.space = std::make_shared<const ProbSpace>(std::vector<double>{0.1, 1.0 / 3.0,
                                                                    1.0 - 0.1 - 1.0 / 3.0});
    f.fields.emplace("g", SigmaField(3, {{0, 2}, {1}}));
    f.rvs.emplace("x", RandomVar(f.space, {-0.0, 1e-300, 0.1 + 0.2}));

    const SpaceFile g = parse_space(space_to_json(f));
    REQUIRE(g.space->atom_count() == 3);
    for (int i = 0; i < 3; ++i) CHECK(g.space->weight(i) == f.space->weight(i));
    CHECK(g.fields.at("g") == f.fields.at("g"));
    for (int i = 0; i < 3; ++i) CHECK(g.rvs.at("x").value(i) == f.rvs.at("x").value(i));
}

TEST_CASE("schedules round trip with identical draws") {
    const char* texts[] = {
        R"({"kind": "periodic", "pattern": [2, 1, 1]})",
        R"({"kind": "explicit", "list": [1, 2, 2, 1]})",
        R"({"kind": "random", "k": 3, "seed": 12345})",
        R"({"kind": "rounds", "k": 4, "seed": 99})",
    };
    for (const char* text : texts) {
        const Schedule s = parse_schedule(text);
        const Schedule t = parse_schedule(schedule_to_json(s));
        const long limit = s.kind() == Schedule::Kind::Explicit ? s.length() : 100;
        for (long n = 1; n <= limit; ++n) CHECK(s.at(n) == t.at(n));
    }
    CHECK_THROWS_AS(parse_schedule(R"({"kind": "weekly"})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_schedule(R"({"kind": "random", "k": 0, "seed": 1})"),
                    std::invalid_argument);
}

TEST_CASE("doubles print with shortest exact digits") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 1e308, -0.0, 2.5, 0.30000000000000004}) {
        const std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.0) == "2");
}

TEST_CASE("files survive a save and load") {
    SpaceFile f;
    f.space = std::make_shared<const ProbSpace>(std::vector<double>{0.25, 0.75});
    f.rvs.emplace("y", RandomVar(f.space, {3.5, -1.25}));
    const std::string path = "io_roundtrip_tmp.json";
    save_space(f, path);
    const SpaceFile g = load_space(path);
    CHECK(g.space->weight(0) == 0.25);
    CHECK(g.rvs.at("y").value(1) == -1.25);
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_space("no_such_file_anywhere.json"), std::runtime_error);
}

}  // TEST_SUITE
