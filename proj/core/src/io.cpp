#include "condex/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace condex {

namespace {

using nlohmann::json;

json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("not valid JSON: ") + e.what());
    }
}

std::vector<double> number_array(const json& arr, const std::string& what) {
    if (!arr.is_array()) throw std::invalid_argument(what + " must be an array");
    std::vector<double> out;
    out.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number())
            throw std::invalid_argument(what + "[" + std::to_string(i) + "] is not a number");
        out.push_back(arr[i].get<double>());
    }
    return out;
}

std::vector<int> int_array(const json& arr, const std::string& what) {
    if (!arr.is_array()) throw std::invalid_argument(what + " must be an array");
    std::vector<int> out;
    out.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number_integer())
            throw std::invalid_argument(what + "[" + std::to_string(i) + "] is not an integer");
        out.push_back(arr[i].get<int>());
    }
    return out;
}

}  // namespace

SpaceFile parse_space(const std::string& text) {
    const json root = parse_text(text);
    if (!root.is_object()) throw std::invalid_argument("top level must be a JSON object");
    if (root.contains("schema") && root["schema"] != json("1"))
        throw std::invalid_argument("unsupported schema " + root["schema"].dump() +
                                    ", expected \"1\"");
    if (!root.contains("weights")) throw std::invalid_argument("missing \"weights\"");

    SpaceFile f;
    try {
        f.space = std::make_shared<const ProbSpace>(number_array(root["weights"], "weights"));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("weights: ") + e.what());
    }

    if (root.contains("fields")) {
        if (!root["fields"].is_object())
            throw std::invalid_argument("\"fields\" must be an object");
        for (const auto& [name, val] : root["fields"].items()) {
            if (!val.is_array())
                throw std::invalid_argument("field \"" + name + "\" must be an array of blocks");
            std::vector<Block> blocks;
            for (std::size_t b = 0; b < val.size(); ++b)
                blocks.push_back(int_array(val[b], "field \"" + name + "\" block " +
                                                       std::to_string(b)));
            try {
                f.fields.emplace(name, SigmaField(f.space->atom_count(), std::move(blocks)));
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument("field \"" + name + "\": " + e.what());
            }
        }
    }
    if (root.contains("rvs")) {
        if (!root["rvs"].is_object()) throw std::invalid_argument("\"rvs\" must be an object");
        for (const auto& [name, val] : root["rvs"].items()) {
            try {
                f.rvs.emplace(name, RandomVar(f.space, number_array(val, "rv \"" + name + "\"")));
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument(std::string("rv \"") + name + "\": " + e.what());
            }
        }
    }
    return f;
}

SpaceFile load_space(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_space(buf.str());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

std::string space_to_json(const SpaceFile& f) {
    if (!f.space) throw std::invalid_argument("space_to_json: null space");
    json root;
    root["schema"] = "1";
    root["weights"] = f.space->weights();
    if (!f.fields.empty()) {
        json fields = json::object();
        for (const auto& [name, g] : f.fields) fields[name] = g.blocks();
        root["fields"] = std::move(fields);
    }
    if (!f.rvs.empty()) {
        json rvs = json::object();
        for (const auto& [name, x] : f.rvs) rvs[name] = x.values();
        root["rvs"] = std::move(rvs);
    }
    return root.dump(2) + "\n";
}

void save_space(const SpaceFile& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << space_to_json(f);
    if (!out) throw std::runtime_error("failed writing " + path);
}

Schedule parse_schedule(const std::string& text) {
    const json root = parse_text(text);
    if (!root.is_object()) throw std::invalid_argument("schedule must be a JSON object");
    if (!root.contains("kind") || !root["kind"].is_string())
        throw std::invalid_argument("schedule needs a string \"kind\"");
    const std::string kind = root["kind"].get<std::string>();

    auto need_int = [&](const char* key) {
        if (!root.contains(key) || !root[key].is_number_integer())
            throw std::invalid_argument("schedule kind \"" + kind + "\" needs integer \"" +
                                        key + "\"");
    };
    if (kind == "periodic") {
        if (!root.contains("pattern"))
            throw std::invalid_argument("periodic schedule needs \"pattern\"");
        return Schedule::periodic(int_array(root["pattern"], "pattern"));
    }
    if (kind == "explicit") {
        if (!root.contains("list"))
            throw std::invalid_argument("explicit schedule needs \"list\"");
        return Schedule::explicit_list(int_array(root["list"], "list"));
    }
    if (kind == "random" || kind == "rounds") {
        need_int("k");
        need_int("seed");
        const int k = root["k"].get<int>();
        const std::uint64_t seed = root["seed"].get<std::uint64_t>();
        return kind == "random" ? Schedule::uniform_random(k, seed)
                                : Schedule::random_rounds(k, seed);
    }
    throw std::invalid_argument("unknown schedule kind \"" + kind + "\"");
}

std::string schedule_to_json(const Schedule& s) {
    json root;
    switch (s.kind()) {
        case Schedule::Kind::Periodic:
            root["kind"] = "periodic";
            root["pattern"] = s.pattern();
            break;
        case Schedule::Kind::Explicit:
            root["kind"] = "explicit";
            root["list"] = s.pattern();
            break;
        case Schedule::Kind::Random:
            root["kind"] = "random";
            root["k"] = s.max_index();
            root["seed"] = s.seed();
            break;
        case Schedule::Kind::Rounds:
            root["kind"] = "rounds";
            root["k"] = s.max_index();
            root["seed"] = s.seed();
            break;
    }
    return root.dump() + "\n";
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace condex
