// Command-line front end over the library. Each subcommand runs one
// experiment, writes its CSV/JSON artifacts, and ends stdout with a one-line
// summary. Exit codes: 0 when every check passed, 1 when a check failed,
// 2 on bad usage, bad config, or bad input files.
//
// Relative output paths land in $CONDEX_OUT_DIR when that is set. --tol
// overrides every pass/fail tolerance. All numbers in artifacts are printed
// in shortest round-trip form, so a rerun with the same inputs is
// byte-identical.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "condex/acceptance.hpp"
#include "condex/atomic_ext.hpp"
#include "condex/compat.hpp"
#include "condex/gaussian.hpp"
#include "condex/io.hpp"
#include "condex/operators.hpp"
#include "condex/prob_space.hpp"
#include "condex/sampler.hpp"

namespace {

using condex::format_double;
using nlohmann::json;
namespace fs = std::filesystem;

std::optional<double> g_tol;  // --tol; wins over config and built-in defaults

double pick_tol(double fallback) { return g_tol ? *g_tol : fallback; }

const char* yes_no(bool b) { return b ? "yes" : "no"; }

fs::path out_path(const std::string& name) {
    fs::path p(name);
    const char* dir = std::getenv("CONDEX_OUT_DIR");
    if (dir && *dir && p.is_relative()) p = fs::path(dir) / p;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out.flush()) throw std::runtime_error("failed writing " + path.string());
}

// Every numeric artifact cell goes through here: a NaN or Inf is a failed
// experiment, never something to write out.
std::string num_cell(double v, const std::string& column) {
    if (!std::isfinite(v))
        throw std::logic_error("non-finite value in column " + column);
    return format_double(v);
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": not valid JSON: " + e.what());
    }
}

const json& need(const json& cfg, const std::string& key) {
    if (!cfg.is_object() || !cfg.contains(key))
        throw std::invalid_argument("config is missing \"" + key + "\"");
    return cfg.at(key);
}

std::string need_string(const json& cfg, const std::string& key) {
    const json& v = need(cfg, key);
    if (!v.is_string()) throw std::invalid_argument("\"" + key + "\" must be a string");
    return v.get<std::string>();
}

long need_int(const json& cfg, const std::string& key) {
    const json& v = need(cfg, key);
    if (!v.is_number_integer()) throw std::invalid_argument("\"" + key + "\" must be an integer");
    return v.get<long>();
}

double opt_num(const json& cfg, const std::string& key, double fallback) {
    if (!cfg.contains(key)) return fallback;
    const json& v = cfg.at(key);
    if (!v.is_number()) throw std::invalid_argument("\"" + key + "\" must be a number");
    return v.get<double>();
}

long opt_int(const json& cfg, const std::string& key, long fallback) {
    if (!cfg.contains(key)) return fallback;
    const json& v = cfg.at(key);
    if (!v.is_number_integer()) throw std::invalid_argument("\"" + key + "\" must be an integer");
    return v.get<long>();
}

std::string opt_string(const json& cfg, const std::string& key, const std::string& fallback) {
    if (!cfg.contains(key)) return fallback;
    const json& v = cfg.at(key);
    if (!v.is_string()) throw std::invalid_argument("\"" + key + "\" must be a string");
    return v.get<std::string>();
}

// File references inside a config resolve against the config's directory.
std::string sibling(const std::string& cfg_path, const std::string& ref) {
    fs::path p(ref);
    if (p.is_absolute()) return ref;
    return (fs::path(cfg_path).parent_path() / p).string();
}

const condex::RandomVar& find_rv(const condex::SpaceFile& f, const std::string& name,
                                 const std::string& path) {
    const auto it = f.rvs.find(name);
    if (it == f.rvs.end()) throw std::invalid_argument("unknown rv \"" + name + "\" in " + path);
    return it->second;
}

const condex::SigmaField& find_field(const condex::SpaceFile& f, const std::string& name,
                                     const std::string& path) {
    const auto it = f.fields.find(name);
    if (it == f.fields.end())
        throw std::invalid_argument("unknown field \"" + name + "\" in " + path);
    return it->second;
}

Eigen::VectorXd json_vector(const json& a, const std::string& what) {
    if (!a.is_array() || a.empty())
        throw std::invalid_argument(what + " must be a nonempty array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number())
            throw std::invalid_argument(what + "[" + std::to_string(i) + "] is not a number");
        v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    }
    return v;
}

Eigen::MatrixXd json_matrix(const json& a, const std::string& what) {
    if (!a.is_array() || a.empty())
        throw std::invalid_argument(what + " must be a nonempty array of rows");
    std::vector<Eigen::VectorXd> rows;
    for (std::size_t i = 0; i < a.size(); ++i) {
        rows.push_back(json_vector(a[i], what + "[" + std::to_string(i) + "]"));
        if (rows.back().size() != rows.front().size())
            throw std::invalid_argument(what + " rows differ in length");
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i];
    return m;
}

// A subspace is listed as basis vectors; an empty list is the zero subspace.
condex::Subspace json_subspace(const std::shared_ptr<const condex::GaussianSpace>& space,
                               const json& a, const std::string& what) {
    if (!a.is_array()) throw std::invalid_argument(what + " must be an array of basis vectors");
    Eigen::MatrixXd basis(space->dim(), static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Eigen::VectorXd v = json_vector(a[i], what + "[" + std::to_string(i) + "]");
        if (v.size() != space->dim())
            throw std::invalid_argument(what + "[" + std::to_string(i) + "] has length " +
                                        std::to_string(v.size()) + ", the space has dimension " +
                                        std::to_string(space->dim()));
        basis.col(static_cast<Eigen::Index>(i)) = v;
    }
    return condex::Subspace(space, basis);
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

double unit_cdf(double x) { return x <= 0.0 ? 0.0 : x >= 1.0 ? 1.0 : x; }

// ---- iterate: product of conditional expectations along a schedule ----

int run_iterate(const std::string& cfg_path) {
    const json cfg = load_json(cfg_path);
    const std::string spath = sibling(cfg_path, need_string(cfg, "space"));
    const condex::SpaceFile f = condex::load_space(spath);

    const condex::RandomVar& x0 = find_rv(f, need_string(cfg, "x0"), spath);
    const json& fnames = need(cfg, "fields");
    if (!fnames.is_array() || fnames.empty())
        throw std::invalid_argument("\"fields\" must be a nonempty array of field names");
    std::vector<condex::SigmaField> fields;
    for (const json& n : fnames) {
        if (!n.is_string()) throw std::invalid_argument("\"fields\" entries must be strings");
        fields.push_back(find_field(f, n.get<std::string>(), spath));
    }

    const condex::Schedule sched = condex::parse_schedule(need(cfg, "schedule").dump());
    if (sched.max_index() > static_cast<int>(fields.size()))
        throw std::invalid_argument("schedule index " + std::to_string(sched.max_index()) +
                                    " exceeds the " + std::to_string(fields.size()) +
                                    " listed fields");
    const long steps = need_int(cfg, "steps");

    condex::IterateOptions opt;
    opt.stop_eps = opt_num(cfg, "stop_eps", opt.stop_eps);
    opt.window = static_cast<int>(opt_int(cfg, "window", opt.window));
    opt.stop_dist = opt_num(cfg, "stop_dist", opt.stop_dist);
    const double tol = pick_tol(opt_num(cfg, "tol", 1e-10));

    const condex::RandomVar pred = condex::limit_predict(x0, fields);
    const condex::Trajectory t = condex::iterate(x0, fields, sched, steps, &pred, opt);

    std::ostringstream csv;
    csv << "step,k_n,d1,d2,dinf,dist_to_limit,m4\n";
    for (int i = 0; i < t.steps(); ++i)
        csv << (i + 1) << ',' << t.k[i] << ',' << num_cell(t.d1[i], "d1") << ','
            << num_cell(t.d2[i], "d2") << ',' << num_cell(t.dinf[i], "dinf") << ','
            << num_cell(t.dist[i], "dist_to_limit") << ',' << num_cell(t.m4[i], "m4") << '\n';
    const fs::path out = out_path(opt_string(cfg, "out", "iterate.csv"));
    write_text(out, csv.str());

    const double final_dist = t.dist.empty() ? condex::linf_dist(t.last, pred) : t.dist.back();
    const bool stopped = t.converged || t.reached_limit;
    const bool pass = stopped && final_dist <= tol;
    std::cout << "iterate: steps=" << t.steps() << " converged=" << yes_no(stopped)
              << " dist_to_limit=" << format_double(final_dist) << " wrote " << out.string()
              << " pass=" << yes_no(pass) << "\n";
    return pass ? 0 : 1;
}

// ---- meet: the limit field of a family, with an optional conditioning ----

int run_meet(const std::string& space_path, const std::vector<std::string>& field_names,
             const std::string& rv_name, const std::string& out_name) {
    const condex::SpaceFile f = condex::load_space(space_path);
    std::vector<condex::SigmaField> gs, completed;
    for (const std::string& n : field_names) {
        gs.push_back(find_field(f, n, space_path));
        completed.push_back(condex::completion(gs.back(), *f.space));
    }
    const condex::SigmaField meet = condex::sigma_meet(gs);
    const condex::SigmaField cmeet = condex::sigma_meet(completed);

    json rep;
    rep["schema"] = "1";
    rep["meet"] = meet.blocks();
    rep["completed_meet"] = cmeet.blocks();

    bool pass = true;
    double tower_dev = 0.0;
    const double tol = pick_tol(1e-12);
    if (!rv_name.empty()) {
        const condex::RandomVar& x = find_rv(f, rv_name, space_path);
        const condex::RandomVar ce = condex::cond_exp(x, cmeet);
        rep["ce"] = ce.values();
        // Conditioning preserves the mean; a violation is an arithmetic bug.
        tower_dev = std::abs(condex::expectation(ce) - condex::expectation(x));
        pass = tower_dev <= tol;
    }
    const fs::path out = out_path(out_name);
    write_text(out, rep.dump(2) + "\n");

    std::cout << "meet: blocks=" << meet.block_count()
              << " completed_blocks=" << cmeet.block_count();
    if (!rv_name.empty()) std::cout << " tower_dev=" << format_double(tower_dev);
    std::cout << " wrote " << out.string() << " pass=" << yes_no(pass) << "\n";
    return pass ? 0 : 1;
}

// ---- compat: pair and family regression reports, stock counterexamples ----

void print_compat_table(const condex::CompatReport& r, const condex::DeepUncorrReport& du,
                        double tv) {
    const auto row = [](const std::string& label, const std::string& value) {
        std::cout << "  " << std::left << std::setw(22) << label << value << "\n";
    };
    row("E(Y|X) slope a", format_double(r.a));
    row("E(Y|X) intercept c", format_double(r.c));
    row("residual Y on X", format_double(r.residual_y_on_x));
    row("E(X|Y) slope b", format_double(r.b));
    row("E(X|Y) intercept d", format_double(r.d));
    row("residual X on Y", format_double(r.residual_x_on_y));
    row("ab", format_double(r.ab));
    row("rho", format_double(r.rho));
    row("|ab - rho^2|", format_double(r.ab_rho2_dev));
    row("compatible", yes_no(r.compatible));
    row("deeply uncorrelated", yes_no(du.deeply_uncorrelated));
    row("tv gap", format_double(tv));
}

int run_compat(const std::string& space_path, const std::string& x_name,
               const std::string& y_name, const std::vector<std::string>& family_names,
               const std::string& counterexample, int disc_n, const std::string& out_name) {
    const double tol = pick_tol(1e-10);

    if (!counterexample.empty()) {
        const condex::PairInstance inst = [&] {
            if (counterexample == "disc") return condex::disc_counterexample(disc_n);
            if (counterexample == "indicator") return condex::indicator_counterexample();
            throw std::invalid_argument("unknown counterexample \"" + counterexample +
                                        "\" (disc, indicator)");
        }();
        condex::SpaceFile f;
        f.space = inst.space;
        f.rvs.insert({"x", inst.x});
        f.rvs.insert({"y", inst.y});
        const fs::path out =
            out_path(out_name.empty() ? counterexample + ".json" : out_name);
        condex::save_space(f, out.string());

        const condex::DeepUncorrReport du = condex::deep_uncorrelated(inst.x, inst.y, tol);
        const double tv = condex::tv_independence_gap(inst.x, inst.y);
        std::cout << "compat: counterexample=" << counterexample
                  << " atoms=" << inst.space->atom_count()
                  << " deeply_uncorrelated=" << yes_no(du.deeply_uncorrelated)
                  << " tv_gap=" << format_double(tv) << " wrote " << out.string()
                  << " pass=yes\n";
        return 0;
    }

    const condex::SpaceFile f = condex::load_space(space_path);
    if (x_name.empty())
        throw std::invalid_argument("compat needs --x (with --y or --family), "
                                    "or --counterexample");
    const condex::RandomVar& x = find_rv(f, x_name, space_path);

    if (!family_names.empty()) {
        std::vector<condex::RandomVar> family;
        for (const std::string& n : family_names) family.push_back(find_rv(f, n, space_path));
        const condex::FamilyCompat fc = condex::family_compat(x, family);

        json rep;
        rep["schema"] = "1";
        rep["coeffs"] = fc.coeffs;
        rep["residual"] = fc.residual;
        rep["rank"] = fc.rank;
        rep["rank_deficient"] = fc.rank_deficient;
        std::cout << rep.dump(2) << "\n";
        const fs::path out = out_path(out_name.empty() ? "family.json" : out_name);
        write_text(out, rep.dump(2) + "\n");

        const bool linear = fc.residual <= tol;
        std::cout << "compat: family=" << family.size() << " rank=" << fc.rank
                  << " residual=" << format_double(fc.residual) << " linear=" << yes_no(linear)
                  << " wrote " << out.string() << " pass=yes\n";
        return 0;
    }

    if (y_name.empty()) throw std::invalid_argument("compat needs --y or --family with --x");
    const condex::RandomVar& y = find_rv(f, y_name, space_path);
    const condex::CompatReport r = condex::compat_report(x, y, tol);
    const condex::DeepUncorrReport du = condex::deep_uncorrelated(x, y, tol);
    const double tv = condex::tv_independence_gap(x, y);

    json rep;
    rep["schema"] = "1";
    rep["a"] = r.a;
    rep["c"] = r.c;
    rep["b"] = r.b;
    rep["d"] = r.d;
    rep["residual_y_on_x"] = r.residual_y_on_x;
    rep["residual_x_on_y"] = r.residual_x_on_y;
    rep["ab"] = r.ab;
    rep["rho"] = r.rho;
    rep["rho2"] = r.rho2;
    rep["ab_rho2_dev"] = r.ab_rho2_dev;
    rep["collinearity_dev"] = r.collinearity_dev;
    rep["meet_dev_x"] = r.meet_dev_x;
    rep["meet_dev_y"] = r.meet_dev_y;
    rep["xy_identity_dev"] = r.xy_identity_dev;
    rep["compatible"] = r.compatible;
    rep["deeply_uncorrelated"] = du.deeply_uncorrelated;
    rep["dev_x_given_y"] = du.dev_x_given_y;
    rep["dev_y_given_x"] = du.dev_y_given_x;
    rep["tv_gap"] = tv;
    std::cout << rep.dump(2) << "\n";
    print_compat_table(r, du, tv);

    std::ostringstream csv;
    csv << "metric,value\n";
    for (const auto& [key, value] : rep.items())
        if (value.is_number())
            csv << key << ',' << num_cell(value.get<double>(), key) << '\n';
    const fs::path out = out_path(out_name.empty() ? "compat.csv" : out_name);
    write_text(out, csv.str());

    // The slope product and covariance identities hold for every pair; the
    // data only decides "compatible", which is reported, not asserted.
    const bool pass = r.ab_rho2_dev <= tol && r.xy_identity_dev <= tol;
    std::cout << "compat: compatible=" << yes_no(r.compatible)
              << " ab_rho2_dev=" << format_double(r.ab_rho2_dev) << " wrote " << out.string()
              << " pass=" << yes_no(pass) << "\n";
    return pass ? 0 : 1;
}

// ---- gaussian: projection geometry in covariance coordinates ----

std::shared_ptr<const condex::GaussianSpace> gauss_space(const json& cfg) {
    return std::make_shared<const condex::GaussianSpace>(json_matrix(need(cfg, "cov"), "cov"));
}

int run_gauss_project(const std::string& cfg_path) {
    const json cfg = load_json(cfg_path);
    const auto space = gauss_space(cfg);
    const condex::Subspace sub = json_subspace(space, need(cfg, "subspace"), "subspace");
    const Eigen::VectorXd u = json_vector(need(cfg, "u"), "u");
    if (u.size() != space->dim())
        throw std::invalid_argument("u has length " + std::to_string(u.size()) +
                                    ", the space has dimension " + std::to_string(space->dim()));

    const Eigen::VectorXd p = condex::project(u, sub);
    const Eigen::VectorXd coeffs = condex::projection_coefficients(u, sub);
    const double nu = space->norm(u), np = space->norm(p), nr = space->norm(u - p);

    json rep;
    rep["schema"] = "1";
    rep["projection"] = to_std(p);
    rep["coefficients"] = to_std(coeffs);
    rep["norm_u"] = nu;
    rep["norm_projection"] = np;
    rep["norm_residual"] = nr;
    const fs::path out = out_path(opt_string(cfg, "out", "project.json"));
    write_text(out, rep.dump(2) + "\n");

    const double tol = pick_tol(opt_num(cfg, "tol", 1e-10));
    const double pyth = std::abs(nu * nu - np * np - nr * nr);
    const bool pass = pyth <= tol;
    std::cout << "gaussian project: rank=" << sub.rank() << " norm_u=" << format_double(nu)
              << " norm_projection=" << format_double(np)
              << " pythagoras_dev=" << format_double(pyth) << " wrote " << out.string()
              << " pass=" << yes_no(pass) << "\n";
    return pass ? 0 : 1;
}

int run_gauss_angle(const std::string& cfg_path) {
    const json cfg = load_json(cfg_path);
    const auto space = gauss_space(cfg);
    const condex::Subspace v = json_subspace(space, need(cfg, "v"), "v");
    const condex::Subspace w = json_subspace(space, need(cfg, "w"), "w");
    const double c = condex::friedrichs_angle_cos(v, w);
    const condex::Subspace inter = condex::intersect(v, w);

    json rep;
    rep["schema"] = "1";
    rep["cos"] = c;
    rep["round_decay"] = c * c;  // one V-then-W round contracts by at most cos^2
    rep["intersection_rank"] = inter.rank();
    const fs::path out = out_path(opt_string(cfg, "out", "angle.json"));
    write_text(out, rep.dump(2) + "\n");

    const bool pass = c >= 0.0 && c < 1.0;
    std::cout << "gaussian angle: cos=" << format_double(c)
              << " intersection_rank=" << inter.rank() << " wrote " << out.string()
              << " pass=" << yes_no(pass) << "\n";
    return pass ? 0 : 1;
}

int run_gauss_iterate(const std::string& cfg_path) {
    const json cfg = load_json(cfg_path);
    const auto space = gauss_space(cfg);
    const json& subs_json = need(cfg, "subspaces");
    if (!subs_json.is_array() || subs_json.empty())
        throw std::invalid_argument("\"subspaces\" must be a nonempty array");
    std::vector<condex::Subspace> subs;
    for (std::size_t i = 0; i < subs_json.size(); ++i)
        subs.push_back(
            json_subspace(space, subs_json[i], "subspaces[" + std::to_string(i) + "]"));

    const Eigen::VectorXd x0 = json_vector(need(cfg, "x0"), "x0");
    if (x0.size() != space->dim())
        throw std::invalid_argument("x0 has length " + std::to_string(x0.size()) +
                                    ", the space has dimension " + std::to_string(space->dim()));
    const condex::Schedule sched = condex::parse_schedule(need(cfg, "schedule").dump());
    if (sched.max_index() > static_cast<int>(subs.size()))
        throw std::invalid_argument("schedule index " + std::to_string(sched.max_index()) +
                                    " exceeds the " + std::to_string(subs.size()) +
                                    " listed subspaces");
    const long steps = need_int(cfg, "steps");

    condex::GaussIterateOptions opt;
    opt.stop_eps = opt_num(cfg, "stop_eps", opt.stop_eps);
    opt.window = static_cast<int>(opt_int(cfg, "window", opt.window));
    opt.stop_dist = opt_num(cfg, "stop_dist", opt.stop_dist);
    opt.store_iterates = true;
    const double tol = pick_tol(opt_num(cfg, "tol", 1e-8));

    condex::Subspace inter = subs.front();
    for (std::size_t i = 1; i < subs.size(); ++i) inter = condex::intersect(inter, subs[i]);
    const Eigen::VectorXd pred = condex::project(x0, inter);

    const condex::GaussTrajectory t =
        condex::iterate_projections(x0, subs, sched, steps, &pred, opt);

    // Same columns as the finite iterate. d2 and dist_to_limit are in the
    // covariance norm; d1/dinf are coordinate norms of the step difference;
    // m4 is the fourth moment 3 ||x_n||^4 of the Gaussian variable x_n.
    std::ostringstream csv;
    csv << "step,k_n,d1,d2,dinf,dist_to_limit,m4\n";
    for (long i = 0; i < t.steps(); ++i) {
        const Eigen::VectorXd delta = t.iterates[i + 1] - t.iterates[i];
        const double s = t.norm[i];
        csv << (i + 1) << ',' << t.k[i] << ',' << num_cell(delta.lpNorm<1>(), "d1") << ','
            << num_cell(t.diff[i], "d2") << ','
            << num_cell(delta.lpNorm<Eigen::Infinity>(), "dinf") << ','
            << num_cell(t.dist[i], "dist_to_limit") << ','
            << num_cell(3.0 * s * s * s * s, "m4") << '\n';
    }
    const fs::path out = out_path(opt_string(cfg, "out", "gauss_iterate.csv"));
    write_text(out, csv.str());

    const double final_dist = t.dist.empty() ? space->norm(t.last - pred) : t.dist.back();
    const bool stopped = t.converged || t.reached_limit;
    const bool pass = stopped && final_dist <= tol;
    std::cout << "gaussian iterate: steps=" << t.steps() << " converged=" << yes_no(stopped)
              << " dist_to_limit=" << format_double(final_dist) << " wrote " << out.string()
              << " pass=" << yes_no(pass) << "\n";
    return pass ? 0 : 1;
}

int run_gauss_slowdown(const std::string& cfg_path) {
    const json cfg = load_json(cfg_path);
    long lo = 2, hi = 2;
    if (cfg.contains("dims")) {
        const json& d = cfg.at("dims");
        if (!d.is_array() || d.size() != 2 || !d[0].is_number_integer() ||
            !d[1].is_number_integer())
            throw std::invalid_argument("\"dims\" must be [lo, hi]");
        lo = d[0].get<long>();
        hi = d[1].get<long>();
    } else {
        lo = hi = need_int(cfg, "d");
    }
    if (lo < 2 || hi < lo) throw std::invalid_argument("dims must satisfy 2 <= lo <= hi");
    const double eps = opt_num(cfg, "eps", 1e-6);
    const long max_steps = opt_int(cfg, "max_steps", 2000000);

    std::ostringstream csv;
    csv << "d,iterations,max_pair_cos\n";
    bool monotone = true;
    long prev = 0, first = 0, last = 0;
    for (long d = lo; d <= hi; ++d) {
        const condex::SlowdownResult res =
            condex::slowdown_family(static_cast<int>(d), eps, max_steps);
        double cmax = 0.0;
        for (std::size_t i = 0; i < res.lines.size(); ++i)
            for (std::size_t j = i + 1; j < res.lines.size(); ++j)
                cmax = std::max(cmax, condex::friedrichs_angle_cos(res.lines[i], res.lines[j]));
        csv << d << ',' << res.iterations << ',' << num_cell(cmax, "max_pair_cos") << '\n';
        if (d > lo && res.iterations < prev) monotone = false;
        prev = res.iterations;
        if (d == lo) first = res.iterations;
        last = res.iterations;
    }
    const fs::path out = out_path(opt_string(cfg, "out", "slowdown.csv"));
    write_text(out, csv.str());

    std::cout << "gaussian slowdown: d=" << lo << ".." << hi << " iterations=" << first << ".."
              << last << " monotone=" << yes_no(monotone) << " wrote " << out.string()
              << " pass=" << yes_no(monotone) << "\n";
    return monotone ? 0 : 1;
}

// ---- sampler: digit-channel audits and the exact enumeration oracle ----

int run_sampler(int channels, long n, std::optional<std::uint64_t> seed,
                const std::string& test, int bits, double alpha, int enumerate_bits,
                const std::string& out_name) {
    json rep;
    rep["schema"] = "1";
    bool pass = true;
    std::ostringstream sum;

    if (enumerate_bits > 0) {
        const condex::ChannelEnumeration e = condex::enumerate_two_channels(enumerate_bits);
        json er;
        er["patterns"] = e.patterns;
        er["m1"] = e.m1;
        er["m2"] = e.m2;
        er["expected_count"] = e.expected_count;
        er["max_count_dev"] = e.max_count_dev;
        er["product_uniform"] = e.product_uniform;
        er["marginals_uniform"] = e.marginals_uniform;
        rep["enumerate"] = er;
        pass = e.product_uniform && e.marginals_uniform;
        sum << "sampler: enumerate=" << enumerate_bits << " patterns=" << e.patterns
            << " max_count_dev=" << e.max_count_dev;
    } else {
        if (test.empty())
            throw std::invalid_argument("sampler needs --test or --enumerate");
        if (!seed)
            throw std::invalid_argument("--seed is required for sampled tests");
        if (channels < 1) throw std::invalid_argument("--channels must be >= 1");
        if (n < 2) throw std::invalid_argument("--n must be >= 2");

        std::mt19937_64 master(*seed);
        std::vector<std::vector<double>> chan(static_cast<std::size_t>(channels));
        for (long i = 0; i < n; ++i) {
            const condex::BitSource src = condex::BitSource::random(bits, master());
            const std::vector<double> us = condex::psi(src, channels);
            for (int k = 0; k < channels; ++k)
                chan[static_cast<std::size_t>(k)].push_back(us[static_cast<std::size_t>(k)]);
        }

        rep["test"] = test;
        rep["channels"] = channels;
        rep["n"] = n;
        rep["seed"] = *seed;
        double worst = 0.0, crit = 0.0;
        json results = json::array();
        if (test == "ks") {
            crit = condex::ks_critical(alpha, static_cast<std::size_t>(n));
            for (int k = 0; k < channels; ++k) {
                const double s =
                    condex::ks_statistic(chan[static_cast<std::size_t>(k)], &unit_cdf);
                results.push_back({{"channel", k + 1}, {"statistic", s}, {"pass", s <= crit}});
                worst = std::max(worst, s);
                pass = pass && s <= crit;
            }
        } else if (test == "chi2") {
            if (channels < 2) throw std::invalid_argument("chi2 needs --channels >= 2");
            if (alpha != 0.01)
                throw std::invalid_argument("the chi2 critical value is tabulated for "
                                            "--alpha 0.01 only");
            crit = 74.91947430847816;  // 99th percentile, 49 degrees of freedom
            for (int i = 0; i < channels; ++i)
                for (int j = i + 1; j < channels; ++j) {
                    const condex::Chi2Result c = condex::chi2_independence_8x8(
                        chan[static_cast<std::size_t>(i)], chan[static_cast<std::size_t>(j)]);
                    results.push_back({{"pair", {i + 1, j + 1}},
                                       {"statistic", c.statistic},
                                       {"df", c.df},
                                       {"pass", c.statistic <= crit}});
                    worst = std::max(worst, c.statistic);
                    pass = pass && c.statistic <= crit;
                }
        } else if (test == "corr") {
            if (channels < 2) throw std::invalid_argument("corr needs --channels >= 2");
            crit = condex::phi_inv(1.0 - alpha / 2.0) / std::sqrt(static_cast<double>(n));
            for (int i = 0; i < channels; ++i)
                for (int j = i + 1; j < channels; ++j) {
                    const double r = condex::pearson_corr(
                        chan[static_cast<std::size_t>(i)], chan[static_cast<std::size_t>(j)]);
                    results.push_back(
                        {{"pair", {i + 1, j + 1}}, {"statistic", r}, {"pass", std::abs(r) <= crit}});
                    worst = std::max(worst, std::abs(r));
                    pass = pass && std::abs(r) <= crit;
                }
        } else {
            throw std::invalid_argument("unknown test \"" + test + "\" (ks, chi2, corr)");
        }
        rep["critical"] = crit;
        rep["results"] = results;
        sum << "sampler: test=" << test << " channels=" << channels << " n=" << n
            << " worst=" << format_double(worst) << " critical=" << format_double(crit);
    }

    const std::string dump = rep.dump(2) + "\n";
    std::cout << dump;
    const fs::path out = out_path(out_name);
    write_text(out, dump);
    std::cout << sum.str() << " wrote " << out.string() << " pass=" << yes_no(pass) << "\n";
    return pass ? 0 : 1;
}

// ---- extend: move a space's fields and variables through a split ----

int run_extend(const std::string& space_path, const std::vector<int>& c_atoms,
               const std::string& out_name, bool verify) {
    const condex::SpaceFile f = condex::load_space(space_path);
    const condex::SplitSpace split = condex::make_split(f.space, c_atoms);

    condex::SpaceFile ext;
    ext.space = f.space;
    for (const auto& [name, g] : f.fields)
        ext.fields.insert({name, condex::uplus(condex::restrict_field(g, split), split)});
    for (const auto& [name, x] : f.rvs)
        ext.rvs.insert({name, condex::extend_rv(condex::restrict_rv(x, split), split)});
    const fs::path out = out_path(out_name);
    condex::save_space(ext, out.string());

    bool pass = true;
    double worst_transfer = 0.0, worst_norm = 0.0;
    const double tol = pick_tol(1e-10);
    if (verify) {
        for (const auto& [xname, x] : f.rvs) {
            const condex::RandomVar rx = condex::restrict_rv(x, split);
            for (const auto& [gname, g] : f.fields)
                worst_transfer = std::max(
                    worst_transfer,
                    condex::verify_transfer(rx, condex::restrict_field(g, split), split));
            for (const auto& [yname, y] : f.rvs) {
                const condex::NormTransfer nt =
                    condex::norm_transfer(rx, condex::restrict_rv(y, split), split);
                worst_norm =
                    std::max(worst_norm, std::abs(nt.full_sq - nt.scaled_restricted_sq));
            }
        }
        pass = worst_transfer <= tol && worst_norm <= tol;
    }

    std::cout << "extend: c_prob=" << format_double(split.c_prob) << " fields=" << f.fields.size()
              << " rvs=" << f.rvs.size();
    if (verify)
        std::cout << " worst_transfer=" << format_double(worst_transfer)
                  << " worst_norm=" << format_double(worst_norm);
    std::cout << " wrote " << out.string() << " pass=" << yes_no(pass) << "\n";
    return pass ? 0 : 1;
}

int run_selftest() {
    const std::vector<condex::CriterionResult> results = condex::run_acceptance(&std::cout);
    bool all = true;
    for (const auto& r : results) all = all && r.pass;
    std::cout << "selftest: " << (all ? "all criteria passed" : "failures present") << "\n";
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conditional expectation laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<double> tol;
    app.add_option("--tol", tol, "override every pass/fail tolerance");

    std::string it_cfg;
    CLI::App* it = app.add_subcommand("iterate", "product of conditional expectations");
    it->add_option("config", it_cfg, "experiment config JSON")->required()
        ->check(CLI::ExistingFile);

    std::string meet_space, meet_rv, meet_out = "meet.json";
    std::vector<std::string> meet_fields;
    CLI::App* meet = app.add_subcommand("meet", "meet of completed fields");
    meet->add_option("--space", meet_space, "space JSON")->required()->check(CLI::ExistingFile);
    meet->add_option("--fields", meet_fields, "field names")->required()->delimiter(',');
    meet->add_option("--rv", meet_rv, "condition this variable on the meet");
    meet->add_option("--out", meet_out, "report path");

    std::string cp_space, cp_x, cp_y, cp_ce, cp_out;
    std::vector<std::string> cp_family;
    int cp_n = 60;
    CLI::App* cp = app.add_subcommand("compat", "pair and family regression reports");
    cp->add_option("--space", cp_space, "space JSON")->check(CLI::ExistingFile);
    cp->add_option("--x", cp_x, "response variable");
    cp->add_option("--y", cp_y, "regressor variable");
    cp->add_option("--family", cp_family, "regressor family")->delimiter(',');
    cp->add_option("--counterexample", cp_ce, "emit a built-in space (disc, indicator)");
    cp->add_option("--n", cp_n, "grid size for the disc counterexample");
    cp->add_option("--out", cp_out, "report path");

    CLI::App* ga = app.add_subcommand("gaussian", "projection geometry");
    ga->require_subcommand(1);
    std::string gp_cfg, gan_cfg, gi_cfg, gs_cfg;
    ga->add_subcommand("project", "project a vector onto a subspace")
        ->add_option("config", gp_cfg, "config JSON")->required()->check(CLI::ExistingFile);
    ga->add_subcommand("angle", "principal angle between two subspaces")
        ->add_option("config", gan_cfg, "config JSON")->required()->check(CLI::ExistingFile);
    ga->add_subcommand("iterate", "alternating projections along a schedule")
        ->add_option("config", gi_cfg, "config JSON")->required()->check(CLI::ExistingFile);
    ga->add_subcommand("slowdown", "three-line family timing per dimension")
        ->add_option("config", gs_cfg, "config JSON")->required()->check(CLI::ExistingFile);

    int sm_channels = 2, sm_bits = 64, sm_enum = 0;
    long sm_n = 10000;
    double sm_alpha = 0.01;
    std::optional<std::uint64_t> sm_seed;
    std::string sm_test, sm_out = "sampler.json";
    CLI::App* sm = app.add_subcommand("sampler", "digit-channel audits");
    sm->add_option("--channels", sm_channels, "number of channels");
    sm->add_option("--n", sm_n, "sample count");
    sm->add_option("--seed", sm_seed, "master seed (required for sampled tests)");
    sm->add_option("--test", sm_test, "ks, chi2, or corr");
    sm->add_option("--bits", sm_bits, "digits per source");
    sm->add_option("--alpha", sm_alpha, "test level");
    sm->add_option("--enumerate", sm_enum, "exact enumeration over all patterns of this many bits");
    sm->add_option("--out", sm_out, "report path");

    std::string ex_space, ex_out = "extended.json";
    std::vector<int> ex_c;
    bool ex_verify = false;
    CLI::App* ex = app.add_subcommand("extend", "restrict to C and extend back by zero");
    ex->add_option("--space", ex_space, "space JSON")->required()->check(CLI::ExistingFile);
    ex->add_option("--c", ex_c, "atom indices of C")->required()->delimiter(',');
    ex->add_option("--out", ex_out, "extended space path");
    ex->add_flag("--verify", ex_verify, "check the transfer and norm identities");

    CLI::App* st = app.add_subcommand("selftest", "run the full acceptance battery");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    g_tol = tol;

    try {
        if (it->parsed()) return run_iterate(it_cfg);
        if (meet->parsed()) return run_meet(meet_space, meet_fields, meet_rv, meet_out);
        if (cp->parsed()) return run_compat(cp_space, cp_x, cp_y, cp_family, cp_ce, cp_n, cp_out);
        if (ga->parsed()) {
            if (ga->get_subcommand("project")->parsed()) return run_gauss_project(gp_cfg);
            if (ga->get_subcommand("angle")->parsed()) return run_gauss_angle(gan_cfg);
            if (ga->get_subcommand("iterate")->parsed()) return run_gauss_iterate(gi_cfg);
            return run_gauss_slowdown(gs_cfg);
        }
        if (sm->parsed())
            return run_sampler(sm_channels, sm_n, sm_seed, sm_test, sm_bits, sm_alpha, sm_enum,
                               sm_out);
        if (ex->parsed()) return run_extend(ex_space, ex_c, ex_out, ex_verify);
        if (st->parsed()) return run_selftest();
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
