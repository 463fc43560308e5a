#include "condex/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace condex {

CondExpOperator build_operator(const SigmaField& g, std::shared_ptr<const ProbSpace> space) {
    if (!space) throw std::invalid_argument("build_operator: null space");
    if (g.atom_count() != space->atom_count())
        throw std::invalid_argument("build_operator: field/space atom counts differ");
    int n = space->atom_count();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& blk : g.blocks()) {
        double pb = space->block_prob(blk);
        if (pb <= 0.0) continue;  // null block: zero rows
        for (int i : blk)
            for (int j : blk) m(i, j) = space->weight(j) / pb;
    }
    return CondExpOperator{std::move(m), g, std::move(space)};
}

RandomVar apply(const CondExpOperator& op, const RandomVar& x) {
    if (x.atom_count() != op.matrix.rows())
        throw std::invalid_argument("apply: dimension mismatch");
    Eigen::Map<const Eigen::VectorXd> v(x.values().data(), x.atom_count());
    Eigen::VectorXd out = op.matrix * v;
    return RandomVar(x.space(), std::vector<double>(out.data(), out.data() + out.size()));
}

namespace {

// splitmix64: counter-based, so schedule entries are pure in (seed, n).
std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void check_indices(const std::vector<int>& seq, int k_max) {
    for (int v : seq)
        if (v < 1 || v > k_max)
            throw std::invalid_argument("Schedule: index " + std::to_string(v) +
                                        " outside 1.." + std::to_string(k_max));
}

}  // namespace

Schedule Schedule::periodic(std::vector<int> pattern) {
    if (pattern.empty()) throw std::invalid_argument("Schedule: empty pattern");
    Schedule s;
    s.kind_ = Kind::Periodic;
    s.k_max_ = *std::max_element(pattern.begin(), pattern.end());
    check_indices(pattern, s.k_max_);
    // A periodic pattern repeats every index it contains infinitely often;
    // it covers 1..k_max iff every index appears.
    std::vector<bool> seen(s.k_max_ + 1, false);
    for (int v : pattern) seen[v] = true;
    s.infinite_repeat_ = std::all_of(seen.begin() + 1, seen.end(), [](bool b) { return b; });
    s.seq_ = std::move(pattern);
    return s;
}

Schedule Schedule::explicit_list(std::vector<int> list) {
    if (list.empty()) throw std::invalid_argument("Schedule: empty explicit list");
    Schedule s;
    s.kind_ = Kind::Explicit;
    s.k_max_ = *std::max_element(list.begin(), list.end());
    check_indices(list, s.k_max_);
    s.infinite_repeat_ = false;  // finite lists cannot repeat anything infinitely
    s.seq_ = std::move(list);
    return s;
}

Schedule Schedule::uniform_random(int k, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("Schedule: k must be >= 1");
    Schedule s;
    s.kind_ = Kind::Random;
    s.k_max_ = k;
    s.seed_ = seed;
    s.infinite_repeat_ = true;  // full support: every index recurs a.s.
    return s;
}

Schedule Schedule::random_rounds(int k, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("Schedule: k must be >= 1");
    Schedule s;
    s.kind_ = Kind::Rounds;
    s.k_max_ = k;
    s.seed_ = seed;
    s.infinite_repeat_ = true;  // every index exactly once per window
    return s;
}

int Schedule::at(long n) const {
    if (n < 1) throw std::out_of_range("Schedule: step index must be >= 1");
    switch (kind_) {
        case Kind::Periodic:
            return seq_[static_cast<std::size_t>((n - 1) % static_cast<long>(seq_.size()))];
        case Kind::Explicit:
            if (n > static_cast<long>(seq_.size()))
                throw std::out_of_range("Schedule: explicit list exhausted at step " +
                                        std::to_string(n));
            return seq_[static_cast<std::size_t>(n - 1)];
        case Kind::Random:
            return static_cast<int>(splitmix64(seed_ ^ splitmix64(static_cast<std::uint64_t>(n))) %
                                    static_cast<std::uint64_t>(k_max_)) + 1;
        case Kind::Rounds: {
            long window = (n - 1) / k_max_;
            int pos = static_cast<int>((n - 1) % k_max_);
            // Fisher-Yates driven by a per-window splitmix64 stream.
            std::vector<int> perm(k_max_);
            std::iota(perm.begin(), perm.end(), 1);
            std::uint64_t state = splitmix64(seed_ ^ splitmix64(static_cast<std::uint64_t>(window) + 0x51ed2701ULL));
            for (int i = k_max_ - 1; i > 0; --i) {
                state = splitmix64(state);
                int j = static_cast<int>(state % static_cast<std::uint64_t>(i + 1));
                std::swap(perm[i], perm[j]);
            }
            return perm[pos];
        }
    }
    throw std::logic_error("Schedule: unknown kind");
}

long Schedule::length() const {
    if (kind_ != Kind::Explicit) throw std::logic_error("Schedule: length() is explicit-only");
    return static_cast<long>(seq_.size());
}

const std::vector<int>& Schedule::pattern() const {
    if (kind_ != Kind::Periodic && kind_ != Kind::Explicit)
        throw std::logic_error("Schedule: pattern() needs a list-backed kind");
    return seq_;
}

namespace {

double l1_dist(const RandomVar& a, const RandomVar& b) {
    const auto& p = a.space()->weights();
    double s = 0.0;
    for (int i = 0; i < a.atom_count(); ++i) s += p[i] * std::abs(a.value(i) - b.value(i));
    return s;
}

double l2_dist(const RandomVar& a, const RandomVar& b) {
    const auto& p = a.space()->weights();
    double s = 0.0;
    for (int i = 0; i < a.atom_count(); ++i) {
        double d = a.value(i) - b.value(i);
        s += p[i] * d * d;
    }
    return std::sqrt(s);
}

}  // namespace

Trajectory iterate(const RandomVar& x0, const std::vector<SigmaField>& fields,
                   const Schedule& schedule, long max_steps, const RandomVar* predicted,
                   const IterateOptions& opt) {
    if (fields.empty()) throw std::invalid_argument("iterate: no fields");
    for (const auto& g : fields)
        if (g.atom_count() != x0.atom_count())
            throw std::invalid_argument("iterate: field/variable atom counts differ");
    if (max_steps < 0) throw std::invalid_argument("iterate: negative step count");
    if (schedule.bounded() && max_steps > schedule.length())
        throw std::invalid_argument("iterate: explicit schedule has " +
                                    std::to_string(schedule.length()) + " entries, " +
                                    std::to_string(max_steps) + " steps requested");
    if (predicted) require_same_space(x0, *predicted);

    int K = static_cast<int>(fields.size());
    int window = opt.window > 0 ? opt.window : K;

    Trajectory t(x0);
    if (opt.store_iterates) t.iterates.push_back(x0);
    RandomVar x = x0;
    // A quiet run converges only once it is window steps long AND has applied
    // every field: K consecutive small steps can straddle schedule windows and
    // miss a field entirely, stalling at a fixpoint of a strict subset.
    int quiet = 0;
    std::vector<char> quiet_seen(static_cast<std::size_t>(K), 0);
    int quiet_cover = 0;
    for (long n = 1; n <= max_steps; ++n) {
        int kn = schedule.at(n);
        if (kn < 1 || kn > K)
            throw std::out_of_range("iterate: schedule emitted field index " + std::to_string(kn) +
                                    " but only " + std::to_string(K) + " fields were given");
        RandomVar next = cond_exp(x, fields[kn - 1]);

        t.k.push_back(kn);
        t.d1.push_back(l1_dist(next, x));
        t.d2.push_back(l2_dist(next, x));
        double step_inf = linf_dist(next, x);
        t.dinf.push_back(step_inf);
        t.m4.push_back(moment(next, 4));
        t.n1.push_back(lp_norm(next, 1.0));
        t.n2.push_back(lp_norm(next, 2.0));
        t.n4.push_back(lp_norm(next, 4.0));
        t.ninf.push_back(linf_norm(next));
        if (predicted) t.dist.push_back(linf_dist(next, *predicted));
        if (opt.store_iterates) t.iterates.push_back(next);

        x = std::move(next);

        if (step_inf <= opt.stop_eps) {
            ++quiet;
            if (!quiet_seen[static_cast<std::size_t>(kn - 1)]) {
                quiet_seen[static_cast<std::size_t>(kn - 1)] = 1;
                ++quiet_cover;
            }
        } else {
            quiet = 0;
            if (quiet_cover > 0) {
                std::fill(quiet_seen.begin(), quiet_seen.end(), 0);
                quiet_cover = 0;
            }
        }
        if (quiet >= window && quiet_cover == K) {
            t.converged = true;
            break;
        }
        if (predicted && opt.stop_dist >= 0.0 && t.dist.back() <= opt.stop_dist) {
            t.reached_limit = true;
            break;
        }
    }
    t.last = std::move(x);
    return t;
}

RandomVar limit_predict(const RandomVar& x0, const std::vector<SigmaField>& fields) {
    if (fields.empty()) throw std::invalid_argument("limit_predict: no fields");
    std::vector<SigmaField> completed;
    completed.reserve(fields.size());
    for (const auto& g : fields) completed.push_back(completion(g, *x0.space()));
    return cond_exp(x0, sigma_meet(completed));
}

RandomVar two_field_alternation(const RandomVar& x, const RandomVar& y, int n) {
    if (n < 0) throw std::invalid_argument("two_field_alternation: negative round count");
    require_same_space(x, y);
    SigmaField gx = sigma_of_rv(x);
    SigmaField gy = sigma_of_rv(y);
    RandomVar z = x;
    for (int i = 0; i < n; ++i) z = cond_exp(cond_exp(z, gy), gx);
    return z;
}

MomentTrack moment_track(const Trajectory& t, double tol) {
    MomentTrack r;
    r.m4 = t.m4;
    r.max_violation = 0.0;
    for (std::size_t i = 1; i < r.m4.size(); ++i)
        r.max_violation = std::max(r.max_violation, r.m4[i] - r.m4[i - 1]);
    r.non_increasing = r.max_violation <= tol;
    return r;
}

TruncationBound truncation_bound(const RandomVar& x, double k, const SigmaField& g, double p) {
    if (k < 0.0) throw std::invalid_argument("truncation_bound: negative threshold");
    if (!(p >= 1.0) && !std::isinf(p))
        throw std::invalid_argument("truncation_bound: p must be >= 1 or infinity");
    std::vector<double> tail(x.atom_count());
    for (int i = 0; i < x.atom_count(); ++i)
        tail[i] = std::abs(x.value(i)) > k ? x.value(i) : 0.0;
    RandomVar xt(x.space(), std::move(tail));
    TruncationBound b;
    b.lhs = lp_norm(cond_exp(xt, g), p);
    b.rhs = lp_norm(xt, p);
    return b;
}

}  // namespace condex
