#include "condex/prob_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace condex {

ProbSpace::ProbSpace(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty())
        throw std::invalid_argument("ProbSpace: needs at least one atom");
    double sum = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) {
        if (!std::isfinite(w_[i]))
            throw std::invalid_argument("ProbSpace: weights[" + std::to_string(i) + "] is not finite");
        if (w_[i] < 0.0)
            throw std::invalid_argument("ProbSpace: weights[" + std::to_string(i) + "] is negative (" +
                                        std::to_string(w_[i]) + ")");
        sum += w_[i];
    }
    if (std::abs(sum - 1.0) > kWeightSumTol)
        throw std::invalid_argument("ProbSpace: weights sum to " + std::to_string(sum) +
                                    ", expected 1 within 1e-12");
}

double ProbSpace::block_prob(const std::vector<int>& atoms) const {
    double p = 0.0;
    for (int a : atoms) p += weight(a);
    return p;
}

namespace {

std::vector<Block> canonicalize(int n, std::vector<Block> blocks) {
    for (auto& b : blocks) std::sort(b.begin(), b.end());
    std::sort(blocks.begin(), blocks.end(),
              [](const Block& a, const Block& b) { return a.front() < b.front(); });
    (void)n;
    return blocks;
}

}  // namespace

SigmaField::SigmaField(int atom_count, std::vector<Block> blocks) : n_(atom_count) {
    if (n_ <= 0) throw std::invalid_argument("SigmaField: atom_count must be positive");
    for (const auto& b : blocks)
        if (b.empty()) throw std::invalid_argument("SigmaField: empty block");
    blocks_ = canonicalize(n_, std::move(blocks));
    block_of_.assign(n_, -1);
    for (int bi = 0; bi < static_cast<int>(blocks_.size()); ++bi) {
        for (int a : blocks_[bi]) {
            if (a < 0 || a >= n_)
                throw std::invalid_argument("SigmaField: block " + std::to_string(bi) +
                                            " references atom " + std::to_string(a) +
                                            " outside 0.." + std::to_string(n_ - 1));
            if (block_of_[a] != -1)
                throw std::invalid_argument("SigmaField: atom " + std::to_string(a) +
                                            " appears in more than one block");
            block_of_[a] = bi;
        }
    }
    for (int a = 0; a < n_; ++a)
        if (block_of_[a] == -1)
            throw std::invalid_argument("SigmaField: atom " + std::to_string(a) +
                                        " missing from every block");
}

SigmaField SigmaField::trivial(int atom_count) {
    Block all(atom_count);
    std::iota(all.begin(), all.end(), 0);
    return SigmaField(atom_count, {all});
}

SigmaField SigmaField::finest(int atom_count) {
    std::vector<Block> blocks;
    blocks.reserve(atom_count);
    for (int a = 0; a < atom_count; ++a) blocks.push_back({a});
    return SigmaField(atom_count, std::move(blocks));
}

SigmaField SigmaField::from_labels(const std::vector<int>& labels) {
    if (labels.empty()) throw std::invalid_argument("SigmaField: empty label vector");
    std::map<int, Block> groups;
    for (int a = 0; a < static_cast<int>(labels.size()); ++a) groups[labels[a]].push_back(a);
    std::vector<Block> blocks;
    blocks.reserve(groups.size());
    for (auto& [lab, blk] : groups) blocks.push_back(std::move(blk));
    return SigmaField(static_cast<int>(labels.size()), std::move(blocks));
}

bool SigmaField::refines(const SigmaField& g) const {
    if (n_ != g.n_) return false;
    for (const auto& b : blocks_) {
        int target = g.block_of(b.front());
        for (int a : b)
            if (g.block_of(a) != target) return false;
    }
    return true;
}

RandomVar::RandomVar(std::shared_ptr<const ProbSpace> space, std::vector<double> values)
    : sp_(std::move(space)), v_(std::move(values)) {
    if (!sp_) throw std::invalid_argument("RandomVar: null space");
    if (static_cast<int>(v_.size()) != sp_->atom_count())
        throw std::invalid_argument("RandomVar: " + std::to_string(v_.size()) +
                                    " values for " + std::to_string(sp_->atom_count()) + " atoms");
    for (std::size_t i = 0; i < v_.size(); ++i)
        if (!std::isfinite(v_[i]))
            throw std::invalid_argument("RandomVar: values[" + std::to_string(i) + "] is not finite");
}

std::vector<double> normalized_weights(std::vector<double> raw) {
    if (raw.empty()) throw std::invalid_argument("normalized_weights: no entries");
    double total = 0.0;
    std::size_t imax = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw[i]) || raw[i] < 0.0)
            throw std::invalid_argument("normalized_weights: entry " + std::to_string(i) +
                                        " is negative or not finite");
        total += raw[i];
        if (raw[i] > raw[imax]) imax = i;
    }
    if (total <= 0.0) throw std::invalid_argument("normalized_weights: total mass is zero");
    for (auto& w : raw) w /= total;
    // The left-to-right sum below matches the ProbSpace validation exactly, so
    // pushing its residue onto the largest weight converges in one or two passes.
    for (int pass = 0; pass < 4; ++pass) {
        double s = 0.0;
        for (const double w : raw) s += w;
        if (std::abs(s - 1.0) <= 1e-14) break;
        raw[imax] += 1.0 - s;
    }
    return raw;
}

void require_same_space(const RandomVar& a, const RandomVar& b) {
    if (a.space() != b.space() && !(a.atom_count() == b.atom_count() &&
                                    a.space()->weights() == b.space()->weights()))
        throw std::invalid_argument("RandomVar: operands live on different spaces");
}

RandomVar cond_exp(const RandomVar& x, const SigmaField& g) {
    if (g.atom_count() != x.atom_count())
        throw std::invalid_argument("cond_exp: field on " + std::to_string(g.atom_count()) +
                                    " atoms, variable on " + std::to_string(x.atom_count()));
    const auto& p = x.space()->weights();
    const auto& v = x.values();
    std::vector<double> out(v.size(), 0.0);
    for (const auto& blk : g.blocks()) {
        double pb = 0.0, s = 0.0;
        for (int a : blk) {
            pb += p[a];
            s += p[a] * v[a];
        }
        double m = pb > 0.0 ? s / pb : 0.0;  // null block: value 0
        for (int a : blk) out[a] = m;
    }
    return RandomVar(x.space(), std::move(out));
}

SigmaField sigma_of_rv(const RandomVar& x) {
    std::map<double, Block> levels;  // exact value equality
    for (int a = 0; a < x.atom_count(); ++a) levels[x.value(a)].push_back(a);
    std::vector<Block> blocks;
    blocks.reserve(levels.size());
    for (auto& [val, blk] : levels) blocks.push_back(std::move(blk));
    return SigmaField(x.atom_count(), std::move(blocks));
}

namespace {

// Plain union-find; path halving keeps it near-linear.
class UnionFind {
public:
    explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    int find(int a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    void merge(int a, int b) {
        int ra = find(a), rb = find(b);
        if (ra != rb) parent_[ra] = rb;
    }

private:
    std::vector<int> parent_;
};

}  // namespace

SigmaField sigma_meet(const std::vector<SigmaField>& fields) {
    if (fields.empty()) throw std::invalid_argument("sigma_meet: empty field list");
    int n = fields.front().atom_count();
    UnionFind uf(n);
    for (const auto& g : fields) {
        if (g.atom_count() != n)
            throw std::invalid_argument("sigma_meet: fields on different atom counts");
        for (const auto& blk : g.blocks())
            for (std::size_t i = 1; i < blk.size(); ++i) uf.merge(blk[0], blk[i]);
    }
    std::vector<int> labels(n);
    for (int a = 0; a < n; ++a) labels[a] = uf.find(a);
    return SigmaField::from_labels(labels);
}

SigmaField sigma_meet(const SigmaField& a, const SigmaField& b) {
    return sigma_meet(std::vector<SigmaField>{a, b});
}

SigmaField sigma_join(const std::vector<SigmaField>& fields) {
    if (fields.empty()) throw std::invalid_argument("sigma_join: empty field list");
    int n = fields.front().atom_count();
    std::map<std::vector<int>, Block> cells;
    for (int a = 0; a < n; ++a) {
        std::vector<int> key;
        key.reserve(fields.size());
        for (const auto& g : fields) {
            if (g.atom_count() != n)
                throw std::invalid_argument("sigma_join: fields on different atom counts");
            key.push_back(g.block_of(a));
        }
        cells[key].push_back(a);
    }
    std::vector<Block> blocks;
    blocks.reserve(cells.size());
    for (auto& [key, blk] : cells) blocks.push_back(std::move(blk));
    return SigmaField(n, std::move(blocks));
}

SigmaField sigma_join(const SigmaField& a, const SigmaField& b) {
    return sigma_join(std::vector<SigmaField>{a, b});
}

SigmaField completion(const SigmaField& g, const ProbSpace& space) {
    if (g.atom_count() != space.atom_count())
        throw std::invalid_argument("completion: field/space atom counts differ");
    std::vector<Block> blocks;
    for (const auto& blk : g.blocks()) {
        Block keep;
        for (int a : blk) {
            if (space.is_null(a))
                blocks.push_back({a});
            else
                keep.push_back(a);
        }
        if (!keep.empty()) blocks.push_back(std::move(keep));
    }
    return SigmaField(g.atom_count(), std::move(blocks));
}

ClassifyReport classify(const SigmaField& g, const ProbSpace& space) {
    if (g.atom_count() != space.atom_count())
        throw std::invalid_argument("classify: field/space atom counts differ");
    ClassifyReport r;
    for (int b = 0; b < g.block_count(); ++b) {
        double pb = space.block_prob(g.block(b));
        if (pb > 0.0) {
            r.atomic_blocks.push_back(b);
            r.atomic_mass += pb;
        }
    }
    r.purely_atomic = std::abs(r.atomic_mass - 1.0) <= kWeightSumTol;
    return r;
}

double expectation(const RandomVar& x) {
    const auto& p = x.space()->weights();
    double s = 0.0;
    for (int a = 0; a < x.atom_count(); ++a) s += p[a] * x.value(a);
    return s;
}

double moment(const RandomVar& x, int k) {
    if (k < 1) throw std::invalid_argument("moment: order must be >= 1");
    const auto& p = x.space()->weights();
    double s = 0.0;
    for (int a = 0; a < x.atom_count(); ++a) s += p[a] * std::pow(x.value(a), k);
    return s;
}

double lp_norm(const RandomVar& x, double p) {
    if (std::isinf(p)) return linf_norm(x);
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    const auto& w = x.space()->weights();
    double s = 0.0;
    for (int a = 0; a < x.atom_count(); ++a) s += w[a] * std::pow(std::abs(x.value(a)), p);
    return std::pow(s, 1.0 / p);
}

double linf_norm(const RandomVar& x) {
    double m = 0.0;
    for (int a = 0; a < x.atom_count(); ++a)
        if (!x.space()->is_null(a)) m = std::max(m, std::abs(x.value(a)));
    return m;
}

double linf_dist(const RandomVar& a, const RandomVar& b) {
    require_same_space(a, b);
    double m = 0.0;
    for (int i = 0; i < a.atom_count(); ++i)
        if (!a.space()->is_null(i)) m = std::max(m, std::abs(a.value(i) - b.value(i)));
    return m;
}

RandomVar operator+(const RandomVar& a, const RandomVar& b) {
    require_same_space(a, b);
    std::vector<double> v(a.atom_count());
    for (int i = 0; i < a.atom_count(); ++i) v[i] = a.value(i) + b.value(i);
    return RandomVar(a.space(), std::move(v));
}

RandomVar operator-(const RandomVar& a, const RandomVar& b) {
    require_same_space(a, b);
    std::vector<double> v(a.atom_count());
    for (int i = 0; i < a.atom_count(); ++i) v[i] = a.value(i) - b.value(i);
    return RandomVar(a.space(), std::move(v));
}

RandomVar operator*(double s, const RandomVar& a) {
    std::vector<double> v(a.atom_count());
    for (int i = 0; i < a.atom_count(); ++i) v[i] = s * a.value(i);
    return RandomVar(a.space(), std::move(v));
}

}  // namespace condex
