#include "condex/atomic_ext.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace condex {

SplitSpace make_split(std::shared_ptr<const ProbSpace> base, std::vector<int> c_atoms) {
    if (!base) throw std::invalid_argument("make_split: null space");
    if (c_atoms.empty()) throw std::invalid_argument("make_split: C has no atoms");
    std::sort(c_atoms.begin(), c_atoms.end());
    const int n = base->atom_count();
    std::vector<bool> in_c(static_cast<std::size_t>(n), false);
    for (const int a : c_atoms) {
        if (a < 0 || a >= n)
            throw std::invalid_argument("make_split: atom " + std::to_string(a) +
                                        " outside 0.." + std::to_string(n - 1));
        if (in_c[static_cast<std::size_t>(a)])
            throw std::invalid_argument("make_split: atom " + std::to_string(a) + " repeated");
        in_c[static_cast<std::size_t>(a)] = true;
    }

    SplitSpace s;
    s.base = base;
    s.c_prob = base->block_prob(c_atoms);
    if (s.c_prob <= 0.0)
        throw std::invalid_argument("make_split: C carries no probability");
    std::vector<double> rw;
    rw.reserve(c_atoms.size());
    for (const int a : c_atoms) rw.push_back(base->weight(a));
    s.restricted = std::make_shared<const ProbSpace>(normalized_weights(std::move(rw)));
    for (int a = 0; a < n; ++a)
        if (!in_c[static_cast<std::size_t>(a)]) s.d_atoms.push_back(a);
    s.c_atoms = std::move(c_atoms);
    return s;
}

RandomVar restrict_rv(const RandomVar& x, const SplitSpace& s) {
    if (x.atom_count() != s.base->atom_count())
        throw std::invalid_argument("restrict_rv: variable lives on a different space");
    std::vector<double> v;
    v.reserve(s.c_atoms.size());
    for (const int a : s.c_atoms) v.push_back(x.value(a));
    return RandomVar(s.restricted, std::move(v));
}

SigmaField restrict_field(const SigmaField& g, const SplitSpace& s) {
    if (g.atom_count() != s.base->atom_count())
        throw std::invalid_argument("restrict_field: field lives on a different space");
    std::vector<int> labels(s.c_atoms.size());
    for (std::size_t i = 0; i < s.c_atoms.size(); ++i)
        labels[i] = g.block_of(s.c_atoms[i]);
    return SigmaField::from_labels(labels);
}

SigmaField uplus(const SigmaField& g_restricted, const SplitSpace& s) {
    if (g_restricted.atom_count() != static_cast<int>(s.c_atoms.size()))
        throw std::invalid_argument("uplus: field is not on the restricted space");
    std::vector<Block> blocks;
    blocks.reserve(g_restricted.blocks().size() + 1);
    for (const auto& blk : g_restricted.blocks()) {
        Block mapped;
        mapped.reserve(blk.size());
        for (const int i : blk) mapped.push_back(s.c_atoms[static_cast<std::size_t>(i)]);
        blocks.push_back(std::move(mapped));
    }
    if (!s.d_atoms.empty()) blocks.push_back(s.d_atoms);
    return SigmaField(s.base->atom_count(), std::move(blocks));
}

RandomVar extend_rv(const RandomVar& x_restricted, const SplitSpace& s) {
    if (x_restricted.atom_count() != static_cast<int>(s.c_atoms.size()))
        throw std::invalid_argument("extend_rv: variable is not on the restricted space");
    std::vector<double> v(static_cast<std::size_t>(s.base->atom_count()), 0.0);
    for (std::size_t i = 0; i < s.c_atoms.size(); ++i)
        v[static_cast<std::size_t>(s.c_atoms[i])] = x_restricted.value(static_cast<int>(i));
    return RandomVar(s.base, std::move(v));
}

double verify_transfer(const RandomVar& x_restricted, const SigmaField& g_restricted,
                       const SplitSpace& s) {
    const RandomVar lhs = cond_exp(extend_rv(x_restricted, s), uplus(g_restricted, s));
    const RandomVar rhs = extend_rv(cond_exp(x_restricted, g_restricted), s);
    return linf_dist(lhs, rhs);
}

NormTransfer norm_transfer(const RandomVar& x_restricted, const RandomVar& y_restricted,
                           const SplitSpace& s) {
    require_same_space(x_restricted, y_restricted);
    if (x_restricted.atom_count() != static_cast<int>(s.c_atoms.size()))
        throw std::invalid_argument("norm_transfer: variables are not on the restricted space");
    NormTransfer r;
    const RandomVar dx = extend_rv(x_restricted, s) - extend_rv(y_restricted, s);
    const double full = lp_norm(dx, 2.0);
    r.full_sq = full * full;
    double rs = 0.0;
    for (int i = 0; i < x_restricted.atom_count(); ++i) {
        const double d = x_restricted.value(i) - y_restricted.value(i);
        rs += s.restricted->weight(i) * d * d;
    }
    r.scaled_restricted_sq = s.c_prob * rs;
    return r;
}

}  // namespace condex
