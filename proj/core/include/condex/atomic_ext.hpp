#pragma once

// Splitting a space into a positive-probability part C and its complement D,
// conditioning on C, and moving fields and variables between the restricted
// space and the full one. The key identity: conditional expectation on the
// restriction, extended back by zero, equals conditional expectation on the
// full space under the field that adjoins D as one extra block.

#include <memory>
#include <vector>

#include "condex/prob_space.hpp"

namespace condex {

struct SplitSpace {
    std::shared_ptr<const ProbSpace> base;
    std::vector<int> c_atoms;  // ascending
    std::vector<int> d_atoms;  // complement, ascending
    double c_prob = 0.0;
    std::shared_ptr<const ProbSpace> restricted;  // weights renormalized by c_prob
};

// c_atoms must be distinct, in range, and carry positive total mass.
SplitSpace make_split(std::shared_ptr<const ProbSpace> base, std::vector<int> c_atoms);

// Variables and fields move along the index map c_atoms[i] <-> i.
RandomVar restrict_rv(const RandomVar& x, const SplitSpace& s);
SigmaField restrict_field(const SigmaField& g, const SplitSpace& s);

// G |+| D: the blocks of a restricted field mapped back into the base space,
// plus D itself as one block (when nonempty).
SigmaField uplus(const SigmaField& g_restricted, const SplitSpace& s);

// Zero extension: x on C, 0 on D.
RandomVar extend_rv(const RandomVar& x_restricted, const SplitSpace& s);

// Sup deviation (positive atoms) between E(ext(x) | G |+| D) and
// ext(E(x | G)) for a variable and field on the restriction.
double verify_transfer(const RandomVar& x_restricted, const SigmaField& g_restricted,
                       const SplitSpace& s);

// ||ext(x) - ext(y)||^2 on the base space vs P(C) ||x - y||^2 on the
// restriction; the two agree exactly.
struct NormTransfer {
    double full_sq = 0.0;
    double scaled_restricted_sq = 0.0;
};
NormTransfer norm_transfer(const RandomVar& x_restricted, const RandomVar& y_restricted,
                           const SplitSpace& s);

}  // namespace condex
