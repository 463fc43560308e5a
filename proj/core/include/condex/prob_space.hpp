#pragma once

// Finite probability spaces, sigma-fields as atom partitions, and blockwise
// conditional expectation. Everything downstream builds on these types.

#include <memory>
#include <string>
#include <vector>

namespace condex {

inline constexpr double kWeightSumTol = 1e-12;

// Atom weights p_0..p_{n-1}, each >= 0, summing to 1 within kWeightSumTol.
// Weights are never renormalized: a bad sum is rejected at construction.
class ProbSpace {
public:
    explicit ProbSpace(std::vector<double> weights);

    int atom_count() const { return static_cast<int>(w_.size()); }
    const std::vector<double>& weights() const { return w_; }
    double weight(int atom) const { return w_.at(atom); }
    bool is_null(int atom) const { return w_.at(atom) == 0.0; }

    double block_prob(const std::vector<int>& atoms) const;

private:
    std::vector<double> w_;
};

using Block = std::vector<int>;

// A sigma-field on n atoms is a partition of {0..n-1}. Canonical form:
// each block sorted ascending, blocks ordered by smallest member.
// Equality, refinement and the lattice operations act on that form.
class SigmaField {
public:
    SigmaField(int atom_count, std::vector<Block> blocks);

    static SigmaField trivial(int atom_count);
    static SigmaField finest(int atom_count);
    static SigmaField from_labels(const std::vector<int>& labels);

    int atom_count() const { return n_; }
    int block_count() const { return static_cast<int>(blocks_.size()); }
    const std::vector<Block>& blocks() const { return blocks_; }
    const Block& block(int b) const { return blocks_.at(b); }
    // Index into blocks() of the block containing the atom.
    int block_of(int atom) const { return block_of_.at(atom); }
    const std::vector<int>& block_index() const { return block_of_; }

    // True iff every block of *this is contained in a block of g.
    bool refines(const SigmaField& g) const;

    bool operator==(const SigmaField& o) const {
        return n_ == o.n_ && blocks_ == o.blocks_;
    }
    bool operator!=(const SigmaField& o) const { return !(*this == o); }

private:
    int n_ = 0;
    std::vector<Block> blocks_;
    std::vector<int> block_of_;
};

// Real-valued map on the atoms of a shared space. Values must be finite.
class RandomVar {
public:
    RandomVar(std::shared_ptr<const ProbSpace> space, std::vector<double> values);

    int atom_count() const { return static_cast<int>(v_.size()); }
    const std::vector<double>& values() const { return v_; }
    double value(int atom) const { return v_.at(atom); }
    const std::shared_ptr<const ProbSpace>& space() const { return sp_; }

private:
    std::shared_ptr<const ProbSpace> sp_;
    std::vector<double> v_;
};

// E(X | G): on each block with positive probability the weighted block mean;
// on null blocks the value 0.
RandomVar cond_exp(const RandomVar& x, const SigmaField& g);

// Level sets of X under exact value equality.
SigmaField sigma_of_rv(const RandomVar& x);

// Finest common coarsening (partition-lattice meet of the sigma-fields,
// i.e. the intersection sigma-field): connectivity closure over shared blocks.
SigmaField sigma_meet(const SigmaField& a, const SigmaField& b);
SigmaField sigma_meet(const std::vector<SigmaField>& fields);

// Coarsest common refinement (the generated sigma-field).
SigmaField sigma_join(const SigmaField& a, const SigmaField& b);
SigmaField sigma_join(const std::vector<SigmaField>& fields);

// G with every null atom detached into its own singleton block. Blocks keep
// their positive atoms, so conditional expectations are unchanged.
SigmaField completion(const SigmaField& g, const ProbSpace& space);

struct ClassifyReport {
    std::vector<int> atomic_blocks;  // block ids with positive probability
    double atomic_mass = 0.0;        // total mass carried by those blocks
    bool purely_atomic = false;      // atomic_mass == 1 within kWeightSumTol
};
ClassifyReport classify(const SigmaField& g, const ProbSpace& space);

double expectation(const RandomVar& x);
double moment(const RandomVar& x, int k);

// (sum_i p_i |x_i|^p)^(1/p) for finite p >= 1; for p = infinity the max of
// |x_i| over atoms with positive probability (null atoms carry no mass).
double lp_norm(const RandomVar& x, double p);
double linf_norm(const RandomVar& x);
double linf_dist(const RandomVar& a, const RandomVar& b);

// Scales nonnegative raw masses to sum to 1 exactly as ProbSpace accumulates
// them, nudging the largest entry to absorb the rounding residue. Use this
// when building spaces with many atoms, where plain division leaves a sum
// error above kWeightSumTol.
std::vector<double> normalized_weights(std::vector<double> raw);

RandomVar operator+(const RandomVar& a, const RandomVar& b);
RandomVar operator-(const RandomVar& a, const RandomVar& b);
RandomVar operator*(double s, const RandomVar& a);

void require_same_space(const RandomVar& a, const RandomVar& b);

}  // namespace condex
