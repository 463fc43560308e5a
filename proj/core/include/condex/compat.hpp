#pragma once

// Linear compatibility of a pair of random variables: affine conditional
// expectations in both directions, the product-moment identities tying the
// two slopes to the correlation, and the deep-uncorrelatedness test with its
// two stock counterexample constructions.

#include <memory>
#include <vector>

#include "condex/prob_space.hpp"

namespace condex {

double variance(const RandomVar& x);
double covariance(const RandomVar& x, const RandomVar& y);

// Weighted least-squares fit of E(Y|X) on {1, X}: slope = Cov/Var(X),
// intercept = E(Y) - slope E(X). residual is the sup (over positive atoms)
// of |E(Y|X) - (slope X + intercept)|: zero exactly when the pair is
// linearly compatible in this direction.
struct Regress {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
};
Regress regress_ce(const RandomVar& y, const RandomVar& x);

struct CompatReport {
    double a = 0.0, c = 0.0;  // E(Y|X) ~ a X + c
    double b = 0.0, d = 0.0;  // E(X|Y) ~ b Y + d
    double residual_y_on_x = 0.0;
    double residual_x_on_y = 0.0;
    double ab = 0.0;
    double rho = 0.0;
    double rho2 = 0.0;
    bool compatible = false;  // both residuals <= tol
    double tol = 0.0;
    // Clause diagnostics:
    double ab_rho2_dev = 0.0;      // |ab - rho^2|; an identity of the LS slopes
    double collinearity_dev = 0.0; // sup |Y - (aX + c)|; ~0 iff Y is affine in X
    double meet_dev_x = 0.0;       // sup |E(X | completed meet) - E(X)|
    double meet_dev_y = 0.0;       // sup |E(Y | completed meet) - E(Y)|
    double xy_identity_dev = 0.0;  // max(|Cov - a VarX|, |Cov - b VarY|)
};
CompatReport compat_report(const RandomVar& x, const RandomVar& y, double tol = 1e-10);

// X and Y are deeply uncorrelated when E(X|Y) = E(X) and E(Y|X) = E(Y)
// (sup deviations over positive atoms). Strictly stronger than zero
// correlation, strictly weaker than independence.
struct DeepUncorrReport {
    bool deeply_uncorrelated = false;
    double dev_x_given_y = 0.0;
    double dev_y_given_x = 0.0;
};
DeepUncorrReport deep_uncorrelated(const RandomVar& x, const RandomVar& y, double tol = 1e-10);

// Weighted least-squares fit of E(X0 | X_1..X_n) on {1, X_1..X_n} with
// pivoted rank detection; coefficients are the minimal-norm solution when
// the regressor system is rank deficient.
struct FamilyCompat {
    std::vector<double> coeffs;  // intercept first, then one per family member
    double residual = 0.0;       // sup |E(X0|family) - fit| over positive atoms
    int rank = 0;                // numerical rank of the weighted design
    bool rank_deficient = false;
};
FamilyCompat family_compat(const RandomVar& x0, const std::vector<RandomVar>& family);

// M_n = E(X0 | sigma(X_1..X_n)) for n = 1..family size: the martingale of
// nested conditionings.
std::vector<RandomVar> nested_ce_sequence(const RandomVar& x0,
                                          const std::vector<RandomVar>& family);

// For Y_n = X_0 + ... + X_n, checks E(Y_{n+1} | sigma(X_0..X_n)) = Y_n for
// every n. Vacuously true for a single-member family.
struct MartingaleCheck {
    bool is_martingale = false;
    double max_dev = 0.0;
};
MartingaleCheck martingale_check(const std::vector<RandomVar>& family, double tol = 1e-10);

struct PairInstance {
    std::shared_ptr<const ProbSpace> space;
    RandomVar x, y;
};

// Four-atom reference instance: X = 1_{A u B}, Y = 1_A - 1_B over atoms
// (A\B, A n B, B\A, complement) with weights (0.2, 0.1, 0.2, 0.5).
// Uncorrelated but not deeply uncorrelated; E(XY^2) = 2[P(A) - P(A n B)].
PairInstance indicator_counterexample();

// Uniform law on an n-by-n midpoint grid restricted to the closed unit disc;
// X and Y are the coordinates. Deeply uncorrelated but far from independent.
PairInstance disc_counterexample(int n);

// Total-variation distance between the joint law of (X, Y) and the product
// of its marginals, over the product of the value supports.
double tv_independence_gap(const RandomVar& x, const RandomVar& y);

}  // namespace condex
