#pragma once

// Conditional expectation operators in matrix form, field schedules, and the
// product iteration X_n = E(X_{n-1} | G_{k_n}) with its convergence
// diagnostics.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "condex/prob_space.hpp"

namespace condex {

// Matrix of E(.|G) in atom coordinates: M[i][j] = p_j / P(B) when i and j
// share a block B with P(B) > 0, else 0. Rows of null-block atoms are zero.
struct CondExpOperator {
    Eigen::MatrixXd matrix;
    SigmaField field;
    std::shared_ptr<const ProbSpace> space;
};

CondExpOperator build_operator(const SigmaField& g, std::shared_ptr<const ProbSpace> space);
RandomVar apply(const CondExpOperator& op, const RandomVar& x);

// Field index sequence k_1, k_2, ... (1-based values in 1..k_max).
// All kinds are pure functions of (kind parameters, n), so a Schedule can be
// replayed from its description alone.
//   periodic  - repeats a fixed pattern
//   explicit  - finite list; iterating past the end is an error
//   random    - iid uniform on 1..k from a counter-based generator
//   rounds    - an independent uniform permutation of 1..k per window of k
//               steps, so every index occurs exactly once per window
class Schedule {
public:
    enum class Kind { Periodic, Explicit, Random, Rounds };

    static Schedule periodic(std::vector<int> pattern);
    static Schedule explicit_list(std::vector<int> list);
    static Schedule uniform_random(int k, std::uint64_t seed);
    static Schedule random_rounds(int k, std::uint64_t seed);

    int at(long n) const;  // n >= 1
    Kind kind() const { return kind_; }
    int max_index() const { return k_max_; }
    // Claim that every index in 1..k_max recurs infinitely often.
    bool infinite_repeat() const { return infinite_repeat_; }
    bool bounded() const { return kind_ == Kind::Explicit; }
    long length() const;  // explicit kind only
    const std::vector<int>& pattern() const;  // periodic and explicit kinds only
    std::uint64_t seed() const { return seed_; }

private:
    Schedule() = default;
    Kind kind_ = Kind::Periodic;
    std::vector<int> seq_;
    int k_max_ = 0;
    std::uint64_t seed_ = 0;
    bool infinite_repeat_ = false;
};

struct IterateOptions {
    double stop_eps = 1e-12;  // step-difference threshold
    int window = 0;           // consecutive steps required; 0 means K (field count)
    // If >= 0 and a predicted limit is supplied, also stop once
    // ||X_n - X_pred||_inf <= stop_dist.
    double stop_dist = -1.0;
    bool store_iterates = false;
};

struct Trajectory {
    explicit Trajectory(RandomVar start) : last(std::move(start)) {}

    std::vector<int> k;                      // schedule index per step
    std::vector<double> d1, d2, dinf;        // ||X_n - X_{n-1}||_p, p = 1, 2, inf
    std::vector<double> dist;                // ||X_n - X_pred||_inf (empty without a prediction)
    std::vector<double> m4;                  // E(X_n^4)
    std::vector<double> n1, n2, n4, ninf;    // ||X_n||_p
    std::vector<RandomVar> iterates;         // X_0..X_n when requested
    RandomVar last;                          // final iterate
    bool converged = false;                  // step-difference rule fired
    bool reached_limit = false;              // stop_dist rule fired

    int steps() const { return static_cast<int>(k.size()); }
};

// Runs X_n = E(X_{n-1} | G_{k_n}) for up to max_steps steps. Stops early when
// ||X_n - X_{n-1}||_inf <= stop_eps over a run of consecutive steps at least
// window long (default: the number of fields) in which every field was
// applied at least once, or when the optional stop_dist rule fires against
// the predicted limit. The coverage requirement keeps a run of small steps
// that never touches some field from counting as convergence.
Trajectory iterate(const RandomVar& x0, const std::vector<SigmaField>& fields,
                   const Schedule& schedule, long max_steps,
                   const RandomVar* predicted = nullptr, const IterateOptions& opt = {});

// E(X0 | meet of the completed fields): the limit the iteration converges to
// whenever every field recurs infinitely often.
RandomVar limit_predict(const RandomVar& x0, const std::vector<SigmaField>& fields);

// Applies (T_X T_Y)^n to X, where T_X = E(.|sigma(X)), T_Y = E(.|sigma(Y));
// each round projects onto sigma(Y) first, then back onto sigma(X).
RandomVar two_field_alternation(const RandomVar& x, const RandomVar& y, int n);

struct MomentTrack {
    std::vector<double> m4;
    bool non_increasing = false;
    double max_violation = 0.0;  // largest positive step of E(X_n^4)
};
MomentTrack moment_track(const Trajectory& t, double tol = 1e-12);

// ||E(X 1_{|X|>k} | G)||_p vs ||X 1_{|X|>k}||_p. The first never exceeds the
// second (conditional contraction on the truncated tail).
struct TruncationBound {
    double lhs = 0.0;
    double rhs = 0.0;
};
TruncationBound truncation_bound(const RandomVar& x, double k, const SigmaField& g, double p);

}  // namespace condex
