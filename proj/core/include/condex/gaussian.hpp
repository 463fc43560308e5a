#pragma once

// Finite-dimensional Gaussian Hilbert space in covariance coordinates: a
// vector u stands for the centered Gaussian variable with coordinates u
// against a fixed d-dimensional Gaussian vector of covariance Sigma, so
// <u, v> = u^T Sigma v. Conditional expectation onto the span of finitely
// many such variables is orthogonal projection, which this module makes
// literal, together with the Friedrichs angle machinery that governs how
// fast alternating projections converge.

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "condex/prob_space.hpp"

namespace condex {

class GaussianSpace {
public:
    // cov must be symmetric positive semidefinite; eigenvalues down to
    // -1e-10 are treated as roundoff and clipped to zero.
    explicit GaussianSpace(Eigen::MatrixXd cov);

    int dim() const { return static_cast<int>(cov_.rows()); }
    const Eigen::MatrixXd& cov() const { return cov_; }

    double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
    double norm(const Eigen::VectorXd& u) const;

private:
    Eigen::MatrixXd cov_;
};

// Span of the columns of a basis matrix, carrying a Sigma-orthonormal basis
// computed from the Gram matrix. A zero-column basis is the zero subspace.
class Subspace {
public:
    Subspace(std::shared_ptr<const GaussianSpace> space, Eigen::MatrixXd basis);

    const std::shared_ptr<const GaussianSpace>& space() const { return space_; }
    const Eigen::MatrixXd& basis() const { return basis_; }
    const Eigen::MatrixXd& onb() const { return onb_; }  // d x rank, Sigma-orthonormal
    int rank() const { return static_cast<int>(onb_.cols()); }

private:
    std::shared_ptr<const GaussianSpace> space_;
    Eigen::MatrixXd basis_;
    Eigen::MatrixXd onb_;
};

// Orthogonal projection of u onto the subspace; the residual is checked to
// be Sigma-orthogonal to the subspace and a failure throws.
Eigen::VectorXd project(const Eigen::VectorXd& u, const Subspace& sub);

// Coefficients of project(u) in the original (possibly dependent) basis,
// minimal-norm when the basis is rank deficient.
Eigen::VectorXd projection_coefficients(const Eigen::VectorXd& u, const Subspace& sub);

// cos of the Friedrichs angle between V and W: the largest singular value
// of Q_V^T Sigma Q_W strictly below 1 - tol (0 if none, or either space is
// zero). Singular values within tol of 1 belong to the intersection.
double friedrichs_angle_cos(const Subspace& v, const Subspace& w, double tol = 1e-8);

// V n W, recovered from the singular directions with singular value >= 1 - tol.
Subspace intersect(const Subspace& v, const Subspace& w, double tol = 1e-8);

struct GaussIterateOptions {
    double stop_eps = 1e-12;  // threshold on successive Sigma-norm differences
    int window = 0;           // quiet-run length required; 0 means the subspace count.
                              // The run must also have applied every subspace.
    double stop_dist = -1.0;  // if >= 0 and predicted given, stop once reached
    bool store_iterates = false;
};

struct GaussTrajectory {
    std::vector<int> k;            // subspace index applied at each step
    std::vector<double> diff;      // Sigma-norm of x_n - x_{n-1}
    std::vector<double> norm;      // Sigma-norm of x_n
    std::vector<double> dist;      // Sigma-norm distance to predicted, if given
    std::vector<Eigen::VectorXd> iterates;
    Eigen::VectorXd last;
    bool converged = false;
    bool reached_limit = false;
    long steps() const { return static_cast<long>(k.size()); }
};

class Schedule;  // from operators.hpp

GaussTrajectory iterate_projections(const Eigen::VectorXd& x0,
                                    const std::vector<Subspace>& subspaces,
                                    const Schedule& schedule, long max_steps,
                                    const Eigen::VectorXd* predicted = nullptr,
                                    const GaussIterateOptions& opt = {});

// (ab)^n, the exact decay factor of n rounds of two-subspace alternation
// acting on a compatible centered pair with regression slopes a and b.
// ab is clamped into [0, 1]; values outside by more than 1e-12 throw.
double alternation_decay(double a, double b, long n);

// A discretized centered Gaussian vector: a finite product grid with cell
// masses from the jointly Gaussian density, plus the coordinate variables.
struct DiscretizedGaussian {
    std::shared_ptr<const ProbSpace> space;
    std::vector<RandomVar> vars;  // one per coordinate
};

// Midpoint grid of n cells per axis spanning +-5 standard deviations, cell
// masses by 3-point Gauss-Legendre quadrature of the joint density, then
// normalized. cov must be positive definite with at most 4 coordinates.
DiscretizedGaussian discretize_gaussian(const Eigen::MatrixXd& cov, int n);

// Deviation between discretized conditional expectation and the projection's
// affine predictor: probability-weighted mean absolute deviation and the sup
// over positive atoms.
struct CeProjDeviation {
    double weighted = 0.0;
    double max = 0.0;
};

// Discretizes (u, Sigma-orthonormal coordinates of sub) on an n-per-axis
// grid, conditions u's coordinate on the level sets of the others, and
// compares against the projection coefficients.
CeProjDeviation ce_equals_projection(const Eigen::VectorXd& u, const Subspace& sub, int n);

// Three pairwise close lines in R^d that alternating projections traverse
// slowly: unit vectors along 1 + s e1, 1 + s e2, 1 - s e1 with s = 1/sqrt(d),
// under the identity covariance. iterations counts projection steps of the
// periodic schedule 1,2,3 until the Sigma-norm falls to eps.
struct SlowdownResult {
    std::shared_ptr<const GaussianSpace> space;
    std::vector<Subspace> lines;
    long iterations = 0;
};
SlowdownResult slowdown_family(int d, double eps = 1e-6, long max_steps = 2000000);

}  // namespace condex
