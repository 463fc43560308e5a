#include "condex/gaussian.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "condex/operators.hpp"

namespace condex {

namespace {

constexpr double kRankTol = 1e-12;       // relative eigenvalue cutoff for subspace rank
constexpr double kResidualTol = 1e-10;   // projection residual orthogonality check
constexpr double kGridHalfWidth = 5.0;   // grid spans +- this many standard deviations
constexpr long kMaxGridCells = 3000000;

bool same_gauss_space(const Subspace& a, const Subspace& b) {
    if (a.space() == b.space()) return true;
    return a.space()->dim() == b.space()->dim() &&
           a.space()->cov().isApprox(b.space()->cov(), 0.0);
}

}  // namespace

GaussianSpace::GaussianSpace(Eigen::MatrixXd cov) : cov_(std::move(cov)) {
    if (cov_.rows() == 0 || cov_.rows() != cov_.cols())
        throw std::invalid_argument("GaussianSpace: covariance must be square and nonempty");
    if (!cov_.allFinite())
        throw std::invalid_argument("GaussianSpace: covariance has nonfinite entries");
    const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("GaussianSpace: covariance is not symmetric");
    cov_ = ((cov_ + cov_.transpose()) / 2.0).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_);
    const Eigen::VectorXd evals = eig.eigenvalues();
    if (evals.minCoeff() < -1e-10 * scale)
        throw std::invalid_argument("GaussianSpace: covariance has eigenvalue " +
                                    std::to_string(evals.minCoeff()) + ", not PSD");
    if (evals.minCoeff() < 0.0) {
        // Roundoff-level negatives: clip and reconstruct.
        cov_ = eig.eigenvectors() * evals.cwiseMax(0.0).asDiagonal() *
               eig.eigenvectors().transpose();
        cov_ = ((cov_ + cov_.transpose()) / 2.0).eval();
    }
}

double GaussianSpace::inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    if (u.size() != dim() || v.size() != dim())
        throw std::invalid_argument("GaussianSpace: vector dimension mismatch");
    return u.dot(cov_ * v);
}

double GaussianSpace::norm(const Eigen::VectorXd& u) const {
    return std::sqrt(std::max(0.0, inner(u, u)));
}

Subspace::Subspace(std::shared_ptr<const GaussianSpace> space, Eigen::MatrixXd basis)
    : space_(std::move(space)), basis_(std::move(basis)) {
    if (!space_) throw std::invalid_argument("Subspace: null space");
    if (basis_.rows() != space_->dim())
        throw std::invalid_argument("Subspace: basis vectors have dimension " +
                                    std::to_string(basis_.rows()) + ", space has " +
                                    std::to_string(space_->dim()));
    if (!basis_.allFinite())
        throw std::invalid_argument("Subspace: basis has nonfinite entries");

    const int r = static_cast<int>(basis_.cols());
    if (r == 0) {
        onb_ = Eigen::MatrixXd(space_->dim(), 0);
        return;
    }
    // Sigma-orthonormalize through the Gram matrix: directions with eigenvalue
    // at relative level kRankTol or below are Sigma-null and dropped.
    const Eigen::MatrixXd gram = basis_.transpose() * space_->cov() * basis_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        ((gram + gram.transpose()) / 2.0).eval());
    const Eigen::VectorXd evals = eig.eigenvalues();
    const double lmax = evals.maxCoeff();
    std::vector<int> keep;
    for (int i = 0; i < r; ++i)
        if (lmax > 0.0 && evals(i) > kRankTol * lmax) keep.push_back(i);
    onb_ = Eigen::MatrixXd(space_->dim(), static_cast<int>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        onb_.col(static_cast<int>(j)) =
            basis_ * eig.eigenvectors().col(keep[j]) / std::sqrt(evals(keep[j]));
}

Eigen::VectorXd project(const Eigen::VectorXd& u, const Subspace& sub) {
    const auto& gs = *sub.space();
    if (u.size() != gs.dim())
        throw std::invalid_argument("project: vector dimension mismatch");
    if (sub.rank() == 0) return Eigen::VectorXd::Zero(gs.dim());
    const Eigen::MatrixXd& q = sub.onb();
    const Eigen::VectorXd coords = q.transpose() * (gs.cov() * u);
    const Eigen::VectorXd p = q * coords;
    // The residual must be Sigma-orthogonal to the subspace.
    const Eigen::VectorXd leak = q.transpose() * (gs.cov() * (u - p));
    if (leak.cwiseAbs().maxCoeff() > kResidualTol * std::max(1.0, gs.norm(u)))
        throw std::runtime_error("project: residual is not orthogonal to the subspace");
    return p;
}

Eigen::VectorXd projection_coefficients(const Eigen::VectorXd& u, const Subspace& sub) {
    const auto& gs = *sub.space();
    if (u.size() != gs.dim())
        throw std::invalid_argument("projection_coefficients: vector dimension mismatch");
    const int r = static_cast<int>(sub.basis().cols());
    if (r == 0) return Eigen::VectorXd(0);
    // Minimal-norm solution of Gram * alpha = B^T Sigma u via the eigenvalue
    // pseudoinverse, consistent with the rank cut used for the basis.
    const Eigen::MatrixXd gram = sub.basis().transpose() * gs.cov() * sub.basis();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        ((gram + gram.transpose()) / 2.0).eval());
    const Eigen::VectorXd evals = eig.eigenvalues();
    const double lmax = evals.maxCoeff();
    const Eigen::VectorXd rhs = sub.basis().transpose() * (gs.cov() * u);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(r);
    for (int i = 0; i < r; ++i) {
        if (lmax > 0.0 && evals(i) > kRankTol * lmax) {
            const Eigen::VectorXd v = eig.eigenvectors().col(i);
            alpha += v * (v.dot(rhs) / evals(i));
        }
    }
    return alpha;
}

double friedrichs_angle_cos(const Subspace& v, const Subspace& w, double tol) {
    if (!same_gauss_space(v, w))
        throw std::invalid_argument("friedrichs_angle_cos: subspaces of different spaces");
    if (v.rank() == 0 || w.rank() == 0) return 0.0;
    const Eigen::MatrixXd g = v.onb().transpose() * v.space()->cov() * w.onb();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        const double s = svd.singularValues()(i);
        if (s < 1.0 - tol) return std::clamp(s, 0.0, 1.0);
    }
    return 0.0;  // every principal direction is shared
}

Subspace intersect(const Subspace& v, const Subspace& w, double tol) {
    if (!same_gauss_space(v, w))
        throw std::invalid_argument("intersect: subspaces of different spaces");
    const int d = v.space()->dim();
    if (v.rank() == 0 || w.rank() == 0) return Subspace(v.space(), Eigen::MatrixXd(d, 0));
    const Eigen::MatrixXd g = v.onb().transpose() * v.space()->cov() * w.onb();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeFullU);
    std::vector<int> shared;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) >= 1.0 - tol) shared.push_back(i);
    Eigen::MatrixXd basis(d, static_cast<int>(shared.size()));
    for (std::size_t j = 0; j < shared.size(); ++j)
        basis.col(static_cast<int>(j)) = v.onb() * svd.matrixU().col(shared[j]);
    return Subspace(v.space(), std::move(basis));
}

GaussTrajectory iterate_projections(const Eigen::VectorXd& x0,
                                    const std::vector<Subspace>& subspaces,
                                    const Schedule& schedule, long max_steps,
                                    const Eigen::VectorXd* predicted,
                                    const GaussIterateOptions& opt) {
    if (subspaces.empty()) throw std::invalid_argument("iterate_projections: no subspaces");
    const auto& gs = *subspaces[0].space();
    for (const auto& s : subspaces)
        if (!same_gauss_space(s, subspaces[0]))
            throw std::invalid_argument("iterate_projections: subspaces of different spaces");
    if (x0.size() != gs.dim())
        throw std::invalid_argument("iterate_projections: start vector dimension mismatch");
    if (max_steps < 0) throw std::invalid_argument("iterate_projections: negative step count");
    if (schedule.bounded() && max_steps > schedule.length())
        throw std::invalid_argument("iterate_projections: explicit schedule has " +
                                    std::to_string(schedule.length()) + " entries, " +
                                    std::to_string(max_steps) + " steps requested");
    if (predicted && predicted->size() != gs.dim())
        throw std::invalid_argument("iterate_projections: predicted limit dimension mismatch");

    const int K = static_cast<int>(subspaces.size());
    const int window = opt.window > 0 ? opt.window : K;

    GaussTrajectory t;
    t.last = x0;
    if (opt.store_iterates) t.iterates.push_back(x0);
    Eigen::VectorXd x = x0;
    // Same coverage rule as the finite-space iteration: a quiet run counts
    // only after every subspace has taken part in it.
    int quiet = 0;
    std::vector<char> quiet_seen(static_cast<std::size_t>(K), 0);
    int quiet_cover = 0;
    for (long n = 1; n <= max_steps; ++n) {
        const int kn = schedule.at(n);
        if (kn < 1 || kn > K)
            throw std::out_of_range("iterate_projections: schedule emitted index " +
                                    std::to_string(kn) + " but only " + std::to_string(K) +
                                    " subspaces were given");
        Eigen::VectorXd next = project(x, subspaces[kn - 1]);

        const double step = gs.norm(next - x);
        t.k.push_back(kn);
        t.diff.push_back(step);
        t.norm.push_back(gs.norm(next));
        if (predicted) t.dist.push_back(gs.norm(next - *predicted));
        if (opt.store_iterates) t.iterates.push_back(next);
        x = std::move(next);

        if (step <= opt.stop_eps) {
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

double alternation_decay(double a, double b, long n) {
    if (n < 0) throw std::invalid_argument("alternation_decay: negative round count");
    double ab = a * b;
    if (ab < -1e-12 || ab > 1.0 + 1e-12)
        throw std::invalid_argument("alternation_decay: slope product " + std::to_string(ab) +
                                    " outside [0, 1]");
    ab = std::clamp(ab, 0.0, 1.0);
    return std::pow(ab, static_cast<double>(n));
}

DiscretizedGaussian discretize_gaussian(const Eigen::MatrixXd& cov, int n) {
    const int m = static_cast<int>(cov.rows());
    if (m < 1 || m > 4)
        throw std::invalid_argument("discretize_gaussian: supports 1 to 4 coordinates");
    if (cov.cols() != m)
        throw std::invalid_argument("discretize_gaussian: covariance must be square");
    if (n < 2) throw std::invalid_argument("discretize_gaussian: need at least 2 cells per axis");
    long cells = 1;
    for (int k = 0; k < m; ++k) {
        cells *= n;
        if (cells > kMaxGridCells)
            throw std::invalid_argument("discretize_gaussian: grid would exceed " +
                                        std::to_string(kMaxGridCells) + " cells");
    }

    const Eigen::MatrixXd c = ((cov + cov.transpose()) / 2.0).eval();
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("discretize_gaussian: covariance must be positive definite");
    const Eigen::MatrixXd cinv = llt.solve(Eigen::MatrixXd::Identity(m, m));

    std::vector<double> h(m), lo(m);
    for (int k = 0; k < m; ++k) {
        const double sd = std::sqrt(c(k, k));
        h[k] = 2.0 * kGridHalfWidth * sd / n;
        lo[k] = -kGridHalfWidth * sd;
    }

    // 3-point Gauss-Legendre rule per axis, weights scaled to sum to 1 per cell.
    const double gl_node = std::sqrt(0.6);
    const double gl_off[3] = {-gl_node, 0.0, gl_node};
    const double gl_w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

    long subcells = 1;
    for (int k = 0; k < m; ++k) subcells *= 3;

    std::vector<double> mass(static_cast<std::size_t>(cells), 0.0);
    std::vector<std::vector<double>> coord(m, std::vector<double>(static_cast<std::size_t>(cells)));
    std::vector<int> idx(m, 0);
    Eigen::VectorXd z(m);
    for (long cell = 0; cell < cells; ++cell) {
        double acc = 0.0;
        for (long sub = 0; sub < subcells; ++sub) {
            long rest = sub;
            double wq = 1.0;
            for (int k = 0; k < m; ++k) {
                const int node = static_cast<int>(rest % 3);
                rest /= 3;
                wq *= gl_w[node];
                z(k) = lo[k] + (idx[k] + 0.5) * h[k] + gl_off[node] * h[k] / 2.0;
            }
            acc += wq * std::exp(-0.5 * z.dot(cinv * z));
        }
        mass[static_cast<std::size_t>(cell)] = acc;
        for (int k = 0; k < m; ++k)
            coord[k][static_cast<std::size_t>(cell)] = lo[k] + (idx[k] + 0.5) * h[k];
        for (int k = 0; k < m; ++k) {
            if (++idx[k] < n) break;
            idx[k] = 0;
        }
    }

    DiscretizedGaussian out;
    out.space = std::make_shared<const ProbSpace>(normalized_weights(std::move(mass)));
    out.vars.reserve(m);
    for (int k = 0; k < m; ++k) out.vars.emplace_back(out.space, std::move(coord[k]));
    return out;
}

CeProjDeviation ce_equals_projection(const Eigen::VectorXd& u, const Subspace& sub, int n) {
    const auto& gs = *sub.space();
    if (u.size() != gs.dim())
        throw std::invalid_argument("ce_equals_projection: vector dimension mismatch");
    const int r = sub.rank();
    const double c00 = gs.inner(u, u);
    CeProjDeviation out;

    if (r == 0) {
        if (c00 <= 0.0) return out;  // u is Sigma-null, everything is 0
        // Projection is 0 and the conditioning field is trivial; the deviation
        // is |E(W0)|, which the symmetric grid makes vanish.
        DiscretizedGaussian dg = discretize_gaussian((Eigen::MatrixXd(1, 1) << c00).finished(), n);
        out.weighted = std::abs(expectation(dg.vars[0]));
        out.max = out.weighted;
        return out;
    }

    const Eigen::VectorXd gamma = sub.onb().transpose() * (gs.cov() * u);
    const double sigma2 = c00 - gamma.squaredNorm();

    std::shared_ptr<const ProbSpace> space;
    RandomVar* w0 = nullptr;
    std::vector<RandomVar> vars;
    if (sigma2 <= 1e-12 * std::max(c00, 1e-300)) {
        // u lies in the subspace a.s.; grid the coordinates alone and form W0
        // from them, keeping the joint law nondegenerate.
        DiscretizedGaussian dg = discretize_gaussian(Eigen::MatrixXd::Identity(r, r), n);
        space = dg.space;
        vars = std::move(dg.vars);
        std::vector<double> w0v(static_cast<std::size_t>(space->atom_count()), 0.0);
        for (int i = 0; i < space->atom_count(); ++i) {
            double s = 0.0;
            for (int k = 0; k < r; ++k) s += gamma(k) * vars[static_cast<std::size_t>(k)].value(i);
            w0v[static_cast<std::size_t>(i)] = s;
        }
        vars.insert(vars.begin(), RandomVar(space, std::move(w0v)));
    } else {
        Eigen::MatrixXd joint(r + 1, r + 1);
        joint(0, 0) = c00;
        joint.block(0, 1, 1, r) = gamma.transpose();
        joint.block(1, 0, r, 1) = gamma;
        joint.block(1, 1, r, r) = Eigen::MatrixXd::Identity(r, r);
        DiscretizedGaussian dg = discretize_gaussian(joint, n);
        space = dg.space;
        vars = std::move(dg.vars);
    }
    w0 = &vars[0];

    std::vector<SigmaField> fields;
    for (int k = 1; k <= r; ++k) fields.push_back(sigma_of_rv(vars[static_cast<std::size_t>(k)]));
    const RandomVar ce = cond_exp(*w0, sigma_join(fields));

    double weighted = 0.0, worst = 0.0;
    for (int i = 0; i < space->atom_count(); ++i) {
        double pred = 0.0;
        for (int k = 0; k < r; ++k) pred += gamma(k) * vars[static_cast<std::size_t>(k + 1)].value(i);
        const double dev = std::abs(ce.value(i) - pred);
        weighted += space->weight(i) * dev;
        if (!space->is_null(i)) worst = std::max(worst, dev);
    }
    out.weighted = weighted;
    out.max = worst;
    return out;
}

SlowdownResult slowdown_family(int d, double eps, long max_steps) {
    if (d < 2) throw std::invalid_argument("slowdown_family: dimension must be >= 2");
    if (eps <= 0.0) throw std::invalid_argument("slowdown_family: eps must be positive");
    auto gs = std::make_shared<const GaussianSpace>(Eigen::MatrixXd::Identity(d, d));
    const double s = 1.0 / std::sqrt(static_cast<double>(d));

    SlowdownResult res;
    res.space = gs;
    Eigen::VectorXd b = Eigen::VectorXd::Ones(d);
    b(0) += s;
    res.lines.emplace_back(gs, b / gs->norm(b));
    b = Eigen::VectorXd::Ones(d);
    b(1) += s;
    res.lines.emplace_back(gs, b / gs->norm(b));
    b = Eigen::VectorXd::Ones(d);
    b(0) -= s;
    res.lines.emplace_back(gs, b / gs->norm(b));

    const Eigen::VectorXd x0 = res.lines[0].onb().col(0);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
    GaussIterateOptions opt;
    opt.stop_dist = eps;
    GaussTrajectory t = iterate_projections(x0, res.lines, Schedule::periodic({1, 2, 3}),
                                            max_steps, &zero, opt);
    if (!t.reached_limit)
        throw std::runtime_error("slowdown_family: norm did not reach eps in " +
                                 std::to_string(max_steps) + " steps");
    res.iterations = t.steps();
    return res;
}

}  // namespace condex
