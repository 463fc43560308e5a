#include "condex/compat.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace condex {

namespace {

// Variance below this (relative to the second moment) means the regressor is
// constant on the positive atoms and the slope is undefined.
constexpr double kDegenerateVarTol = 1e-28;

double max_abs_dev(const RandomVar& a, const RandomVar& b) {
    return linf_dist(a, b);
}

}  // namespace

double variance(const RandomVar& x) {
    const double m = expectation(x);
    double v = 0.0;
    const auto& w = x.space()->weights();
    for (int i = 0; i < x.space()->atom_count(); ++i) {
        const double d = x.value(i) - m;
        v += w[i] * d * d;
    }
    return v;
}

double covariance(const RandomVar& x, const RandomVar& y) {
    require_same_space(x, y);
    const double mx = expectation(x);
    const double my = expectation(y);
    double c = 0.0;
    const auto& w = x.space()->weights();
    for (int i = 0; i < x.space()->atom_count(); ++i) {
        c += w[i] * (x.value(i) - mx) * (y.value(i) - my);
    }
    return c;
}

Regress regress_ce(const RandomVar& y, const RandomVar& x) {
    require_same_space(x, y);
    const double varx = variance(x);
    if (varx <= kDegenerateVarTol * std::max(1.0, moment(x, 2))) {
        throw std::invalid_argument("regress_ce: regressor has zero variance");
    }
    Regress r;
    r.slope = covariance(x, y) / varx;
    r.intercept = expectation(y) - r.slope * expectation(x);
    const RandomVar ce = cond_exp(y, sigma_of_rv(x));
    double dev = 0.0;
    for (int i = 0; i < x.space()->atom_count(); ++i) {
        if (x.space()->is_null(i)) continue;
        dev = std::max(dev, std::abs(ce.value(i) - (r.slope * x.value(i) + r.intercept)));
    }
    r.residual = dev;
    return r;
}

CompatReport compat_report(const RandomVar& x, const RandomVar& y, double tol) {
    require_same_space(x, y);
    CompatReport rep;
    rep.tol = tol;

    const Regress yx = regress_ce(y, x);
    const Regress xy = regress_ce(x, y);
    rep.a = yx.slope;
    rep.c = yx.intercept;
    rep.b = xy.slope;
    rep.d = xy.intercept;
    rep.residual_y_on_x = yx.residual;
    rep.residual_x_on_y = xy.residual;
    rep.compatible = yx.residual <= tol && xy.residual <= tol;

    const double varx = variance(x);
    const double vary = variance(y);
    const double cov = covariance(x, y);
    rep.ab = rep.a * rep.b;
    rep.rho = cov / std::sqrt(varx * vary);
    rep.rho2 = rep.rho * rep.rho;
    rep.ab_rho2_dev = std::abs(rep.ab - rep.rho2);
    rep.xy_identity_dev =
        std::max(std::abs(cov - rep.a * varx), std::abs(cov - rep.b * vary));

    const auto space = x.space();
    double coll = 0.0;
    for (int i = 0; i < space->atom_count(); ++i) {
        if (space->is_null(i)) continue;
        coll = std::max(coll, std::abs(y.value(i) - (rep.a * x.value(i) + rep.c)));
    }
    rep.collinearity_dev = coll;

    // On the completed meet of sigma(X) and sigma(Y), conditioning should
    // collapse to the plain expectation whenever ab < 1.
    const SigmaField meet = completion(sigma_meet(completion(sigma_of_rv(x), *space),
                                                  completion(sigma_of_rv(y), *space)),
                                       *space);
    const RandomVar cx = cond_exp(x, meet);
    const RandomVar cy = cond_exp(y, meet);
    const double ex = expectation(x);
    const double ey = expectation(y);
    double dx = 0.0, dy = 0.0;
    for (int i = 0; i < space->atom_count(); ++i) {
        if (space->is_null(i)) continue;
        dx = std::max(dx, std::abs(cx.value(i) - ex));
        dy = std::max(dy, std::abs(cy.value(i) - ey));
    }
    rep.meet_dev_x = dx;
    rep.meet_dev_y = dy;
    return rep;
}

DeepUncorrReport deep_uncorrelated(const RandomVar& x, const RandomVar& y, double tol) {
    require_same_space(x, y);
    DeepUncorrReport rep;
    const RandomVar ex_given_y = cond_exp(x, sigma_of_rv(y));
    const RandomVar ey_given_x = cond_exp(y, sigma_of_rv(x));
    const double ex = expectation(x);
    const double ey = expectation(y);
    double dx = 0.0, dy = 0.0;
    for (int i = 0; i < x.space()->atom_count(); ++i) {
        if (x.space()->is_null(i)) continue;
        dx = std::max(dx, std::abs(ex_given_y.value(i) - ex));
        dy = std::max(dy, std::abs(ey_given_x.value(i) - ey));
    }
    rep.dev_x_given_y = dx;
    rep.dev_y_given_x = dy;
    rep.deeply_uncorrelated = dx <= tol && dy <= tol;
    return rep;
}

FamilyCompat family_compat(const RandomVar& x0, const std::vector<RandomVar>& family) {
    if (family.empty()) {
        throw std::invalid_argument("family_compat: family is empty");
    }
    for (const auto& f : family) require_same_space(x0, f);

    const auto space = x0.space();
    const int n = space->atom_count();
    const int ncols = static_cast<int>(family.size()) + 1;

    std::vector<SigmaField> fields;
    fields.reserve(family.size());
    for (const auto& f : family) fields.push_back(sigma_of_rv(f));
    const RandomVar target = cond_exp(x0, sigma_join(fields));

    // Weighted least squares: scale rows by sqrt(p_i), keep only positive atoms.
    std::vector<int> rows;
    for (int i = 0; i < n; ++i) {
        if (!space->is_null(i)) rows.push_back(i);
    }
    Eigen::MatrixXd A(static_cast<int>(rows.size()), ncols);
    Eigen::VectorXd rhs(static_cast<int>(rows.size()));
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
        const int i = rows[r];
        const double s = std::sqrt(space->weight(i));
        A(r, 0) = s;
        for (int j = 0; j < static_cast<int>(family.size()); ++j) {
            A(r, j + 1) = s * family[j].value(i);
        }
        rhs(r) = s * target.value(i);
    }

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    FamilyCompat out;
    out.rank = static_cast<int>(cod.rank());
    out.rank_deficient = out.rank < ncols;
    const Eigen::VectorXd beta = cod.solve(rhs);
    out.coeffs.assign(beta.data(), beta.data() + beta.size());

    double dev = 0.0;
    for (const int i : rows) {
        double fit = beta(0);
        for (int j = 0; j < static_cast<int>(family.size()); ++j) {
            fit += beta(j + 1) * family[j].value(i);
        }
        dev = std::max(dev, std::abs(target.value(i) - fit));
    }
    out.residual = dev;
    return out;
}

std::vector<RandomVar> nested_ce_sequence(const RandomVar& x0,
                                          const std::vector<RandomVar>& family) {
    if (family.empty()) {
        throw std::invalid_argument("nested_ce_sequence: family is empty");
    }
    std::vector<RandomVar> out;
    out.reserve(family.size());
    std::vector<SigmaField> fields;
    for (const auto& f : family) {
        require_same_space(x0, f);
        fields.push_back(sigma_of_rv(f));
        out.push_back(cond_exp(x0, sigma_join(fields)));
    }
    return out;
}

MartingaleCheck martingale_check(const std::vector<RandomVar>& family, double tol) {
    if (family.empty()) {
        throw std::invalid_argument("martingale_check: family is empty");
    }
    MartingaleCheck rep;
    rep.is_martingale = true;
    if (family.size() == 1) return rep;

    RandomVar partial = family[0];
    std::vector<SigmaField> fields{sigma_of_rv(family[0])};
    for (std::size_t m = 1; m < family.size(); ++m) {
        require_same_space(family[0], family[m]);
        const RandomVar next = partial + family[m];
        const RandomVar back = cond_exp(next, sigma_join(fields));
        rep.max_dev = std::max(rep.max_dev, max_abs_dev(back, partial));
        fields.push_back(sigma_of_rv(family[m]));
        partial = next;
    }
    rep.is_martingale = rep.max_dev <= tol;
    return rep;
}

PairInstance indicator_counterexample() {
    auto space = std::make_shared<const ProbSpace>(std::vector<double>{0.2, 0.1, 0.2, 0.5});
    PairInstance inst{space,
                      RandomVar(space, {1.0, 1.0, 1.0, 0.0}),
                      RandomVar(space, {1.0, 0.0, -1.0, 0.0})};
    return inst;
}

PairInstance disc_counterexample(int n) {
    if (n < 2) throw std::invalid_argument("disc_counterexample: grid size must be >= 2");
    std::vector<double> xs, ys;
    for (int i = 0; i < n; ++i) {
        const double cx = -1.0 + (2.0 * i + 1.0) / n;
        for (int j = 0; j < n; ++j) {
            const double cy = -1.0 + (2.0 * j + 1.0) / n;
            if (cx * cx + cy * cy <= 1.0) {
                xs.push_back(cx);
                ys.push_back(cy);
            }
        }
    }
    auto space = std::make_shared<const ProbSpace>(
        normalized_weights(std::vector<double>(xs.size(), 1.0)));
    return PairInstance{space, RandomVar(space, std::move(xs)), RandomVar(space, std::move(ys))};
}

double tv_independence_gap(const RandomVar& x, const RandomVar& y) {
    require_same_space(x, y);
    std::map<double, double> px, py;
    std::map<std::pair<double, double>, double> pxy;
    const auto space = x.space();
    for (int i = 0; i < space->atom_count(); ++i) {
        const double w = space->weight(i);
        px[x.value(i)] += w;
        py[y.value(i)] += w;
        pxy[{x.value(i), y.value(i)}] += w;
    }
    double tv = 0.0;
    for (const auto& [vx, wx] : px) {
        for (const auto& [vy, wy] : py) {
            const auto it = pxy.find({vx, vy});
            const double joint = it == pxy.end() ? 0.0 : it->second;
            tv += std::abs(joint - wx * wy);
        }
    }
    return 0.5 * tv;
}

}  // namespace condex
