#include "condex/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "condex/atomic_ext.hpp"
#include "condex/compat.hpp"
#include "condex/gaussian.hpp"
#include "condex/operators.hpp"
#include "condex/prob_space.hpp"
#include "condex/sampler.hpp"

namespace condex {

namespace {

constexpr std::uint64_t kSeedProducts = 20240817;
constexpr std::uint64_t kSeedPairs = 90210;
constexpr std::uint64_t kSeedSplits = 777001;
constexpr std::uint64_t kSeedSampler = 424243;

// chi-square 0.99 quantile at 49 degrees of freedom
constexpr double kChi2Crit49 = 74.91947430847816;

double u01(std::mt19937_64& eng) { return (eng() >> 11) * 0x1.0p-53; }

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Norm and fourth-moment sequences of one iteration run, start value included.
struct AuditSeq {
    std::vector<double> n1, n2, n4, ninf, m4;
};

void pool_trajectory(std::vector<AuditSeq>& pool, const RandomVar& x0, const Trajectory& t) {
    AuditSeq s;
    s.n1.push_back(lp_norm(x0, 1.0));
    s.n2.push_back(lp_norm(x0, 2.0));
    s.n4.push_back(lp_norm(x0, 4.0));
    s.ninf.push_back(linf_norm(x0));
    s.m4.push_back(moment(x0, 4));
    s.n1.insert(s.n1.end(), t.n1.begin(), t.n1.end());
    s.n2.insert(s.n2.end(), t.n2.begin(), t.n2.end());
    s.n4.insert(s.n4.end(), t.n4.begin(), t.n4.end());
    s.ninf.insert(s.ninf.end(), t.ninf.begin(), t.ninf.end());
    s.m4.insert(s.m4.end(), t.m4.begin(), t.m4.end());
    pool.push_back(std::move(s));
}

std::shared_ptr<const ProbSpace> random_space(std::mt19937_64& eng, int n, bool allow_nulls) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (auto& v : w) v = 0.5 + u01(eng);
    if (allow_nulls && eng() % 3 == 0) {
        const int zeros = static_cast<int>(eng() % static_cast<std::uint64_t>(n / 2 + 1));
        for (int z = 0; z < zeros; ++z) w[eng() % static_cast<std::uint64_t>(n)] = 0.0;
    }
    return std::make_shared<const ProbSpace>(normalized_weights(std::move(w)));
}

SigmaField random_field(std::mt19937_64& eng, int n, int max_blocks) {
    const int b = 1 + static_cast<int>(eng() % static_cast<std::uint64_t>(max_blocks));
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (auto& l : labels) l = static_cast<int>(eng() % static_cast<std::uint64_t>(b));
    return SigmaField::from_labels(labels);
}

RandomVar random_rv(std::mt19937_64& eng, const std::shared_ptr<const ProbSpace>& sp) {
    std::vector<double> v(static_cast<std::size_t>(sp->atom_count()));
    for (auto& x : v) x = 2.0 * u01(eng) - 1.0;
    return RandomVar(sp, std::move(v));
}

// X = +-1, Y = +-1 with P(X = Y) = (1 + rho)/2: centered, unit-variance up to
// roundoff, and conditional expectations exactly affine with slopes rho.
PairInstance sign_pair(double rho) {
    const double same = (1.0 + rho) / 4.0;
    const double diff = (1.0 - rho) / 4.0;
    auto sp = std::make_shared<const ProbSpace>(std::vector<double>{same, diff, diff, same});
    return PairInstance{sp, RandomVar(sp, {1.0, 1.0, -1.0, -1.0}),
                        RandomVar(sp, {1.0, -1.0, 1.0, -1.0})};
}

double unit_cdf(double x) { return std::clamp(x, 0.0, 1.0); }

CriterionResult criterion_products_converge(std::vector<AuditSeq>& pool) {
    CriterionResult r;
    r.name = "random-schedule products reach the meet conditional";
    const auto t0 = std::chrono::steady_clock::now();
    const int kInstances = 200;
    const long kMaxSteps = 10000;
    int failures = 0;
    long worst_steps = 0;
    double worst_dist = 0.0;

    for (int inst = 0; inst < kInstances; ++inst) {
        std::mt19937_64 eng(kSeedProducts + static_cast<std::uint64_t>(inst));
        const int n = 2 + static_cast<int>(eng() % 63);
        const auto sp = random_space(eng, n, true);
        const int kf = 1 + static_cast<int>(eng() % 5);
        std::vector<SigmaField> fields;
        for (int k = 0; k < kf; ++k) fields.push_back(random_field(eng, n, 8));
        const RandomVar x0 = random_rv(eng, sp);
        const RandomVar pred = limit_predict(x0, fields);

        IterateOptions opt;
        opt.stop_eps = 0.0;  // stop on distance to the predicted limit only
        opt.stop_dist = 1e-10;
        const Schedule sched =
            Schedule::random_rounds(kf, kSeedProducts * 1000003ULL + static_cast<std::uint64_t>(inst));
        const Trajectory t = iterate(x0, fields, sched, kMaxSteps, &pred, opt);
        pool_trajectory(pool, x0, t);

        const double final_dist = linf_dist(t.last, pred);
        worst_steps = std::max(worst_steps, static_cast<long>(t.steps()));
        worst_dist = std::max(worst_dist, final_dist);
        if (!(final_dist <= 1e-10)) ++failures;
    }
    const double secs = elapsed_s(t0);
    std::ostringstream d;
    d << kInstances << " instances, worst " << worst_steps << " steps, worst final distance "
      << worst_dist << ", " << secs << "s";
    r.detail = d.str();
    r.pass = failures == 0 && worst_steps <= kMaxSteps && secs < 30.0;
    return r;
}

CriterionResult criterion_pair_regression(void) {
    CriterionResult r;
    r.name = "pair regression identities and meet collapse";
    std::mt19937_64 eng(kSeedPairs);

    double worst_i = 0.0;    // |ab - rho^2| over every pair
    double worst_ii = 0.0;   // collinearity when ab = 1
    double worst_iii = 0.0;  // meet deviation when ab < 1
    double worst_iv = 0.0;   // slopes of independent pairs
    double worst_ab_high = 0.0;
    int n_ii = 0, n_iii = 0;

    auto absorb = [&](const CompatReport& rep, bool independent) {
        worst_i = std::max(worst_i, rep.ab_rho2_dev);
        worst_ab_high = std::max(worst_ab_high, rep.ab - 1.0);
        if (rep.ab >= 1.0 - 1e-6) {
            ++n_ii;
            worst_ii = std::max(worst_ii, rep.collinearity_dev);
        }
        if (rep.ab < 1.0 - 1e-6) {
            ++n_iii;
            worst_iii = std::max(worst_iii, std::max(rep.meet_dev_x, rep.meet_dev_y));
        }
        if (independent)
            worst_iv = std::max(worst_iv, std::max(std::abs(rep.a), std::abs(rep.b)));
    };

    // Two-point pairs: every one is exactly compatible with |rho| = 1.
    for (int i = 0; i < 350; ++i) {
        const double p0 = 0.05 + 0.9 * u01(eng);
        auto sp = std::make_shared<const ProbSpace>(std::vector<double>{p0, 1.0 - p0});
        const double x0 = 4.0 * u01(eng) - 2.0;
        const double y0 = 4.0 * u01(eng) - 2.0;
        const double sx = eng() % 2 == 0 ? 1.0 : -1.0;
        const double sy = eng() % 2 == 0 ? 1.0 : -1.0;
        const RandomVar x(sp, {x0, x0 + sx * (0.5 + 2.0 * u01(eng))});
        const RandomVar y(sp, {y0, y0 + sy * (0.5 + 2.0 * u01(eng))});
        absorb(compat_report(x, y), false);
    }

    // Discretized Gaussian pairs: ab = rho^2 < 1 and a trivial completed meet.
    for (int i = 0; i < 100; ++i) {
        const int n = 31 + static_cast<int>(eng() % 11);
        const double rho = 1.9 * u01(eng) - 0.95;
        Eigen::MatrixXd cov(2, 2);
        cov << 1.0, rho, rho, 1.0;
        const DiscretizedGaussian dg = discretize_gaussian(cov, n);
        absorb(compat_report(dg.vars[0], dg.vars[1]), false);
    }

    // Collinear pairs: Y = alpha X + beta, so ab = 1 exactly.
    for (int i = 0; i < 50; ++i) {
        const int n = 3 + static_cast<int>(eng() % 8);
        const auto sp = random_space(eng, n, false);
        std::vector<double> xv(static_cast<std::size_t>(n));
        for (auto& v : xv) v = 4.0 * u01(eng) - 2.0;
        const double alpha = (eng() % 2 == 0 ? 1.0 : -1.0) * (0.5 + 1.5 * u01(eng));
        const double beta = 2.0 * u01(eng) - 1.0;
        std::vector<double> yv(xv.size());
        for (std::size_t j = 0; j < xv.size(); ++j) yv[j] = alpha * xv[j] + beta;
        absorb(compat_report(RandomVar(sp, std::move(xv)), RandomVar(sp, std::move(yv))), false);
    }

    // Product pairs: exactly independent, so both slopes vanish.
    for (int i = 0; i < 50; ++i) {
        const int m = 2 + static_cast<int>(eng() % 5);
        const int k = 2 + static_cast<int>(eng() % 5);
        std::vector<double> pm(static_cast<std::size_t>(m)), qk(static_cast<std::size_t>(k));
        for (auto& v : pm) v = 0.5 + u01(eng);
        for (auto& v : qk) v = 0.5 + u01(eng);
        pm = normalized_weights(std::move(pm));
        qk = normalized_weights(std::move(qk));
        std::vector<double> w, xv, yv;
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < k; ++b) {
                w.push_back(pm[static_cast<std::size_t>(a)] * qk[static_cast<std::size_t>(b)]);
                xv.push_back(a + 0.5 * u01(eng));
                yv.push_back(b + 0.5 * u01(eng));
            }
        // Values vary within a row/column but X must stay a function of the
        // row and Y of the column, so reuse the first draw per index.
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < k; ++b) {
                xv[static_cast<std::size_t>(a * k + b)] = xv[static_cast<std::size_t>(a * k)];
                yv[static_cast<std::size_t>(a * k + b)] = yv[static_cast<std::size_t>(b)];
            }
        auto sp = std::make_shared<const ProbSpace>(std::move(w));
        absorb(compat_report(RandomVar(sp, std::move(xv)), RandomVar(sp, std::move(yv))), true);
    }

    std::ostringstream d;
    d << "|ab-rho2| " << worst_i << ", collinearity " << worst_ii << " (" << n_ii
      << " pairs), meet dev " << worst_iii << " (" << n_iii << " pairs), independent slopes "
      << worst_iv;
    r.detail = d.str();
    r.pass = worst_i <= 1e-10 && worst_ii <= 1e-10 && worst_iii <= 1e-10 && worst_iv <= 1e-12 &&
             worst_ab_high <= 1e-12 && n_ii >= 400 && n_iii >= 150;
    return r;
}

CriterionResult criterion_counterexamples(void) {
    CriterionResult r;
    r.name = "uncorrelated yet dependent counterexamples";

    const PairInstance ind = indicator_counterexample();
    double exy2 = 0.0;
    for (int i = 0; i < ind.space->atom_count(); ++i)
        exy2 += ind.space->weight(i) * ind.x.value(i) * ind.y.value(i) * ind.y.value(i);
    const double pa = ind.space->weight(0) + ind.space->weight(1);
    const double pab = ind.space->weight(1);
    const double identity_dev = std::abs(exy2 - 2.0 * (pa - pab));

    const double rho = covariance(ind.x, ind.y) /
                       std::sqrt(variance(ind.x) * variance(ind.y));
    const DeepUncorrReport ind_rep = deep_uncorrelated(ind.x, ind.y);

    const PairInstance disc = disc_counterexample(400);
    const DeepUncorrReport disc_rep = deep_uncorrelated(disc.x, disc.y, 5e-3);
    const double tv = tv_independence_gap(disc.x, disc.y);

    std::ostringstream d;
    d << "product-moment dev " << identity_dev << ", |rho| " << std::abs(rho)
      << ", conditional-mean shift " << ind_rep.dev_x_given_y << ", disc deviations ("
      << disc_rep.dev_x_given_y << ", " << disc_rep.dev_y_given_x << "), TV gap " << tv;
    r.detail = d.str();
    r.pass = identity_dev <= 1e-15 && std::abs(rho) <= 1e-15 &&
             !ind_rep.deeply_uncorrelated && ind_rep.dev_x_given_y >= 0.3 &&
             disc_rep.deeply_uncorrelated && tv >= 0.05;
    return r;
}

CriterionResult criterion_alternation(std::vector<AuditSeq>& pool) {
    CriterionResult r;
    r.name = "two-field alternation decays at the slope product";
    double worst = 0.0;

    for (const double rho : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const PairInstance pair = sign_pair(rho);
        const CompatReport rep = compat_report(pair.x, pair.y);

        // Finite-space engine: explicit rounds and the iterate() trajectory.
        const std::vector<SigmaField> fields{sigma_of_rv(pair.x), sigma_of_rv(pair.y)};
        IterateOptions opt;
        opt.store_iterates = true;
        opt.stop_eps = 0.0;
        const Trajectory t =
            iterate(pair.x, fields, Schedule::periodic({2, 1}), 40, nullptr, opt);
        pool_trajectory(pool, pair.x, t);

        // Gaussian engine: coordinate lines of the correlated pair.
        auto gs = std::make_shared<const GaussianSpace>(
            (Eigen::MatrixXd(2, 2) << 1.0, rho, rho, 1.0).finished());
        std::vector<Subspace> lines;
        lines.emplace_back(gs, (Eigen::MatrixXd(2, 1) << 1.0, 0.0).finished());
        lines.emplace_back(gs, (Eigen::MatrixXd(2, 1) << 0.0, 1.0).finished());
        GaussIterateOptions gopt;
        gopt.store_iterates = true;
        gopt.stop_eps = 0.0;
        const GaussTrajectory gt =
            iterate_projections((Eigen::VectorXd(2) << 1.0, 0.0).finished(), lines,
                                Schedule::periodic({2, 1}), 40, nullptr, gopt);

        for (int k = 1; k <= 20; ++k) {
            const double decay = alternation_decay(rep.a, rep.b, k);
            const RandomVar direct = two_field_alternation(pair.x, pair.y, k);
            const RandomVar& stepped = t.iterates[static_cast<std::size_t>(2 * k)];
            const Eigen::VectorXd& gvec = gt.iterates[static_cast<std::size_t>(2 * k)];
            for (int i = 0; i < 4; ++i) {
                const double want = decay * pair.x.value(i);
                worst = std::max(worst, std::abs(direct.value(i) - want));
                worst = std::max(worst, std::abs(stepped.value(i) - want));
            }
            worst = std::max(worst, std::abs(gvec(0) - decay));
            worst = std::max(worst, std::abs(gvec(1)));
        }
    }

    std::ostringstream d;
    d << "worst deviation across engines " << worst;
    r.detail = d.str();
    r.pass = worst <= 1e-12;
    return r;
}

CriterionResult criterion_ce_matches_projection(void) {
    CriterionResult r;
    r.name = "discretized conditioning matches the projection";
    double worst_final = 0.0;
    double worst_increase = -1.0;
    bool monotone = true;

    for (const double rho : {0.0, 0.3, -0.3, 0.5, -0.5, 0.7, -0.7, 0.9, -0.9}) {
        auto gs = std::make_shared<const GaussianSpace>(
            (Eigen::MatrixXd(2, 2) << 1.0, rho, rho, 1.0).finished());
        const Subspace line(gs, (Eigen::MatrixXd(2, 1) << 0.0, 1.0).finished());
        const Eigen::VectorXd u = (Eigen::VectorXd(2) << 1.0, 0.0).finished();

        double prev = -1.0;
        for (const int n : {51, 101, 201}) {
            const CeProjDeviation dev = ce_equals_projection(u, line, n);
            if (prev >= 0.0 && dev.weighted > std::max(prev, 1e-12)) {
                monotone = false;
                worst_increase = std::max(worst_increase, dev.weighted - prev);
            }
            prev = dev.weighted;
            if (n == 201) worst_final = std::max(worst_final, dev.weighted);
        }
    }

    std::ostringstream d;
    d << "worst weighted deviation at n=201: " << worst_final
      << (monotone ? ", refinement monotone" : ", refinement NOT monotone");
    r.detail = d.str();
    r.pass = worst_final <= 0.05 && monotone;
    return r;
}

CriterionResult criterion_digit_channels(void) {
    CriterionResult r;
    r.name = "digit channels carry independent uniforms";

    bool exact_ok = true;
    for (const int b : {8, 12, 16}) {
        const ChannelEnumeration e = enumerate_two_channels(b);
        exact_ok = exact_ok && e.product_uniform && e.marginals_uniform;
    }

    const int kBits = 128;
    const std::size_t kSamples = 100000;
    std::mt19937_64 eng(kSeedSampler);
    std::vector<std::vector<double>> h(3, std::vector<double>(kSamples));
    std::vector<double> g1(kSamples);
    std::vector<std::uint8_t> bits(kBits);
    for (std::size_t s = 0; s < kSamples; ++s) {
        const std::uint64_t w0 = eng(), w1 = eng();
        for (int i = 0; i < 64; ++i) {
            bits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((w0 >> (63 - i)) & 1u);
            bits[static_cast<std::size_t>(64 + i)] =
                static_cast<std::uint8_t>((w1 >> (63 - i)) & 1u);
        }
        const BitSource src(bits);
        const std::vector<double> hs = psi(src, 3);
        for (int k = 0; k < 3; ++k) h[static_cast<std::size_t>(k)][s] = hs[static_cast<std::size_t>(k)];
        g1[s] = gaussianize(src, 1);
    }

    const double ks_crit = ks_critical(0.01, kSamples);
    double worst_ks = 0.0;
    for (int k = 0; k < 3; ++k)
        worst_ks = std::max(worst_ks, ks_statistic(h[static_cast<std::size_t>(k)], unit_cdf));
    const double ks_gauss = ks_statistic(g1, phi);

    double worst_chi2 = 0.0, worst_corr = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
            worst_chi2 = std::max(worst_chi2, chi2_independence_8x8(h[static_cast<std::size_t>(a)],
                                                                    h[static_cast<std::size_t>(b)])
                                                  .statistic);
            worst_corr = std::max(worst_corr, std::abs(pearson_corr(h[static_cast<std::size_t>(a)],
                                                                    h[static_cast<std::size_t>(b)])));
        }

    std::ostringstream d;
    d << "exact enumeration " << (exact_ok ? "uniform" : "NOT uniform") << ", KS "
      << worst_ks << " (gauss " << ks_gauss << ", crit " << ks_crit << "), chi2 " << worst_chi2
      << " (crit " << kChi2Crit49 << "), |corr| " << worst_corr;
    r.detail = d.str();
    r.pass = exact_ok && worst_ks <= ks_crit && ks_gauss <= ks_crit &&
             worst_chi2 <= kChi2Crit49 && worst_corr <= 0.02;
    return r;
}

CriterionResult criterion_restriction_transfer(void) {
    CriterionResult r;
    r.name = "restriction transfer identities hold";
    double worst_single = 0.0, worst_norm = 0.0, worst_stepwise = 0.0;

    for (int inst = 0; inst < 200; ++inst) {
        std::mt19937_64 eng(kSeedSplits + static_cast<std::uint64_t>(inst));
        const int n = 2 + static_cast<int>(eng() % 39);
        const auto sp = random_space(eng, n, true);
        std::vector<int> c;
        for (int a = 0; a < n; ++a)
            if (eng() % 2 == 0) c.push_back(a);
        if (c.empty()) c.push_back(static_cast<int>(eng() % static_cast<std::uint64_t>(n)));
        if (!(sp->block_prob(c) > 0.0)) continue;  // null C has no restriction
        const SplitSpace split = make_split(sp, c);

        const int rc = static_cast<int>(split.c_atoms.size());
        const SigmaField g = random_field(eng, rc, 6);
        const RandomVar x = random_rv(eng, split.restricted);
        worst_single = std::max(worst_single, verify_transfer(x, g, split));

        const RandomVar y = random_rv(eng, split.restricted);
        const NormTransfer nt = norm_transfer(x, y, split);
        worst_norm = std::max(worst_norm,
                              std::abs(nt.full_sq - nt.scaled_restricted_sq));
    }

    for (int inst = 0; inst < 50; ++inst) {
        std::mt19937_64 eng(kSeedSplits * 31ULL + static_cast<std::uint64_t>(inst));
        const int n = 3 + static_cast<int>(eng() % 20);
        const auto sp = random_space(eng, n, false);
        std::vector<int> c;
        for (int a = 0; a < n; ++a)
            if (eng() % 3 != 0) c.push_back(a);
        if (c.empty()) c.push_back(0);
        const SplitSpace split = make_split(sp, c);
        const int rc = static_cast<int>(split.c_atoms.size());

        const int kf = 1 + static_cast<int>(eng() % 3);
        std::vector<SigmaField> rfields, ufields;
        for (int k = 0; k < kf; ++k) {
            rfields.push_back(random_field(eng, rc, 5));
            ufields.push_back(uplus(rfields.back(), split));
        }
        const RandomVar x = random_rv(eng, split.restricted);

        IterateOptions opt;
        opt.store_iterates = true;
        // Both runs must execute all 20 steps: early exits can fire at
        // different times on the two spaces and desynchronize the sequences.
        opt.stop_eps = -1.0;
        const Schedule sched = Schedule::uniform_random(kf, kSeedSplits + static_cast<std::uint64_t>(inst));
        const long steps = 20;
        const Trajectory tr = iterate(x, rfields, sched, steps, nullptr, opt);
        const Trajectory tf = iterate(extend_rv(x, split), ufields, sched, steps, nullptr, opt);
        for (std::size_t s = 0; s < tr.iterates.size(); ++s)
            worst_stepwise = std::max(
                worst_stepwise, linf_dist(extend_rv(tr.iterates[s], split), tf.iterates[s]));
    }

    std::ostringstream d;
    d << "conditional transfer " << worst_single << ", norm identity " << worst_norm
      << ", stepwise iteration " << worst_stepwise;
    r.detail = d.str();
    r.pass = worst_single <= 1e-12 && worst_norm <= 1e-12 && worst_stepwise <= 1e-12;
    return r;
}

CriterionResult criterion_slowdown(void) {
    CriterionResult r;
    r.name = "shrinking angles slow the projection product";
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<long> counts;
    std::vector<double> widest_cos;
    bool monotone_counts = true, monotone_angle = true;
    for (int d = 2; d <= 20; ++d) {
        const SlowdownResult res = slowdown_family(d);
        counts.push_back(res.iterations);
        double min_cos = 1.0;
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b)
                min_cos = std::min(min_cos,
                                   friedrichs_angle_cos(res.lines[static_cast<std::size_t>(a)],
                                                        res.lines[static_cast<std::size_t>(b)]));
        widest_cos.push_back(min_cos);
        if (counts.size() > 1) {
            monotone_counts = monotone_counts && counts.back() >= counts[counts.size() - 2];
            monotone_angle = monotone_angle && widest_cos.back() > widest_cos[widest_cos.size() - 2];
        }
    }
    const double secs = elapsed_s(t0);
    const double ratio =
        static_cast<double>(counts.back()) / static_cast<double>(counts.front());

    std::ostringstream d;
    d << "steps " << counts.front() << " -> " << counts.back() << " (ratio " << ratio
      << "), widest angle " << (monotone_angle ? "shrinks" : "does NOT shrink") << ", " << secs
      << "s";
    r.detail = d.str();
    r.pass = monotone_counts && monotone_angle && ratio >= 10.0 && secs < 60.0;
    return r;
}

CriterionResult criterion_norm_monotone(const std::vector<AuditSeq>& pool) {
    CriterionResult r;
    r.name = "iteration norms and fourth moments never grow";
    double worst = 0.0;
    std::size_t steps = 0;
    for (const AuditSeq& s : pool) {
        for (const auto* seq : {&s.n1, &s.n2, &s.n4, &s.ninf, &s.m4}) {
            for (std::size_t i = 1; i < seq->size(); ++i)
                worst = std::max(worst, (*seq)[i] - (*seq)[i - 1]);
            steps += seq->size();
        }
    }
    std::ostringstream d;
    d << pool.size() << " trajectories, " << steps << " sequence entries, worst increase "
      << worst;
    r.detail = d.str();
    r.pass = !pool.empty() && worst <= 1e-12;
    return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::ostream* log) {
    std::vector<CriterionResult> results;
    std::vector<AuditSeq> pool;

    auto emit = [&](CriterionResult res) {
        if (log)
            (*log) << (res.pass ? "[PASS] " : "[FAIL] ") << res.name << ": " << res.detail
                   << "\n";
        results.push_back(std::move(res));
    };

    emit(criterion_products_converge(pool));
    emit(criterion_pair_regression());
    emit(criterion_counterexamples());
    emit(criterion_alternation(pool));
    emit(criterion_ce_matches_projection());
    emit(criterion_digit_channels());
    emit(criterion_restriction_transfer());
    emit(criterion_slowdown());
    emit(criterion_norm_monotone(pool));
    return results;
}

}  // namespace condex
