#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <random>
#include <set>

#include "condex/operators.hpp"

using namespace condex;

namespace {

double u01(std::mt19937_64& eng) { return (eng() >> 11) * 0x1.0p-53; }

std::shared_ptr<const ProbSpace> random_positive_space(std::mt19937_64& eng, int n) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (auto& v : w) v = 0.05 + u01(eng);
    return std::make_shared<const ProbSpace>(normalized_weights(std::move(w)));
}

SigmaField random_partition(std::mt19937_64& eng, int n, int max_blocks) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (auto& l : labels) l = static_cast<int>(eng() % static_cast<std::uint64_t>(max_blocks));
    return SigmaField::from_labels(labels);
}

RandomVar random_rv(std::mt19937_64& eng, const std::shared_ptr<const ProbSpace>& sp) {
    std::vector<double> v(static_cast<std::size_t>(sp->atom_count()));
    for (auto& x : v) x = 4.0 * u01(eng) - 2.0;
    return RandomVar(sp, std::move(v));
}

double weighted_l2_dist(const RandomVar& a, const RandomVar& b) {
    double s = 0.0;
    for (int i = 0; i < a.atom_count(); ++i) {
        const double d = a.value(i) - b.value(i);
        s += a.space()->weight(i) * d * d;
    }
    return std::sqrt(s);
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("operator matrix entries are weight ratios") {
    auto sp = std::make_shared<const ProbSpace>(std::vector<double>{0.2, 0.3, 0.5});
    const CondExpOperator op = build_operator(SigmaField(3, {{0, 1}, {2}}), sp);
    CHECK(op.matrix(0, 0) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(op.matrix(0, 1) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(op.matrix(0, 2) == 0.0);
    CHECK(op.matrix(1, 0) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(op.matrix(2, 2) == 1.0);

    // Null-block rows vanish entirely.
    auto spn = std::make_shared<const ProbSpace>(std::vector<double>{0.5, 0.5, 0.0});
    const CondExpOperator opn = build_operator(SigmaField(3, {{0, 1}, {2}}), spn);
    CHECK(opn.matrix.row(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("operators are idempotent and weighted self-adjoint") {
    std::mt19937_64 eng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(eng() % 10);
        std::vector<double> w(static_cast<std::size_t>(n));
        for (auto& v : w) v = u01(eng) < 0.15 ? 0.0 : 0.2 + u01(eng);
        if (*std::max_element(w.begin(), w.end()) == 0.0) w[0] = 1.0;
        auto sp = std::make_shared<const ProbSpace>(normalized_weights(std::move(w)));
        const CondExpOperator op = build_operator(random_partition(eng, n, 4), sp);

        CHECK((op.matrix * op.matrix - op.matrix).cwiseAbs().maxCoeff() <= 1e-12);
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) d(i, i) = sp->weight(i);
        CHECK((d * op.matrix - op.matrix.transpose() * d).cwiseAbs().maxCoeff() <= 1e-12);

        // Total mass is conserved: column sums against the weights are the weights.
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
        const Eigen::VectorXd mass = op.matrix.transpose() * (d * ones);
        for (int i = 0; i < n; ++i) CHECK(std::abs(mass(i) - sp->weight(i)) <= 1e-14);

        const RandomVar x = random_rv(eng, sp);
        const RandomVar via_matrix = apply(op, x);
        const RandomVar direct = cond_exp(x, op.field);
        CHECK(linf_dist(via_matrix, direct) <= 1e-13);
    }
}

TEST_CASE("conditioning contracts every p-norm") {
    std::mt19937_64 eng(37);
    const double inf = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(eng() % 10);
        const auto sp = random_positive_space(eng, n);
        const RandomVar x = random_rv(eng, sp);
        const RandomVar ce = cond_exp(x, random_partition(eng, n, 5));
        for (const double p : {1.0, 2.0, 4.0, inf})
            CHECK(lp_norm(ce, p) <= lp_norm(x, p) + 1e-12);
    }
}

TEST_CASE("tower property for nested fields") {
    std::mt19937_64 eng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + static_cast<int>(eng() % 8);
        const auto sp = random_positive_space(eng, n);
        const RandomVar x = random_rv(eng, sp);
        const SigmaField fine = random_partition(eng, n, 6);
        const SigmaField coarse = sigma_meet(fine, random_partition(eng, n, 3));
        REQUIRE(fine.refines(coarse));
        const RandomVar once = cond_exp(x, coarse);
        const RandomVar twice = cond_exp(cond_exp(x, fine), coarse);
        CHECK(linf_dist(once, twice) <= 1e-13);
    }
}

TEST_CASE("schedules replay deterministically") {
    const Schedule p = Schedule::periodic({2, 1, 1});
    CHECK(p.at(1) == 2);
    CHECK(p.at(2) == 1);
    CHECK(p.at(4) == 2);
    CHECK(p.at(3001) == 2);
    CHECK(p.infinite_repeat());
    CHECK_FALSE(Schedule::periodic({2, 2}).infinite_repeat());  // index 1 never fires

    const Schedule e = Schedule::explicit_list({1, 2, 1});
    CHECK(e.length() == 3);
    CHECK(e.at(3) == 1);
    CHECK_THROWS_AS(e.at(4), std::out_of_range);
    CHECK_FALSE(e.infinite_repeat());

    const Schedule r1 = Schedule::uniform_random(4, 99);
    const Schedule r2 = Schedule::uniform_random(4, 99);
    std::set<int> seen;
    for (long n = 1; n <= 2000; ++n) {
        CHECK(r1.at(n) == r2.at(n));
        CHECK(r1.at(n) >= 1);
        CHECK(r1.at(n) <= 4);
        seen.insert(r1.at(n));
    }
    CHECK(seen.size() == 4);
    CHECK(r1.infinite_repeat());
    CHECK(Schedule::uniform_random(4, 100).at(1) != 0);

    // Rounds: every window of k steps is a permutation of 1..k.
    const Schedule rounds = Schedule::random_rounds(5, 7);
    for (long w = 0; w < 50; ++w) {
        std::set<int> window;
        for (long i = 1; i <= 5; ++i) window.insert(rounds.at(5 * w + i));
        CHECK(window.size() == 5);
    }
    CHECK(rounds.infinite_repeat());

    CHECK_THROWS_AS(Schedule::periodic({}), std::invalid_argument);
    CHECK_THROWS_AS(Schedule::periodic({0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(Schedule::uniform_random(0, 1), std::invalid_argument);
}

TEST_CASE("two commuting coarsenings settle in two steps") {
    auto sp = std::make_shared<const ProbSpace>(std::vector<double>{0.25, 0.25, 0.25, 0.25});
    const RandomVar x0(sp, {1.0, 2.0, 3.0, 4.0});
    const std::vector<SigmaField> fields{SigmaField(4, {{0, 1}, {2, 3}}),
                                         SigmaField(4, {{0, 2}, {1, 3}})};
    const RandomVar pred = limit_predict(x0, fields);
    for (int i = 0; i < 4; ++i) CHECK(pred.value(i) == doctest::Approx(2.5).epsilon(1e-15));

    const Trajectory t = iterate(x0, fields, Schedule::periodic({1, 2}), 100, &pred);
    CHECK(t.converged);
    CHECK(linf_dist(t.last, pred) <= 1e-15);
    CHECK(t.dist[1] <= 1e-15);  // exact limit after the second step
    for (int i = 0; i < 4; ++i) CHECK(t.last.value(i) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("iterate records diagnostics and honors stop rules") {
    std::mt19937_64 eng(43);
    const auto sp = random_positive_space(eng, 6);
    const RandomVar x0 = random_rv(eng, sp);
    const std::vector<SigmaField> fields{random_partition(eng, 6, 3),
                                         random_partition(eng, 6, 3)};
    const RandomVar pred = limit_predict(x0, fields);

    IterateOptions opt;
    opt.store_iterates = true;
    const Trajectory t = iterate(x0, fields, Schedule::periodic({1, 2}), 500, &pred, opt);
    CHECK(t.steps() >= 1);
    CHECK(t.k.size() == t.d1.size());
    CHECK(t.k.size() == t.dist.size());
    CHECK(t.iterates.size() == t.k.size() + 1);
    CHECK(linf_dist(t.iterates.back(), t.last) == 0.0);
    // Step distances are ordered the way the norms are: d1 <= d2 <= dinf.
    for (std::size_t s = 0; s < t.k.size(); ++s) {
        CHECK(t.d1[s] <= t.d2[s] + 1e-15);
        CHECK(t.d2[s] <= t.dinf[s] + 1e-15);
    }

    IterateOptions dist_only;
    dist_only.stop_eps = 0.0;
    dist_only.stop_dist = 1e-6;
    const Trajectory td = iterate(x0, fields, Schedule::periodic({1, 2}), 500, &pred, dist_only);
    CHECK(td.reached_limit);
    CHECK(linf_dist(td.last, pred) <= 1e-6);

    // An explicit schedule must cover the requested horizon.
    CHECK_THROWS_AS(iterate(x0, fields, Schedule::explicit_list({1, 2}), 3, nullptr, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(iterate(x0, {fields[0]}, Schedule::periodic({2}), 3, nullptr, {}),
                    std::out_of_range);
}

TEST_CASE("random schedules drive the product to the meet conditional") {
    std::mt19937_64 eng(47);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4 + static_cast<int>(eng() % 12);
        const auto sp = random_positive_space(eng, n);
        const RandomVar x0 = random_rv(eng, sp);
        std::vector<SigmaField> fields;
        const int kf = 2 + static_cast<int>(eng() % 3);
        for (int k = 0; k < kf; ++k) fields.push_back(random_partition(eng, n, 4));

        const RandomVar pred = limit_predict(x0, fields);
        IterateOptions opt;
        opt.stop_eps = 0.0;
        opt.stop_dist = 1e-11;
        // Random partition pairs can sit at tiny angles, so leave generous room.
        const Trajectory t = iterate(x0, fields, Schedule::random_rounds(kf, 1000 + trial),
                                     500000, &pred, opt);
        CHECK(linf_dist(t.last, pred) <= 1e-11);
    }
}

TEST_CASE("decay rate is bounded by the restricted operator norm") {
    // For two fields with trivial meet on an all-positive space, the product
    // of the two projections contracts the mean-zero part at least as fast as
    // sigma^2 per round, where sigma is the norm of the symmetrized round
    // operator with the mean direction projected out.
    std::mt19937_64 eng(53);
    int exercised = 0;
    while (exercised < 40) {
        const int n = 3 + static_cast<int>(eng() % 9);
        const auto sp = random_positive_space(eng, n);
        const SigmaField g1 = random_partition(eng, n, 3);
        const SigmaField g2 = random_partition(eng, n, 3);
        if (sigma_meet(g1, g2).block_count() != 1) continue;
        ++exercised;

        const CondExpOperator m1 = build_operator(g1, sp);
        const CondExpOperator m2 = build_operator(g2, sp);
        Eigen::VectorXd sqrtw(n);
        for (int i = 0; i < n; ++i) sqrtw(i) = std::sqrt(sp->weight(i));
        const Eigen::MatrixXd t_sym = sqrtw.asDiagonal() * (m2.matrix * m1.matrix) *
                                      sqrtw.cwiseInverse().asDiagonal();
        const Eigen::MatrixXd proj =
            Eigen::MatrixXd::Identity(n, n) - sqrtw * sqrtw.transpose();
        const double sigma =
            Eigen::JacobiSVD<Eigen::MatrixXd>(proj * t_sym * proj).singularValues()(0);
        REQUIRE(sigma < 1.0);

        const RandomVar x0 = random_rv(eng, sp);
        const RandomVar pred = limit_predict(x0, {g1, g2});
        IterateOptions opt;
        opt.stop_eps = 0.0;
        opt.store_iterates = true;
        const Trajectory t = iterate(x0, {g1, g2}, Schedule::periodic({1, 2}), 40, &pred, opt);

        const double e0 = weighted_l2_dist(x0, pred);
        for (int round = 1; round <= 20; ++round) {
            // The trajectory may stop early at an exact fixpoint.
            const std::size_t idx = static_cast<std::size_t>(2 * round);
            if (idx >= t.iterates.size()) break;
            const double e = weighted_l2_dist(t.iterates[idx], pred);
            const double bound =
                sigma > 0.0 ? (e0 / sigma) * std::pow(sigma * sigma, round) : 0.0;
            CHECK(e <= bound * (1.0 + 1e-9) + 1e-14);
        }
    }
}

TEST_CASE("fourth moments fall along any trajectory") {
    std::mt19937_64 eng(59);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 3 + static_cast<int>(eng() % 10);
        const auto sp = random_positive_space(eng, n);
        const RandomVar x0 = random_rv(eng, sp);
        std::vector<SigmaField> fields{random_partition(eng, n, 4),
                                       random_partition(eng, n, 4)};
        const Trajectory t =
            iterate(x0, fields, Schedule::uniform_random(2, 17 + trial), 60, nullptr, {});
        const MomentTrack track = moment_track(t);
        CHECK(track.non_increasing);
        CHECK(track.max_violation <= 1e-12);
        CHECK(track.m4.front() <= moment(x0, 4) + 1e-12);
    }
}

TEST_CASE("alternation between two variables' fields") {
    auto sp = std::make_shared<const ProbSpace>(std::vector<double>{0.25, 0.25, 0.25, 0.25});
    const RandomVar x(sp, {1.0, 1.0, -1.0, -1.0});
    const RandomVar y(sp, {1.0, -1.0, 1.0, -1.0});
    const RandomVar once = two_field_alternation(x, y, 1);
    // These two are independent signs, so one round already lands on E(X) = 0.
    for (int i = 0; i < 4; ++i) CHECK(std::abs(once.value(i)) <= 1e-15);
    const RandomVar zero_rounds = two_field_alternation(x, y, 0);
    CHECK(linf_dist(zero_rounds, x) == 0.0);
    CHECK_THROWS_AS(two_field_alternation(x, y, -1), std::invalid_argument);
}

TEST_CASE("truncated tails contract under conditioning") {
    auto sp = std::make_shared<const ProbSpace>(std::vector<double>{0.5, 0.5});
    const RandomVar x(sp, {3.0, 1.0});
    const TruncationBound b = truncation_bound(x, 2.0, SigmaField::trivial(2), 1.0);
    CHECK(b.lhs == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(b.rhs == doctest::Approx(1.5).epsilon(1e-15));

    std::mt19937_64 eng(61);
    const double inf = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(eng() % 10);
        const auto spr = random_positive_space(eng, n);
        const RandomVar xr = random_rv(eng, spr);
        const SigmaField g = random_partition(eng, n, 4);
        const double k = 2.0 * u01(eng);
        for (const double p : {1.0, 2.0, inf}) {
            const TruncationBound tb = truncation_bound(xr, k, g, p);
            CHECK(tb.lhs <= tb.rhs + 1e-12);
        }
    }
}

}  // TEST_SUITE
