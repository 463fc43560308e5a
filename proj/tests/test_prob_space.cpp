#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "condex/prob_space.hpp"

using namespace condex;

namespace {

std::shared_ptr<const ProbSpace> space(std::initializer_list<double> w) {
    return std::make_shared<const ProbSpace>(std::vector<double>(w));
}

// Every partition of {0..n-1}, enumerated as restricted growth strings.
std::vector<SigmaField> all_partitions(int n) {
    std::vector<SigmaField> out;
    std::vector<int> rgs(static_cast<std::size_t>(n), 0);
    while (true) {
        out.push_back(SigmaField::from_labels(rgs));
        int i = n - 1;
        for (; i > 0; --i) {
            const int prefix_max =
                *std::max_element(rgs.begin(), rgs.begin() + i);
            if (rgs[static_cast<std::size_t>(i)] <= prefix_max) {
                ++rgs[static_cast<std::size_t>(i)];
                break;
            }
            rgs[static_cast<std::size_t>(i)] = 0;
        }
        if (i == 0) break;
    }
    return out;
}

SigmaField random_partition(std::mt19937_64& eng, int n, int max_blocks) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (auto& l : labels) l = static_cast<int>(eng() % static_cast<std::uint64_t>(max_blocks));
    return SigmaField::from_labels(labels);
}

}  // namespace

TEST_SUITE("prob_space") {

TEST_CASE("weights are validated, never renormalized") {
    CHECK_THROWS_AS(ProbSpace({}), std::invalid_argument);
    CHECK_THROWS_AS(ProbSpace({0.5, -0.1, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(ProbSpace({0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(ProbSpace({0.5, 0.4999}), std::invalid_argument);

    const ProbSpace sp({0.2, 0.3, 0.5});
    CHECK(sp.atom_count() == 3);
    CHECK(sp.weight(1) == 0.3);
    CHECK(sp.block_prob({0, 2}) == doctest::Approx(0.7));
    CHECK_FALSE(sp.is_null(0));

    const ProbSpace with_null({0.5, 0.0, 0.5});
    CHECK(with_null.is_null(1));
}

TEST_CASE("normalized_weights always satisfies the sum check") {
    std::mt19937_64 eng(7);
    for (const int n : {3, 100, 40401, 200000}) {
        std::vector<double> raw(static_cast<std::size_t>(n));
        for (auto& v : raw) v = (eng() >> 11) * 0x1.0p-53 + 1e-6;
        CHECK_NOTHROW(ProbSpace(normalized_weights(raw)));
    }
    // Equal masses over a count that is not a power of two.
    CHECK_NOTHROW(ProbSpace(normalized_weights(std::vector<double>(125664, 1.0))));
    CHECK_THROWS_AS(normalized_weights({0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("sigma-fields canonicalize and validate") {
    const SigmaField g(4, {{3, 1}, {0}, {2}});
    CHECK(g.block_count() == 3);
    CHECK(g.block(0) == Block{0});
    CHECK(g.block(1) == Block{1, 3});
    CHECK(g.block_of(3) == 1);

    CHECK_THROWS_AS(SigmaField(3, {{0, 1}}), std::invalid_argument);          // atom 2 missing
    CHECK_THROWS_AS(SigmaField(3, {{0, 1}, {1, 2}}), std::invalid_argument);  // atom 1 twice
    CHECK_THROWS_AS(SigmaField(3, {{0, 1, 2, 3}}), std::invalid_argument);    // out of range
    CHECK_THROWS_AS(SigmaField(3, {{0, 1, 2}, {}}), std::invalid_argument);   // empty block

    CHECK(SigmaField::trivial(3) == SigmaField(3, {{2, 1, 0}}));
    CHECK(SigmaField::finest(3).block_count() == 3);
    CHECK(SigmaField::from_labels({7, 9, 7}) == SigmaField(3, {{0, 2}, {1}}));
}

TEST_CASE("refinement is containment of blocks") {
    const SigmaField fine(4, {{0}, {1}, {2, 3}});
    const SigmaField coarse(4, {{0, 1}, {2, 3}});
    CHECK(fine.refines(coarse));
    CHECK_FALSE(coarse.refines(fine));
    CHECK(fine.refines(fine));
    CHECK(SigmaField::finest(4).refines(coarse));
    CHECK(coarse.refines(SigmaField::trivial(4)));
}

TEST_CASE("conditional expectation averages blockwise") {
    const auto sp = space({0.2, 0.3, 0.5});
    const RandomVar x(sp, {1.0, 2.0, 3.0});
    const RandomVar ce = cond_exp(x, SigmaField(3, {{0, 1}, {2}}));
    CHECK(ce.value(0) == doctest::Approx(1.6).epsilon(1e-15));
    CHECK(ce.value(1) == doctest::Approx(1.6).epsilon(1e-15));
    CHECK(ce.value(2) == 3.0);

    // A null block gets value zero, and positive blocks ignore it.
    const auto spn = space({0.5, 0.5, 0.0});
    const RandomVar y(spn, {2.0, 4.0, 9.0});
    const RandomVar cen = cond_exp(y, SigmaField(3, {{0, 1}, {2}}));
    CHECK(cen.value(0) == 3.0);
    CHECK(cen.value(2) == 0.0);
}

TEST_CASE("conditional expectation preserves the mean") {
    std::mt19937_64 eng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(eng() % 12);
        std::vector<double> w(static_cast<std::size_t>(n));
        for (auto& v : w) v = (eng() >> 11) * 0x1.0p-53 + 0.01;
        auto sp = std::make_shared<const ProbSpace>(normalized_weights(std::move(w)));
        std::vector<double> xv(static_cast<std::size_t>(n));
        for (auto& v : xv) v = 4.0 * ((eng() >> 11) * 0x1.0p-53) - 2.0;
        const RandomVar x(sp, std::move(xv));
        const SigmaField g = random_partition(eng, n, 4);
        CHECK(std::abs(expectation(cond_exp(x, g)) - expectation(x)) <= 1e-13);
    }
}

TEST_CASE("level sets of a variable") {
    const auto sp = space({0.25, 0.25, 0.25, 0.25});
    const RandomVar x(sp, {1.0, 2.0, 1.0, 3.0});
    CHECK(sigma_of_rv(x) == SigmaField(4, {{0, 2}, {1}, {3}}));
    // Conditioning on its own level sets returns the variable.
    const RandomVar ce = cond_exp(x, sigma_of_rv(x));
    for (int i = 0; i < 4; ++i) CHECK(ce.value(i) == doctest::Approx(x.value(i)).epsilon(1e-15));
}

TEST_CASE("meet and join agree with exhaustive lattice search") {
    // The oracle scans every partition of a 4-point set: the meet must be the
    // finest common coarsening, the join the coarsest common refinement.
    const std::vector<SigmaField> all = all_partitions(4);
    CHECK(all.size() == 15);
    for (const SigmaField& a : all) {
        for (const SigmaField& b : all) {
            std::vector<const SigmaField*> coarser, finer;
            for (const SigmaField& p : all) {
                if (a.refines(p) && b.refines(p)) coarser.push_back(&p);
                if (p.refines(a) && p.refines(b)) finer.push_back(&p);
            }
            const SigmaField meet = sigma_meet(a, b);
            bool meet_found = false;
            for (const auto* p : coarser) meet_found = meet_found || (*p == meet);
            CHECK(meet_found);
            for (const auto* p : coarser) CHECK(meet.refines(*p));

            const SigmaField join = sigma_join(a, b);
            bool join_found = false;
            for (const auto* p : finer) join_found = join_found || (*p == join);
            CHECK(join_found);
            for (const auto* p : finer) CHECK(p->refines(join));
        }
    }
}

TEST_CASE("lattice laws on random fields") {
    std::mt19937_64 eng(23);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(eng() % 7);
        const SigmaField a = random_partition(eng, n, 4);
        const SigmaField b = random_partition(eng, n, 4);
        const SigmaField c = random_partition(eng, n, 4);

        CHECK(sigma_meet(a, a) == a);
        CHECK(sigma_join(a, a) == a);
        CHECK(sigma_meet(a, SigmaField::trivial(n)) == SigmaField::trivial(n));
        CHECK(sigma_join(a, SigmaField::finest(n)) == SigmaField::finest(n));
        CHECK(sigma_meet(a, b) == sigma_meet(b, a));
        CHECK(sigma_join(a, b) == sigma_join(b, a));
        CHECK(sigma_meet(sigma_meet(a, b), c) == sigma_meet(a, sigma_meet(b, c)));
        CHECK(sigma_join(sigma_join(a, b), c) == sigma_join(a, sigma_join(b, c)));
        CHECK(a.refines(sigma_meet(a, b)));
        CHECK(sigma_join(a, b).refines(a));
        // Absorption ties the two operations together.
        CHECK(sigma_meet(a, sigma_join(a, b)) == a);
        CHECK(sigma_join(a, sigma_meet(a, b)) == a);
    }

    const std::vector<SigmaField> batch = {
        SigmaField(5, {{0, 1}, {2, 3}, {4}}),
        SigmaField(5, {{0}, {1, 2}, {3, 4}}),
        SigmaField(5, {{0, 4}, {1, 2, 3}}),
    };
    CHECK(sigma_meet(batch) == sigma_meet(sigma_meet(batch[0], batch[1]), batch[2]));
    CHECK(sigma_join(batch) == sigma_join(sigma_join(batch[0], batch[1]), batch[2]));
}

TEST_CASE("completion detaches null atoms only") {
    const ProbSpace sp({0.5, 0.0, 0.5, 0.0});
    const SigmaField g(4, {{0, 1}, {2, 3}});
    const SigmaField comp = completion(g, sp);
    CHECK(comp == SigmaField(4, {{0}, {1}, {2}, {3}}));

    // Positive atoms keep their blocks, so conditioning is unchanged there.
    auto sps = space({0.3, 0.0, 0.7});
    const RandomVar x(sps, {1.0, 5.0, 2.0});
    const SigmaField h(3, {{0, 1}, {2}});
    const RandomVar before = cond_exp(x, h);
    const RandomVar after = cond_exp(x, completion(h, *sps));
    CHECK(before.value(0) == after.value(0));
    CHECK(before.value(2) == after.value(2));
    CHECK(after.value(1) == 0.0);  // null blocks condition to zero, singletons included

    // Completing an all-positive space changes nothing.
    const ProbSpace full({0.25, 0.25, 0.5});
    const SigmaField g3(3, {{0, 1}, {2}});
    CHECK(completion(g3, full) == g3);
}

TEST_CASE("classification by positive blocks") {
    const ProbSpace sp({0.5, 0.5, 0.0});
    const ClassifyReport rep = classify(SigmaField::finest(3), sp);
    CHECK(rep.atomic_blocks == std::vector<int>{0, 1});
    CHECK(rep.atomic_mass == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rep.purely_atomic);

    const ClassifyReport half = classify(SigmaField(3, {{0}, {1, 2}}), ProbSpace({0.5, 0.25, 0.25}));
    CHECK(half.atomic_blocks.size() == 2);
    CHECK(half.purely_atomic);
}

TEST_CASE("moments and norms") {
    const auto sp = space({0.5, 0.5});
    const RandomVar x(sp, {3.0, -1.0});
    CHECK(expectation(x) == doctest::Approx(1.0));
    CHECK(moment(x, 2) == doctest::Approx(5.0));
    CHECK(moment(x, 3) == doctest::Approx(13.0));
    CHECK(lp_norm(x, 1.0) == doctest::Approx(2.0));
    CHECK(lp_norm(x, 2.0) == doctest::Approx(std::sqrt(5.0)));
    CHECK(linf_norm(x) == 3.0);
    CHECK(lp_norm(x, std::numeric_limits<double>::infinity()) == 3.0);
    CHECK_THROWS_AS(lp_norm(x, 0.5), std::invalid_argument);

    // Null atoms never contribute to the sup norm.
    const auto spn = space({1.0, 0.0});
    CHECK(linf_norm(RandomVar(spn, {2.0, 100.0})) == 2.0);
    CHECK(linf_dist(RandomVar(spn, {2.0, 0.0}), RandomVar(spn, {2.5, 50.0})) == 0.5);
}

TEST_CASE("variable arithmetic stays on the same space") {
    const auto sp = space({0.5, 0.5});
    const RandomVar x(sp, {1.0, 2.0});
    const RandomVar y(sp, {10.0, 20.0});
    CHECK((x + y).value(1) == 22.0);
    CHECK((y - x).value(0) == 9.0);
    CHECK((3.0 * x).value(1) == 6.0);

    const auto other = space({0.4, 0.6});
    CHECK_THROWS_AS(x + RandomVar(other, {1.0, 1.0}), std::invalid_argument);

    // Equal weights on distinct objects count as the same space.
    const auto twin = space({0.5, 0.5});
    CHECK_NOTHROW(x + RandomVar(twin, {1.0, 1.0}));

    CHECK_THROWS_AS(RandomVar(sp, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(RandomVar(sp, {1.0, std::numeric_limits<double>::quiet_NaN()}),
                    std::invalid_argument);
}

}  // TEST_SUITE
