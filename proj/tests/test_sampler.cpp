#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "condex/sampler.hpp"

using namespace condex;

namespace {

double u01(std::mt19937_64& eng) { return (eng() >> 11) * 0x1.0p-53; }

double unit_cdf(double x) { return std::min(1.0, std::max(0.0, x)); }

// Reference inverse of phi by bisection, good to ~1e-13.
double phi_inv_bisect(double p) {
    double lo = -40.0, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (phi(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("dyadic digits of a unit number") {
    const BitSource u = BitSource::from_unit(0.6875, 6);
    REQUIRE(u.size() == 6);
    const std::vector<std::uint8_t> want{1, 0, 1, 1, 0, 0};
    CHECK(u.bits() == want);
    CHECK(u.value() == 0.6875);
    CHECK(u.bit(1) == 1);
    CHECK(u.bit(4) == 1);

    CHECK_THROWS_AS(BitSource::from_unit(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(BitSource::from_unit(1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(BitSource::from_unit(0.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(BitSource(std::vector<std::uint8_t>{0, 2}), std::invalid_argument);

    // Seeded digit streams replay exactly.
    const BitSource r1 = BitSource::random(130, 99);
    const BitSource r2 = BitSource::random(130, 99);
    CHECK(r1.bits() == r2.bits());
    CHECK(r1.size() == 130);
}

TEST_CASE("channel positions partition the digit indices") {
    CHECK(channel_positions(1, 16) == std::vector<int>{1, 3, 5, 7, 9, 11, 13, 15});
    CHECK(channel_positions(2, 16) == std::vector<int>{2, 6, 10, 14});
    CHECK(channel_positions(5, 16) == std::vector<int>{16});
    CHECK(channel_positions(6, 16).empty());

    std::set<int> seen;
    for (int k = 1; k <= 7; ++k)
        for (int p : channel_positions(k, 64)) {
            CHECK(seen.insert(p).second);  // disjoint
            CHECK(p >= 1);
            CHECK(p <= 64);
        }
    CHECK(seen.size() == 64);  // full coverage
}

TEST_CASE("bit split reads each channel as a uniform") {
    const BitSource u = BitSource::from_unit(0.6875, 6);  // digits 1 0 1 1 0 0
    CHECK(bit_split(u, 1) == 0.75);  // digits at 1,3,5: 1,1,0
    CHECK(bit_split(u, 2) == 0.0);   // digits at 2,6: 0,0
    CHECK(bit_split(u, 3) == 0.5);   // digit at 4: 1
    CHECK_THROWS_AS(bit_split(u, 4), std::invalid_argument);

    const std::vector<double> hs = psi(u, 3);
    REQUIRE(hs.size() == 3);
    CHECK(hs[0] == 0.75);
    CHECK(hs[1] == 0.0);
    CHECK(hs[2] == 0.5);
}

TEST_CASE("normal cdf and inverse") {
    CHECK(phi(0.0) == 0.5);
    CHECK(phi(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    for (double x : {0.3, 1.7, 4.2, 7.5}) CHECK(std::abs(phi(x) + phi(-x) - 1.0) <= 1e-15);
    CHECK(phi(40.0) == 1.0);

    CHECK(std::abs(phi_inv(0.975) - 1.959963984540054) <= 1e-12);
    CHECK(phi_inv(0.5) == doctest::Approx(0.0));
    CHECK_THROWS_AS(phi_inv(0.0), std::invalid_argument);
    CHECK_THROWS_AS(phi_inv(1.0), std::invalid_argument);
    CHECK_THROWS_AS(phi_inv(-0.2), std::invalid_argument);

    // Against a bisection oracle across ten decades of tail mass. In the
    // lower tail tiny masses have tiny ulps, so the comparison is sharp. In
    // the upper tail the input 1 - p is quantized at ulp(1), which smears x
    // by ulp(1)/density: no inverse can resolve finer, so the band widens by
    // exactly that amount.
    const double ulp1 = 2.220446049250313e-16;
    const auto density = [](double x) {
        return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
    };
    for (int i = 0; i <= 200; ++i) {
        const double lp = -10.0 + 9.69 * i / 200.0;  // log10 p from 1e-10 up
        const double p = std::pow(10.0, lp);
        const double lo = phi_inv_bisect(p);
        CHECK(std::abs(phi_inv(p) - lo) <= 1e-9);
        const double hi = phi_inv_bisect(1.0 - p);
        CHECK(std::abs(phi_inv(1.0 - p) - hi) <= 1e-9 + 4.0 * ulp1 / density(hi));
    }

    // Round trip; the same quantization widens the band in the right tail.
    for (int i = 0; i <= 10000; ++i) {
        const double x = -8.0 + 16.0 * i / 10000.0;
        const double band = x <= 5.0 ? 1e-8 : 1e-8 + 4.0 * ulp1 / density(x);
        CHECK(std::abs(phi_inv(phi(x)) - x) <= band);
    }
}

TEST_CASE("gaussianize maps the zero pattern half a step below range") {
    // 0.5 has a single 1 digit at position 1, so channel 2 reads all zeros.
    const BitSource u = BitSource::from_unit(0.5, 8);
    CHECK(gaussianize(u, 2) == phi_inv(std::ldexp(1.0, -9)));
    CHECK(gaussianize(u, 1) == phi_inv(0.5));
}

TEST_CASE("discrete laws, quantiles, and smoothing") {
    CHECK_THROWS_AS(DiscreteDistribution({1.0, 0.5}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteDistribution({0.0, 1.0}, {0.5, -0.5}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteDistribution({0.0, 1.0}, {0.5, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteDistribution({0.0}, {0.5, 0.5}), std::invalid_argument);

    const DiscreteDistribution coin({0.0, 1.0}, {0.5, 0.5});
    CHECK(coin.cdf(-0.1) == 0.0);
    CHECK(coin.cdf(0.0) == 0.5);
    CHECK(coin.cdf(0.3) == 0.5);
    CHECK(coin.cdf(1.0) == doctest::Approx(1.0));
    CHECK(quantile_func(coin, 0.25) == 0.0);
    CHECK(quantile_func(coin, 0.5) == 0.0);
    CHECK(quantile_func(coin, 0.6) == 1.0);
    CHECK_THROWS_AS(quantile_func(coin, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(quantile_func(coin, 1.0), std::invalid_argument);

    const DiscreteDistribution nu({-1.0, 0.5, 2.0}, {0.3, 0.45, 0.25});
    CHECK_THROWS_AS(smooth_sample(nu, -0.1, 0.0, 0.0), std::invalid_argument);
    // Positive smoothing is an exact affine shift of the unsmoothed draw.
    CHECK(smooth_sample(nu, 0.25, 1.5, 0.7) ==
          0.25 * 1.5 + smooth_sample(nu, 0.0, 0.0, 0.7));

    // With eps = 0 the sampler reproduces the law.
    std::mt19937_64 eng(2024);
    std::vector<double> draws;
    draws.reserve(40000);
    for (int i = 0; i < 40000; ++i) {
        const double y1 = phi_inv(std::min(1.0 - 1e-16, std::max(1e-16, u01(eng))));
        draws.push_back(smooth_sample(nu, 0.0, 0.0, y1));
    }
    CHECK(tv_to_law(draws, nu) <= 0.01);
}

TEST_CASE("audit statistics") {
    CHECK(ks_statistic({0.1, 0.5, 0.9}, unit_cdf) == doctest::Approx(7.0 / 30.0).epsilon(1e-15));
    CHECK(std::abs(ks_critical(0.01, 1) - 1.6276236307187293) <= 1e-15);
    CHECK(ks_critical(0.01, 100) == doctest::Approx(0.16276236307187293).epsilon(1e-13));

    // One sample per cell of the 8x8 grid: independence fits exactly.
    std::vector<double> us, vs;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            us.push_back((i + 0.5) / 8.0);
            vs.push_back((j + 0.5) / 8.0);
        }
    const Chi2Result chi = chi2_independence_8x8(us, vs);
    CHECK(chi.statistic == doctest::Approx(0.0));
    CHECK(chi.df == 49);

    const std::vector<double> xs{0.0, 1.0, 2.0, 3.5};
    std::vector<double> ys_up, ys_dn;
    for (double x : xs) {
        ys_up.push_back(2.0 * x + 1.0);
        ys_dn.push_back(-x);
    }
    CHECK(pearson_corr(xs, ys_up) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson_corr(xs, ys_dn) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK_THROWS_AS(pearson_corr({1.0, 1.0}, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("two channels are exactly product uniform") {
    const ChannelEnumeration e8 = enumerate_two_channels(8);
    CHECK(e8.patterns == 256);
    CHECK(e8.m1 == 4);
    CHECK(e8.m2 == 2);
    CHECK(e8.expected_count == 4);
    CHECK(e8.max_count_dev == 0);
    CHECK(e8.product_uniform);
    CHECK(e8.marginals_uniform);

    const ChannelEnumeration e12 = enumerate_two_channels(12);
    CHECK(e12.product_uniform);
    CHECK(e12.marginals_uniform);

    CHECK_THROWS_AS(enumerate_two_channels(1), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_two_channels(17), std::invalid_argument);
}

TEST_CASE("empirical total variation counts off-support mass in full") {
    const DiscreteDistribution nu({0.0, 1.0}, {0.5, 0.5});
    CHECK(tv_to_law({0.0, 1.0, 0.0, 1.0}, nu) == doctest::Approx(0.0));
    CHECK(tv_to_law({0.0, 0.0, 0.0, 0.0}, nu) == doctest::Approx(0.5));
    // Half the mass off support: TV = (0.25 + 0.25 + 0.5) / 2.
    CHECK(tv_to_law({0.0, 1.0, 7.0, 7.0}, nu) == doctest::Approx(0.5));
}

}  // TEST_SUITE
