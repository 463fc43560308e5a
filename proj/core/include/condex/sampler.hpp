#pragma once

// Extracting many independent uniforms from the binary digits of a single
// one: channel k reads the bits at positions 2^{k-1}(2i-1), so distinct
// channels use disjoint digit sets and their outputs are independent
// uniforms. On top of that sit the Gaussian transport maps (Phi and its
// inverse), the generalized inverse of a discrete cdf, and the smoothed
// two-seed sampler, plus the statistics used to audit them.

#include <cstdint>
#include <vector>

namespace condex {

// A finite dyadic expansion b_1 b_2 ... b_B, b_1 the most significant.
class BitSource {
public:
    explicit BitSource(std::vector<std::uint8_t> bits);

    // First n_bits binary digits of u in (0, 1).
    static BitSource from_unit(double u, int n_bits);
    // Deterministic pseudorandom digits from a seeded 64-bit engine.
    static BitSource random(int n_bits, std::uint64_t seed);

    int size() const { return static_cast<int>(bits_.size()); }
    int bit(int i) const;  // 1-based position
    const std::vector<std::uint8_t>& bits() const { return bits_; }
    double value() const;  // sum of b_i 2^{-i}

private:
    std::vector<std::uint8_t> bits_;
};

// Digit positions feeding channel k: 2^{k-1}, 3 * 2^{k-1}, 5 * 2^{k-1}, ...
// up to n_bits. Channels partition 1..n_bits across all k.
std::vector<int> channel_positions(int k, int n_bits);

// h_k(u) = sum_i u[2^{k-1}(2i-1)] 2^{-i}: the uniform variable carried by
// channel k. Throws if the channel has no positions within the source.
double bit_split(const BitSource& u, int k);

// h_1..h_K in one call.
std::vector<double> psi(const BitSource& u, int k_max);

// Standard normal cdf and its inverse (strictly inside (0, 1)).
double phi(double x);
double phi_inv(double p);

// Phi^{-1}(h_k(u)), with an exact zero replaced by 2^{-(B+1)}, half a step
// below the smallest positive channel value.
double gaussianize(const BitSource& u, int k);

// Law on finitely many points x_0 < x_1 < ... with positive masses.
class DiscreteDistribution {
public:
    DiscreteDistribution(std::vector<double> xs, std::vector<double> qs);

    int size() const { return static_cast<int>(xs_.size()); }
    const std::vector<double>& points() const { return xs_; }
    const std::vector<double>& masses() const { return qs_; }
    double cdf(double x) const;

private:
    std::vector<double> xs_, qs_;
};

// Generalized inverse G(y) = sup{x : F(x) < y} for y in (0, 1): the smallest
// point whose cumulative mass reaches y.
double quantile_func(const DiscreteDistribution& nu, double y);

// eps * y0 + G(Phi(y1)) for independent standard normals y0, y1. At eps = 0
// this degenerates to an exact sampler of nu with no smoothing.
double smooth_sample(const DiscreteDistribution& nu, double eps, double y0, double y1);

// One-sample Kolmogorov-Smirnov statistic against a cdf given as a callable.
double ks_statistic(std::vector<double> samples, double (*cdf)(double));
// Large-n critical value sqrt(-ln(alpha/2) / 2) / sqrt(n).
double ks_critical(double alpha, std::size_t n);

// Chi-square independence statistic on an 8x8 uniform binning of [0,1)^2.
struct Chi2Result {
    double statistic = 0.0;
    int df = 0;
};
Chi2Result chi2_independence_8x8(const std::vector<double>& u,
                                 const std::vector<double>& v);

double pearson_corr(const std::vector<double>& u, const std::vector<double>& v);

// Exhaustive check over all 2^B digit patterns that (h_1, h_2) is exactly
// product-uniform: every value pair occurs the same number of times.
struct ChannelEnumeration {
    long patterns = 0;
    int m1 = 0, m2 = 0;      // digit counts of the two channels
    long expected_count = 0;  // 2^(B - m1 - m2)
    long max_count_dev = 0;   // worst |count - expected| over value pairs
    bool product_uniform = false;
    bool marginals_uniform = false;
};
ChannelEnumeration enumerate_two_channels(int n_bits);

// Total-variation distance between the empirical law of samples and nu;
// mass at points outside nu's support counts in full.
double tv_to_law(const std::vector<double>& samples, const DiscreteDistribution& nu);

}  // namespace condex
