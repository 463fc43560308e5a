#include "condex/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

namespace condex {

BitSource::BitSource(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    if (bits_.empty()) throw std::invalid_argument("BitSource: needs at least one bit");
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i] > 1)
            throw std::invalid_argument("BitSource: bits[" + std::to_string(i) +
                                        "] is not 0 or 1");
}

BitSource BitSource::from_unit(double u, int n_bits) {
    if (!(u > 0.0 && u < 1.0))
        throw std::invalid_argument("BitSource: value must lie strictly inside (0, 1)");
    if (n_bits < 1) throw std::invalid_argument("BitSource: bit count must be >= 1");
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n_bits));
    for (int i = 0; i < n_bits; ++i) {
        u *= 2.0;
        const bool one = u >= 1.0;
        bits[static_cast<std::size_t>(i)] = one ? 1 : 0;
        if (one) u -= 1.0;
    }
    return BitSource(std::move(bits));
}

BitSource BitSource::random(int n_bits, std::uint64_t seed) {
    if (n_bits < 1) throw std::invalid_argument("BitSource: bit count must be >= 1");
    std::mt19937_64 eng(seed);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n_bits));
    std::uint64_t word = 0;
    for (int i = 0; i < n_bits; ++i) {
        if (i % 64 == 0) word = eng();
        bits[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>((word >> (63 - i % 64)) & 1u);
    }
    return BitSource(std::move(bits));
}

int BitSource::bit(int i) const {
    if (i < 1 || i > size())
        throw std::out_of_range("BitSource: position " + std::to_string(i) + " outside 1.." +
                                std::to_string(size()));
    return bits_[static_cast<std::size_t>(i - 1)];
}

double BitSource::value() const {
    double v = 0.0;
    for (int i = size(); i >= 1; --i) v = (v + bits_[static_cast<std::size_t>(i - 1)]) / 2.0;
    return v;
}

std::vector<int> channel_positions(int k, int n_bits) {
    if (k < 1) throw std::invalid_argument("channel_positions: channel must be >= 1");
    if (n_bits < 1) throw std::invalid_argument("channel_positions: bit count must be >= 1");
    std::vector<int> pos;
    if (k - 1 >= 31) return pos;  // stride already exceeds any int bit count
    const long stride = 1L << (k - 1);
    for (long i = 1; stride * (2 * i - 1) <= n_bits; ++i)
        pos.push_back(static_cast<int>(stride * (2 * i - 1)));
    return pos;
}

double bit_split(const BitSource& u, int k) {
    const std::vector<int> pos = channel_positions(k, u.size());
    if (pos.empty())
        throw std::invalid_argument("bit_split: channel " + std::to_string(k) +
                                    " has no digit positions within " +
                                    std::to_string(u.size()) + " bits");
    double h = 0.0;
    for (std::size_t i = pos.size(); i >= 1; --i) h = (h + u.bit(pos[i - 1])) / 2.0;
    return h;
}

std::vector<double> psi(const BitSource& u, int k_max) {
    if (k_max < 1) throw std::invalid_argument("psi: channel count must be >= 1");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) out.push_back(bit_split(u, k));
    return out;
}

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Rational initial guess for the normal quantile (Acklam's coefficients),
// then Halley refinement to full double precision.
double phi_inv_guess(double p) {
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double phi_inv(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("phi_inv: argument must lie strictly inside (0, 1)");
    double x = phi_inv_guess(p);
    const double sqrt_2pi = std::sqrt(2.0 * std::acos(-1.0));
    for (int it = 0; it < 2; ++it) {
        const double e = phi(x) - p;
        const double u = e * sqrt_2pi * std::exp(x * x / 2.0);
        if (!std::isfinite(u)) break;  // tail beyond refinement reach
        x -= u / (1.0 + x * u / 2.0);
    }
    return x;
}

double gaussianize(const BitSource& u, int k) {
    double h = bit_split(u, k);
    if (h == 0.0) h = std::ldexp(1.0, -(u.size() + 1));
    return phi_inv(h);
}

DiscreteDistribution::DiscreteDistribution(std::vector<double> xs, std::vector<double> qs)
    : xs_(std::move(xs)), qs_(std::move(qs)) {
    if (xs_.empty() || xs_.size() != qs_.size())
        throw std::invalid_argument("DiscreteDistribution: points and masses must match and be nonempty");
    double total = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        if (!std::isfinite(xs_[i]))
            throw std::invalid_argument("DiscreteDistribution: point " + std::to_string(i) +
                                        " is not finite");
        if (i > 0 && xs_[i] <= xs_[i - 1])
            throw std::invalid_argument("DiscreteDistribution: points must be strictly increasing");
        if (!(qs_[i] > 0.0))
            throw std::invalid_argument("DiscreteDistribution: mass " + std::to_string(i) +
                                        " must be positive");
        total += qs_[i];
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("DiscreteDistribution: masses sum to " +
                                    std::to_string(total) + ", expected 1");
}

double DiscreteDistribution::cdf(double x) const {
    double c = 0.0;
    for (std::size_t i = 0; i < xs_.size() && xs_[i] <= x; ++i) c += qs_[i];
    return c;
}

double quantile_func(const DiscreteDistribution& nu, double y) {
    if (!(y > 0.0 && y < 1.0))
        throw std::invalid_argument("quantile_func: argument must lie strictly inside (0, 1)");
    double c = 0.0;
    for (int i = 0; i < nu.size(); ++i) {
        c += nu.masses()[static_cast<std::size_t>(i)];
        if (c >= y) return nu.points()[static_cast<std::size_t>(i)];
    }
    return nu.points().back();  // roundoff left the last cumulative just under y
}

double smooth_sample(const DiscreteDistribution& nu, double eps, double y0, double y1) {
    if (eps < 0.0) throw std::invalid_argument("smooth_sample: negative smoothing");
    if (!std::isfinite(y0) || !std::isfinite(y1))
        throw std::invalid_argument("smooth_sample: seeds must be finite");
    return eps * y0 + quantile_func(nu, phi(y1));
}

double ks_statistic(std::vector<double> samples, double (*cdf)(double)) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, f - static_cast<double>(i) / n);
        d = std::max(d, static_cast<double>(i + 1) / n - f);
    }
    return d;
}

double ks_critical(double alpha, std::size_t n) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("ks_critical: alpha must lie strictly inside (0, 1)");
    if (n == 0) throw std::invalid_argument("ks_critical: sample count must be positive");
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

Chi2Result chi2_independence_8x8(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size() || u.empty())
        throw std::invalid_argument("chi2_independence_8x8: sample vectors must match and be nonempty");
    constexpr int kBins = 8;
    long counts[kBins][kBins] = {};
    for (std::size_t i = 0; i < u.size(); ++i) {
        const int bi = std::clamp(static_cast<int>(u[i] * kBins), 0, kBins - 1);
        const int bj = std::clamp(static_cast<int>(v[i] * kBins), 0, kBins - 1);
        ++counts[bi][bj];
    }
    double row[kBins] = {}, col[kBins] = {};
    for (int i = 0; i < kBins; ++i)
        for (int j = 0; j < kBins; ++j) {
            row[i] += static_cast<double>(counts[i][j]);
            col[j] += static_cast<double>(counts[i][j]);
        }
    const double n = static_cast<double>(u.size());
    Chi2Result r;
    r.df = (kBins - 1) * (kBins - 1);
    for (int i = 0; i < kBins; ++i)
        for (int j = 0; j < kBins; ++j) {
            const double expected = row[i] * col[j] / n;
            if (expected <= 0.0) continue;
            const double diff = static_cast<double>(counts[i][j]) - expected;
            r.statistic += diff * diff / expected;
        }
    return r;
}

double pearson_corr(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size() || u.size() < 2)
        throw std::invalid_argument("pearson_corr: need two matched samples at least");
    const double n = static_cast<double>(u.size());
    double mu = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        mu += u[i];
        mv += v[i];
    }
    mu /= n;
    mv /= n;
    double suu = 0.0, svv = 0.0, suv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double du = u[i] - mu;
        const double dv = v[i] - mv;
        suu += du * du;
        svv += dv * dv;
        suv += du * dv;
    }
    if (suu <= 0.0 || svv <= 0.0)
        throw std::invalid_argument("pearson_corr: a sample is constant");
    return suv / std::sqrt(suu * svv);
}

ChannelEnumeration enumerate_two_channels(int n_bits) {
    if (n_bits < 2 || n_bits > 16)
        throw std::invalid_argument("enumerate_two_channels: bit count must lie in 2..16");
    const std::vector<int> pos1 = channel_positions(1, n_bits);
    const std::vector<int> pos2 = channel_positions(2, n_bits);

    ChannelEnumeration e;
    e.m1 = static_cast<int>(pos1.size());
    e.m2 = static_cast<int>(pos2.size());
    e.patterns = 1L << n_bits;
    e.expected_count = 1L << (n_bits - e.m1 - e.m2);

    std::vector<long> counts(static_cast<std::size_t>(1L << (e.m1 + e.m2)), 0);
    for (long pat = 0; pat < e.patterns; ++pat) {
        long v1 = 0, v2 = 0;
        for (int i = 0; i < e.m1; ++i)
            v1 = (v1 << 1) | ((pat >> (n_bits - pos1[static_cast<std::size_t>(i)])) & 1L);
        for (int i = 0; i < e.m2; ++i)
            v2 = (v2 << 1) | ((pat >> (n_bits - pos2[static_cast<std::size_t>(i)])) & 1L);
        ++counts[static_cast<std::size_t>((v1 << e.m2) | v2)];
    }

    e.max_count_dev = 0;
    std::vector<long> m1_counts(static_cast<std::size_t>(1L << e.m1), 0);
    std::vector<long> m2_counts(static_cast<std::size_t>(1L << e.m2), 0);
    for (long v1 = 0; v1 < (1L << e.m1); ++v1)
        for (long v2 = 0; v2 < (1L << e.m2); ++v2) {
            const long cnt = counts[static_cast<std::size_t>((v1 << e.m2) | v2)];
            e.max_count_dev = std::max(e.max_count_dev, std::abs(cnt - e.expected_count));
            m1_counts[static_cast<std::size_t>(v1)] += cnt;
            m2_counts[static_cast<std::size_t>(v2)] += cnt;
        }
    e.product_uniform = e.max_count_dev == 0;
    e.marginals_uniform =
        std::all_of(m1_counts.begin(), m1_counts.end(),
                    [&](long c) { return c == (e.patterns >> e.m1); }) &&
        std::all_of(m2_counts.begin(), m2_counts.end(),
                    [&](long c) { return c == (e.patterns >> e.m2); });
    return e;
}

double tv_to_law(const std::vector<double>& samples, const DiscreteDistribution& nu) {
    if (samples.empty()) throw std::invalid_argument("tv_to_law: no samples");
    std::map<double, long> counts;
    long off_support = 0;
    for (const double s : samples) {
        const auto it = std::lower_bound(nu.points().begin(), nu.points().end(), s);
        if (it != nu.points().end() && *it == s)
            ++counts[s];
        else
            ++off_support;
    }
    const double n = static_cast<double>(samples.size());
    double sum = static_cast<double>(off_support) / n;  // law carries no mass off support
    for (int i = 0; i < nu.size(); ++i) {
        const double x = nu.points()[static_cast<std::size_t>(i)];
        const auto it = counts.find(x);
        const double emp = it == counts.end() ? 0.0 : static_cast<double>(it->second) / n;
        sum += std::abs(emp - nu.masses()[static_cast<std::size_t>(i)]);
    }
    return 0.5 * sum;
}

}  // namespace condex
