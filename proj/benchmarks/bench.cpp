// Microbenchmarks for the hot paths: blockwise conditioning, schedule
// iteration, the partition meet, Gaussian projection, and the sampler
// transforms. Sizes are chosen so each case runs in well under a second.

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "condex/gaussian.hpp"
#include "condex/operators.hpp"
#include "condex/prob_space.hpp"
#include "condex/sampler.hpp"

namespace {

double u01(std::mt19937_64& eng) { return (eng() >> 11) * 0x1.0p-53; }

std::shared_ptr<const condex::ProbSpace> random_space(int n, std::mt19937_64& eng) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (double& v : w) v = 0.5 + u01(eng);
    return std::make_shared<const condex::ProbSpace>(condex::normalized_weights(std::move(w)));
}

condex::SigmaField random_field(int n, int blocks, std::mt19937_64& eng) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int& l : labels) l = static_cast<int>(eng() % static_cast<std::uint64_t>(blocks));
    return condex::SigmaField::from_labels(labels);
}

condex::RandomVar random_rv(const std::shared_ptr<const condex::ProbSpace>& sp,
                            std::mt19937_64& eng) {
    std::vector<double> v(static_cast<std::size_t>(sp->atom_count()));
    for (double& x : v) x = 2.0 * u01(eng) - 1.0;
    return condex::RandomVar(sp, std::move(v));
}

void BM_cond_exp(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 eng(42);
    const auto sp = random_space(n, eng);
    const condex::SigmaField g = random_field(n, std::max(2, n / 8), eng);
    const condex::RandomVar x = random_rv(sp, eng);
    for (auto _ : state) benchmark::DoNotOptimize(condex::cond_exp(x, g));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_cond_exp)->Arg(64)->Arg(1024)->Arg(16384);

void BM_iterate(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 eng(43);
    const auto sp = random_space(n, eng);
    std::vector<condex::SigmaField> fields;
    for (int k = 0; k < 3; ++k) fields.push_back(random_field(n, std::max(2, n / 16), eng));
    const condex::RandomVar x = random_rv(sp, eng);
    const condex::Schedule sched = condex::Schedule::random_rounds(3, 7);
    condex::IterateOptions opt;
    opt.stop_eps = -1.0;  // fixed work per run, no early exit
    for (auto _ : state) {
        const condex::Trajectory t = condex::iterate(x, fields, sched, 200, nullptr, opt);
        benchmark::DoNotOptimize(t.last.values().data());
    }
    state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_iterate)->Arg(256)->Arg(4096);

void BM_sigma_meet(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 eng(44);
    const condex::SigmaField a = random_field(n, std::max(2, n / 4), eng);
    const condex::SigmaField b = random_field(n, std::max(2, n / 4), eng);
    for (auto _ : state) benchmark::DoNotOptimize(condex::sigma_meet(a, b));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_sigma_meet)->Arg(1024)->Arg(16384);

void BM_phi_inv(benchmark::State& state) {
    std::vector<double> ps;
    for (int i = 1; i < 1000; ++i) ps.push_back(i / 1000.0);
    for (auto _ : state) {
        double s = 0.0;
        for (const double p : ps) s += condex::phi_inv(p);
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(ps.size()));
}
BENCHMARK(BM_phi_inv);

void BM_project(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    std::mt19937_64 eng(45);
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = 2.0 * u01(eng) - 1.0;
    const auto space = std::make_shared<const condex::GaussianSpace>(
        Eigen::MatrixXd(a.transpose() * a + Eigen::MatrixXd::Identity(d, d)));
    Eigen::MatrixXd basis(d, d / 4);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d / 4; ++j) basis(i, j) = 2.0 * u01(eng) - 1.0;
    const condex::Subspace sub(space, basis);
    Eigen::VectorXd u(d);
    for (int i = 0; i < d; ++i) u(i) = 2.0 * u01(eng) - 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(condex::project(u, sub));
}
BENCHMARK(BM_project)->Arg(16)->Arg(64);

void BM_bit_split(benchmark::State& state) {
    const condex::BitSource src = condex::BitSource::random(64, 99);
    for (auto _ : state) {
        double s = 0.0;
        for (int k = 1; k <= 6; ++k) s += condex::bit_split(src, k);
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations() * 6);
}
BENCHMARK(BM_bit_split);

}  // namespace

BENCHMARK_MAIN();
