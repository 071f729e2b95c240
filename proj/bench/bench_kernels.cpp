// Serial reference kernels against their OpenMP counterparts.
//
//   ./bench_kernels --benchmark_filter=Gram
//   OMP_NUM_THREADS=8 ./bench_kernels

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "deepboost/boosting.hpp"
#include "deepboost/filters.hpp"
#include "deepboost/kernels.hpp"

using namespace deepboost;

namespace {

Matrix noise(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix m(rows, cols);
    for (double& v : m.values()) v = u(rng);
    return m;
}

std::vector<Matrix> image_set(int n, int side) {
    std::vector<Matrix> out;
    for (int i = 0; i < n; ++i) out.push_back(noise(side, side, 100 + i));
    return out;
}

void BM_CorrelateBank_Serial(benchmark::State& state) {
    const Matrix img = noise(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 1);
    const auto ks = make_gabor_bank().kernels();
    for (auto _ : state)
        for (const auto& k : ks) benchmark::DoNotOptimize(kernels::reference::correlate_valid(img, k));
}
BENCHMARK(BM_CorrelateBank_Serial)->Arg(32)->Arg(96)->Arg(256);

void BM_CorrelateBank_Parallel(benchmark::State& state) {
    const Matrix img = noise(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 1);
    const auto ks = make_gabor_bank().kernels();
    for (auto _ : state) benchmark::DoNotOptimize(kernels::correlate_bank(img, ks));
}
BENCHMARK(BM_CorrelateBank_Parallel)->Arg(32)->Arg(96)->Arg(256);

void BM_Gram_Serial(benchmark::State& state) {
    const auto imgs = image_set(static_cast<int>(state.range(0)), 32);
    std::vector<const Matrix*> ptrs;
    for (const auto& m : imgs) ptrs.push_back(&m);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::reference::patch_gram(ptrs, kFilterSize));
}
BENCHMARK(BM_Gram_Serial)->Arg(50)->Arg(200);

void BM_Gram_Parallel(benchmark::State& state) {
    const auto imgs = image_set(static_cast<int>(state.range(0)), 32);
    std::vector<const Matrix*> ptrs;
    for (const auto& m : imgs) ptrs.push_back(&m);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::patch_gram(ptrs, kFilterSize));
}
BENCHMARK(BM_Gram_Parallel)->Arg(50)->Arg(200);

// Sparse histogram-like rows: few active dimensions per sample out of D = 16800.
struct StumpData {
    std::vector<FeatureVector> rows;
    std::vector<std::vector<double>> dense;
    std::vector<double> y;
};

StumpData stump_data(int n, int dim) {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> pick(0, dim - 1);
    std::uniform_int_distribution<int> count(1, 40);
    StumpData d;
    for (int i = 0; i < n; ++i) {
        std::vector<double> row(dim, 0.0);
        for (int k = 0; k < 300; ++k) row[pick(rng)] += count(rng);
        FeatureVector fv;
        fv.dim = dim;
        for (int j = 0; j < dim; ++j)
            if (row[j] != 0.0) {
                fv.indices.push_back(static_cast<std::uint32_t>(j));
                fv.values.push_back(static_cast<float>(row[j]));
            }
        d.rows.push_back(std::move(fv));
        d.dense.push_back(std::move(row));
        d.y.push_back(i % 2 ? 1.0 : -1.0);
    }
    return d;
}

void BM_StumpSearch_Reference(benchmark::State& state) {
    const auto d = stump_data(static_cast<int>(state.range(0)), 2000);
    const auto w = SampleWeights::uniform(d.y.size());
    for (auto _ : state) benchmark::DoNotOptimize(reference::fit_stump(d.dense, d.y, w));
}
BENCHMARK(BM_StumpSearch_Reference)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_StumpSearch_Parallel(benchmark::State& state) {
    const auto d = stump_data(static_cast<int>(state.range(0)), 2000);
    const FeatureColumns cols(d.rows);
    const auto w = SampleWeights::uniform(d.y.size());
    for (auto _ : state) benchmark::DoNotOptimize(fit_stump(cols, d.y, w));
}
BENCHMARK(BM_StumpSearch_Parallel)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
