// Serial vs OpenMP for the batch kernels. Run with OMP_NUM_THREADS to pick
// the thread count.

#include "magiclens/kernels.hpp"

#include "random_cases.hpp"

#include <benchmark/benchmark.h>

using namespace magiclens;

namespace {

void BM_PointingSerial(benchmark::State& st)
{
    const auto cases = sample::pointing_cases(1, static_cast<int>(st.range(0)), 5.0);
    for (auto _ : st)
        benchmark::DoNotOptimize(kernels::pointing_errors_serial(cases));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_PointingParallel(benchmark::State& st)
{
    const auto cases = sample::pointing_cases(1, static_cast<int>(st.range(0)), 5.0);
    for (auto _ : st)
        benchmark::DoNotOptimize(kernels::pointing_errors_parallel(cases));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_HomographySerial(benchmark::State& st)
{
    const auto cases = sample::homography_cases(2, static_cast<int>(st.range(0)), true);
    for (auto _ : st)
        benchmark::DoNotOptimize(kernels::homography_deviations_serial(cases, 10));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_HomographyParallel(benchmark::State& st)
{
    const auto cases = sample::homography_cases(2, static_cast<int>(st.range(0)), true);
    for (auto _ : st)
        benchmark::DoNotOptimize(kernels::homography_deviations_parallel(cases, 10));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

std::vector<ExperimentConfig> sweep_cells(int n)
{
    std::vector<ExperimentConfig> cells(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        cells[static_cast<std::size_t>(i)].face.jitter_sigma_mm = 0.5 * i;
    return cells;
}

void BM_CellsSerial(benchmark::State& st)
{
    const auto cells = sweep_cells(static_cast<int>(st.range(0)));
    for (auto _ : st)
        benchmark::DoNotOptimize(kernels::run_cells_serial(cells));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_CellsParallel(benchmark::State& st)
{
    const auto cells = sweep_cells(static_cast<int>(st.range(0)));
    for (auto _ : st)
        benchmark::DoNotOptimize(kernels::run_cells_parallel(cells));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_PointingSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_PointingParallel)->Arg(1000)->Arg(10000);
BENCHMARK(BM_HomographySerial)->Arg(100)->Arg(1000);
BENCHMARK(BM_HomographyParallel)->Arg(100)->Arg(1000);
BENCHMARK(BM_CellsSerial)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CellsParallel)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
