// Serial reference versus OpenMP kernels. Run with OMP_NUM_THREADS set to
// compare thread counts; the results themselves are identical either way.
#include <benchmark/benchmark.h>

#include <cmath>

#include "gibbs/config.hpp"
#include "gibbs/edgeworth.hpp"
#include "gibbs/tilt.hpp"
#include "gibbs/tv.hpp"
#include "gibbs/validate.hpp"

using namespace gibbs;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

Members gamma_members(std::size_t n)
{
    return make_members(Members{FamilyMember::gamma(2.5, 1.0), FamilyMember::gamma(4.0, 1.0)}, n);
}

void BM_SumMC(benchmark::State& state)
{
    const auto ms = gamma_members(400);
    const MCOptions opts{200'000, 7, exec_of(state)};
    for (auto _ : state)
        benchmark::DoNotOptimize(tv_sum_mc(ms, 20, scalar_vec(6), opts).value);
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(opts.samples));
}

void BM_JointMC(benchmark::State& state)
{
    const auto ms = gamma_members(100);
    const MCOptions opts{20'000, 7, exec_of(state)};
    for (auto _ : state)
        benchmark::DoNotOptimize(tv_joint_mc(ms, 4, scalar_vec(6), opts).value);
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(opts.samples));
}

void BM_WeightedSupError(benchmark::State& state)
{
    const std::size_t m = 256;
    const auto model = build_model(make_members(Members{FamilyMember::gamma(3.0, 1.0)}, m), scalar_vec(0),
                                   EdgeworthOrder::One);
    const double shape = 3.0 * static_cast<double>(m);
    const double sd = std::sqrt(shape);
    const auto exact = [&](const Vec& x) {
        const double s = shape + sd * x(0);
        return s <= 0.0 ? 0.0 : sd * std::exp((shape - 1.0) * std::log(s) - s - std::lgamma(shape));
    };
    const auto grid = uniform_grid(1, 20001);
    for (auto _ : state)
        benchmark::DoNotOptimize(weighted_sup_error(model, exact, grid, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
}

void BM_AssumptionSuite(benchmark::State& state)
{
    const auto ms = gamma_members(400);
    const Vec theta = solve_tilt(ms, scalar_vec(6)).theta;
    const std::vector<Vec> thetas{theta};
    const auto box = make_theta_box(ms, thetas);
    CheckOptions opts;
    opts.exec = exec_of(state);
    for (auto _ : state)
        benchmark::DoNotOptimize(check_all(ms, box, opts).all_passed());
}

} // namespace

BENCHMARK(BM_SumMC)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JointMC)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WeightedSupError)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssumptionSuite)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
