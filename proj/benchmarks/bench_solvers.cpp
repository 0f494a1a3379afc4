#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "vmsd/driver.hpp"
#include "vmsd/maxwell_sd.hpp"
#include "vmsd/nitsche.hpp"
#include "vmsd/vlasov_sd.hpp"

using namespace vmsd;

namespace {

// Vlasov slab matrix assembly for an n x n x n phase mesh with a random-free smooth field.
void BM_VlasovAssemble(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int p = static_cast<int>(state.range(1));
    vlasov::PhaseGrid grid({0.0, 1.0}, n, {-1.0, 1.0}, {-1.0, 1.0}, n, n, p, false);
    sd::SlabSpace fs(grid.x_mesh(), p, 3);
    vlasov::SlabSolver solver(grid, fs, 0.05, 0.03);
    const auto samples = solver.sample(
        [](double t, std::span<const double> x) {
            vlasov::FieldPoint f;
            f.e[1] = 0.01 * std::sin(6.28 * x[0] + t);
            f.b[2] = 0.01 * std::cos(6.28 * x[0]);
            return f;
        },
        0.0);
    const std::vector<double> delta(grid.phase().mesh().cell_count(), 0.05);
    for (auto _ : state) benchmark::DoNotOptimize(solver.assemble(delta, samples).nonzeros());
    state.counters["dofs"] = static_cast<double>(grid.phase().slab_size());
}
BENCHMARK(BM_VlasovAssemble)->Args({8, 1})->Args({16, 1})->Args({8, 2})->Unit(benchmark::kMillisecond);

// Full Vlasov slab solve (assembly plus linear solve).
void BM_VlasovSolve(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    vlasov::PhaseGrid grid({0.0, 1.0}, n, {-1.0, 1.0}, {-1.0, 1.0}, n, n, 1, false);
    sd::SlabSpace fs(grid.x_mesh(), 1, 3);
    vlasov::SlabSolver solver(grid, fs, 0.05, 0.03);
    const auto samples = solver.sample([](double, std::span<const double>) { return vlasov::FieldPoint{}; }, 0.0);
    const std::vector<double> delta(grid.phase().mesh().cell_count(), 0.05);
    const auto f0 = grid.phase().project_trace([](std::span<const double> x, std::span<double> out) {
        out[0] = (1 + 0.1 * std::cos(6.28 * x[0])) * (1 - x[1] * x[1]) * (1 - x[2] * x[2]);
    });
    for (auto _ : state) benchmark::DoNotOptimize(solver.solve(0, delta, f0, samples).outgoing.data());
    state.counters["dofs"] = static_cast<double>(grid.phase().slab_size());
}
BENCHMARK(BM_VlasovSolve)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

// Maxwell slab solve with the cached factorization.
void BM_MaxwellSlab(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    sd::SlabSpace s(mesh::TensorMesh({{0.0, 1.0}}, {n}, {true}), 2, 3);
    maxwell::SlabSolver solver(s, 1.0 / n, maxwell::flux_matrices(maxwell::FieldMode::reduced1half));
    const std::vector<double> delta(static_cast<std::size_t>(n), 0.05);
    const auto w0 = s.project_trace([](std::span<const double> x, std::span<double> out) {
        out[0] = 0.0;
        out[1] = std::sin(6.28 * x[0]);
        out[2] = std::cos(6.28 * x[0]);
    });
    for (auto _ : state) benchmark::DoNotOptimize(solver.solve(0, delta, w0).outgoing.data());
}
BENCHMARK(BM_MaxwellSlab)->Arg(64)->Arg(512)->Unit(benchmark::kMicrosecond);

// One coupled Weibel slab on the coarse diagnostic mesh.
void BM_WeibelSlab(benchmark::State& state) {
    const auto c = driver::WeibelCase::preset(1);
    driver::Discretization d;
    d.x_cells = 16;
    d.v_cells1 = d.v_cells2 = 22;
    d.v1 = {-1.1, 1.1};
    d.v2 = {-1.1, 1.1};
    d.final_time = 0.05;
    d.slabs = 1;
    for (auto _ : state) {
        state.PauseTiming();
        driver::CoupledSolver solver(d, c.length());
        solver.set_initial(driver::weibel_initial(c));
        state.ResumeTiming();
        benchmark::DoNotOptimize(solver.step(0).residuals.size());
    }
}
BENCHMARK(BM_WeibelSlab)->Unit(benchmark::kMillisecond)->Iterations(3);

// Nitsche operator assembly and the three-level step.
void BM_NitscheAssemble(benchmark::State& state) {
    nitsche::Params p;
    p.cells = static_cast<int>(state.range(0));
    const nitsche::Space s(p);
    for (auto _ : state) benchmark::DoNotOptimize(nitsche::assemble(s).form.nonzeros());
    state.counters["dofs"] = static_cast<double>(s.size());
}
BENCHMARK(BM_NitscheAssemble)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_NitscheStep(benchmark::State& state) {
    nitsche::Params p;
    p.cells = static_cast<int>(state.range(0));
    const nitsche::Space s(p);
    const auto ops = nitsche::assemble(s);
    const nitsche::TimeStepper stepper(ops, 1.0 / p.cells);
    std::vector<double> e0(s.size(), 0.1);
    std::vector<double> e1(s.size(), 0.2);
    const std::vector<double> load(s.size(), 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(stepper.step(e0, e1, load).data());
}
BENCHMARK(BM_NitscheStep)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
