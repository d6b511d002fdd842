#include <benchmark/benchmark.h>

#include <vector>

#include "catsim/constants.hpp"
#include "catsim/interferometer.hpp"
#include "catsim/thermometry.hpp"

using namespace catsim;

static void BM_DisplacementOperator(benchmark::State& state) {
  const FockSpace space(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(displacement_operator(std::polar(1.42, 0.3), space));
}
BENCHMARK(BM_DisplacementOperator)->Arg(20)->Arg(60)->Arg(120);

static void BM_CatSequence(benchmark::State& state) {
  CatProtocolConfig cfg;
  cfg.params = PhysicalParams::lab_defaults();
  cfg.params.epsilon_override = 0.19;
  cfg.t_drive = 0.45e-6;
  cfg.phi = 2.0;
  cfg.delta_M = constants::pi / 2.0;
  cfg.nbar0 = static_cast<double>(state.range(0)) / 100.0;
  cfg.fock_dim = 60;
  for (auto _ : state) benchmark::DoNotOptimize(run_cat_sequence(cfg).p_up);
}
BENCHMARK(BM_CatSequence)->Arg(25)->Arg(330)->Unit(benchmark::kMillisecond);

static void BM_DriveNumeric(benchmark::State& state) {
  const FockSpace space(40);
  const JointState in = JointState::basis(space, Spin::up, 0);
  const PhysicalParams p = PhysicalParams::lab_defaults();
  const int steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(drive_numeric(in, p, 0.45e-6, 0.0, steps).state.norm());
}
BENCHMARK(BM_DriveNumeric)->Arg(100)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_SidebandSpectrum(benchmark::State& state) {
  const PhysicalParams p = PhysicalParams::lab_defaults();
  const double t = 1e-3;
  std::vector<double> grid;
  for (double d = -1.6 * p.trap_omega; d <= 1.6 * p.trap_omega; d += 0.05 / t) grid.push_back(d);
  const double nbar = static_cast<double>(state.range(0)) / 100.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sideband_spectrum(nbar, constants::pi / (2.0 * p.eta * t), p.eta, t, p.trap_omega, grid));
  }
}
BENCHMARK(BM_SidebandSpectrum)->Arg(25)->Arg(330)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
