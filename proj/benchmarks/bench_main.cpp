#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "abphase/field_interaction.hpp"
#include "abphase/interferometers.hpp"
#include "abphase/phase_engine.hpp"
#include "abphase/quadrature.hpp"

using namespace abphase;

namespace {

constexpr double kPi = std::numbers::pi;

void BM_QuadratureOscillatory(benchmark::State& state) {
  quad::Tolerance tol;
  tol.rel = 1e-10;
  for (auto _ : state) {
    auto r = quad::integrate([](double x) { return std::cos(40.0 * x) / (1.0 + x * x); }, 0.0, 10.0, tol);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_QuadratureOscillatory);

void BM_PhaseLocalLoop(benchmark::State& state) {
  FluxTube tube;
  tube.flux = 1.0;
  PathOptions po;
  po.points = static_cast<std::size_t>(state.range(0));
  const Trajectory loop = arc_path({}, 1.0, 0.0, 2.0 * kPi, 1.0, po);
  const ChargeState q{1.0, 1.0, {}, {}};
  for (auto _ : state) benchmark::DoNotOptimize(phase_local(loop, tube, q).phase());
}
BENCHMARK(BM_PhaseLocalLoop)->Arg(100)->Arg(1000)->Arg(10000);

void BM_FieldMomentumFiniteCore(benchmark::State& state) {
  FluxTube tube;
  tube.flux = 1.0;
  tube.radius = 0.1;
  const ChargeState q{1.0, 1.0, {1.0, 0.0}, {}};
  for (auto _ : state) benchmark::DoNotOptimize(field_momentum(q, tube).value);
}
BENCHMARK(BM_FieldMomentumFiniteCore)->Unit(benchmark::kMillisecond);

void BM_AndreevProtocol(benchmark::State& state) {
  JunctionParams p;
  std::vector<double> fluxes(201);
  for (std::size_t i = 0; i < fluxes.size(); ++i) fluxes[i] = 0.05 * static_cast<double>(i);
  ProtocolOptions opt;
  opt.repetitions = static_cast<std::size_t>(state.range(0));
  opt.noise_sigma = 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(measurement_protocol(p, fluxes, opt).points.data());
}
BENCHMARK(BM_AndreevProtocol)->Arg(100)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
