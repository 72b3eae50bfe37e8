#include <benchmark/benchmark.h>

#include <cmath>

#include "thermoshift/counting.hpp"
#include "thermoshift/fuchsian.hpp"
#include "thermoshift/thermo.hpp"

using namespace thermoshift;

namespace {

TruncatedShift noaa() {
  static auto spec = ShiftSpec::no_aa();
  return build_truncation(spec, TruncationRule::first_k(2));
}

PotentialPtr mixed() {
  return std::make_shared<LetterPotential>(
      std::unordered_map<Letter, double>{{0, 1.0}, {1, std::sqrt(2.0)}});
}

}  // namespace

static void BM_EnumerateFix(benchmark::State& state) {
  auto shift = noaa();
  std::size_t n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    std::int64_t count = 0;
    for_each_fix(shift, n, [&](std::span<const std::int32_t>) { ++count; });
    benchmark::DoNotOptimize(count);
  }
}
BENCHMARK(BM_EnumerateFix)->Arg(12)->Arg(18)->Arg(24);

static void BM_SpectralPressure(benchmark::State& state) {
  auto shift = noaa();
  auto f = mixed();
  int depth = static_cast<int>(state.range(0));
  auto op = build_transfer(shift, scale(-0.58, f), depth);
  for (auto _ : state) {
    auto eq = spectral_pressure(op, 1e-12);
    benchmark::DoNotOptimize(eq.pressure);
  }
}
BENCHMARK(BM_SpectralPressure)->Arg(1)->Arg(4)->Arg(8);

static void BM_SolveDelta(benchmark::State& state) {
  auto shift = noaa();
  auto f = mixed();
  for (auto _ : state) {
    auto dr = solve_delta(f, shift, -std::numeric_limits<double>::infinity(),
                          {.tol = 1e-10});
    benchmark::DoNotOptimize(dr.delta);
  }
}
BENCHMARK(BM_SolveDelta);

static void BM_RenewalCount(benchmark::State& state) {
  auto shift = noaa();
  auto f = mixed();
  double t = static_cast<double>(state.range(0));
  RenewalQuery q;
  q.base_prefix.idx = {0};
  q.t = t;
  for (auto _ : state) {
    auto r = renewal_count(*f, q, shift);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_RenewalCount)->Arg(6)->Arg(10)->Arg(14);

static void BM_RoofEval(benchmark::State& state) {
  auto coding = build_coding(GroupPresentation::default_group());
  auto spec = coding.shift_spec();
  auto shift = build_truncation(spec, TruncationRule::first_k(64));
  RoofPotential roof(coding, Representation::sym(coding, 3), phi_from_alpha({1.0, 1.0}, 3));
  std::int32_t letter = 0;
  for (auto _ : state) {
    letter = (letter + 1) % static_cast<std::int32_t>(shift.size());
    auto v = roof.eval(shift, std::span<const std::int32_t>(&letter, 1));
    benchmark::DoNotOptimize(v.value);
  }
}
BENCHMARK(BM_RoofEval);

BENCHMARK_MAIN();
