#include <benchmark/benchmark.h>

#include "diiv/estimand.hpp"
#include "diiv/microsim.hpp"
#include "diiv/twostage.hpp"

namespace {

diiv::TrialData make_trial(std::size_t n) {
  diiv::EnvironmentConfig cfg = diiv::preset_config(diiv::Preset::env_a);
  cfg.n = n;
  return diiv::simulate_trial(cfg, 0);
}

void BM_SimulateTrial(benchmark::State& state) {
  diiv::EnvironmentConfig cfg = diiv::preset_config(diiv::Preset::env_a);
  cfg.n = static_cast<std::size_t>(state.range(0));
  std::uint64_t trial = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(diiv::simulate_trial(cfg, trial++));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateTrial)->Arg(1000)->Arg(10000);

void BM_EdgeContrasts(benchmark::State& state) {
  const diiv::TrialData data = make_trial(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        diiv::edge_contrasts(data.table, 1, diiv::TableMode::joint));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EdgeContrasts)->Arg(10000);

void BM_TwoStageJoint(benchmark::State& state) {
  const diiv::TrialData data = make_trial(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(diiv::two_stage_joint(
        data.table, diiv::DirectedDesign{}, diiv::SeKind::robust_hc1));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TwoStageJoint)->Arg(10000);

void BM_OveridentifiedIv(benchmark::State& state) {
  const diiv::TrialData data = make_trial(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(diiv::overidentified_iv(data.table));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_OveridentifiedIv)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
