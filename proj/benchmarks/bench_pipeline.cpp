// Copyright 2026 The wkm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "wkm/km.hpp"
#include "wkm/propensity.hpp"
#include "wkm/simulation.hpp"
#include "wkm/variance.hpp"

namespace {

wkm::Dataset sample(std::int64_t n) {
  wkm::DgpConfig config;
  config.n = static_cast<std::size_t>(n);
  config.beta0 = 1.0;
  return wkm::generate_sample(config, 11);
}

void BM_FitLogistic(benchmark::State& state) {
  const auto data = sample(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(wkm::fit_logistic(data));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitLogistic)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_WeightedKm(benchmark::State& state) {
  const auto data = sample(state.range(0));
  const auto fit = wkm::fit_logistic(data);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        wkm::iptw_km(wkm::weighted_processes(data, fit.weights, wkm::Arm::Treated)));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WeightedKm)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

// Full influence-function table; the prefix sums keep this near-linear.
void BM_InfluenceTable(benchmark::State& state) {
  const wkm::IptwAnalysis analysis(sample(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(analysis.influence_table(0.5, wkm::Arm::Treated));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_InfluenceTable)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_Replication(benchmark::State& state) {
  wkm::DgpConfig config;
  config.beta0 = 1.0;
  std::uint64_t rep = 0;
  for (auto _ : state) benchmark::DoNotOptimize(wkm::run_replication(config, 1, rep++));
}
BENCHMARK(BM_Replication)->Unit(benchmark::kMillisecond);

void BM_TrueSurvival(benchmark::State& state) {
  wkm::DgpConfig config;
  config.beta0 = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(wkm::true_survival(config, wkm::Arm::Treated, 0.5));
  }
}
BENCHMARK(BM_TrueSurvival)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
