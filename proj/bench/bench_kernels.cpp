// Copyright 2026 The scenemix Authors
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

// Serial reference kernels against their OpenMP counterparts on fixture frames.

#include <benchmark/benchmark.h>

#include "scenemix/analytics.hpp"
#include "scenemix/composition.hpp"
#include "scenemix/fixture.hpp"
#include "scenemix/ground.hpp"
#include "scenemix/placeability.hpp"

using namespace scenemix;

namespace
{

const SceneFrame & frame()
{
  static const SceneFrame f = generate_fixture_frame(7, 0).frame;
  return f;
}

Execution exec_of(const benchmark::State & state)
{
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void BM_PlaceabilityInference(benchmark::State & state)
{
  const PlaceabilityModel model = PlaceabilityModel::make_default(1);
  const Execution exec = exec_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mlp_forward_batch(model, frame().cloud, exec));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(frame().cloud.size()));
}
BENCHMARK(BM_PlaceabilityInference)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GroundFit(benchmark::State & state)
{
  const Execution exec = exec_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ground_fit(frame().cloud, {}, exec));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(frame().cloud.size()));
}
BENCHMARK(BM_GroundFit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_FgBgRatio(benchmark::State & state)
{
  static const std::vector<SceneFrame> frames = generate_fixture(7, 16);
  const Execution exec = exec_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fg_bg_ratio(frames, {}, "car", exec));
  }
}
BENCHMARK(BM_FgBgRatio)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ComposeFrame(benchmark::State & state)
{
  static const std::vector<SceneFrame> frames = generate_fixture(7, 20);
  static const ObjectBank bank = bank_build(frames).bank;
  const GroundLabels mask = ground_fit(frame().cloud, {}, Execution::serial);
  const std::map<std::string, int> counts{{"barrier", 2}, {"bicycle", 2}, {"car", 4}, {"pedestrian", 2}};
  for (auto _ : state) {
    Rng rng(3);
    benchmark::DoNotOptimize(compose_frame(frame(), bank, counts, mask, {}, rng));
  }
}
BENCHMARK(BM_ComposeFrame)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
