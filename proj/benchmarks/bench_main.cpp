// Copyright 2026 The bevkit Authors
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

#include <vector>

#include <benchmark/benchmark.h>

#include "bevkit/boxes3d.hpp"
#include "bevkit/random.hpp"
#include "bevkit/synthetic_scene.hpp"
#include "bevkit/voxel_bev.hpp"

namespace
{

using namespace bevkit;

void BM_Unproject(benchmark::State & state)
{
  const int n = static_cast<int>(state.range(0));
  const VoxelGridSpec grid = VoxelGridSpec::centered(n, n, 4, 100.0 / n, 100.0 / n, 1.0);
  const SyntheticScene scene = generate_scene(3, 6, 20, grid);
  const UnprojectOptions options{Fusion::kAverage, Sampling::kBilinear, static_cast<unsigned>(state.range(1))};
  for (auto _ : state) {
    benchmark::DoNotOptimize(unproject(scene.rig, scene.feature_images, grid, options));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.voxel_count()));
}
BENCHMARK(BM_Unproject)->Args({64, 1})->Args({128, 1})->Args({128, 0})->Unit(benchmark::kMillisecond);

std::vector<Box3D> random_boxes(std::size_t n, std::uint64_t seed)
{
  CounterRng rng(seed, Stream::kTest);
  std::vector<Box3D> out(n);
  for (Box3D & b : out) {
    b.x = rng.uniform(-20.0, 20.0);
    b.y = rng.uniform(-20.0, 20.0);
    b.w = rng.uniform(0.5, 2.5);
    b.l = rng.uniform(0.5, 5.0);
    b.theta = rng.uniform(-3.0, 3.0);
    b.score = rng.uniform();
  }
  return out;
}

void BM_BevIou(benchmark::State & state)
{
  const std::vector<Box3D> boxes = random_boxes(1024, 1);
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bev_iou(boxes[k & 1023], boxes[(k * 7 + 3) & 1023]));
    ++k;
  }
}
BENCHMARK(BM_BevIou);

void BM_RotatedNms(benchmark::State & state)
{
  const std::vector<Box3D> boxes = random_boxes(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rotated_nms_indices(boxes));
  }
}
BENCHMARK(BM_RotatedNms)->Arg(200)->Arg(2000)->Unit(benchmark::kMicrosecond);

void BM_Anchors(benchmark::State & state)
{
  const VoxelGridSpec grid;
  const AnchorSpec spec = AnchorSpec::defaults();
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_anchors(spec, grid));
  }
}
BENCHMARK(BM_Anchors)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
