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

#include "bevkit/sweep.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <mutex>
#include <cmath>
#include <thread>

#include "bevkit/error.hpp"
#include "bevkit/random.hpp"

namespace bevkit
{

namespace
{

int ground_layer(const VoxelGridSpec & grid, double ground_z)
{
  return grid.layer_of(ground_z).value_or(0);
}

void check_bev(const BevGrid & bev, int feature_channels, const VoxelGridSpec & grid)
{
  require(feature_channels == SceneChannels::kCount, ErrorCode::kShapeMismatch,
    "decoding expects synthetic scene feature channels");
  require(bev.nx == grid.nx && bev.ny == grid.ny && bev.channels == grid.nz * feature_channels,
    ErrorCode::kShapeMismatch, "BEV tensor does not match the grid");
}

}  // namespace

BevGrid decode_segmentation(const BevGrid & bev, int feature_channels, const VoxelGridSpec & grid, double ground_z,
  const DecodeOptions & options)
{
  check_bev(bev, feature_channels, grid);
  const int base = ground_layer(grid, ground_z) * feature_channels;
  BevGrid out(bev.nx, bev.ny, 2);
  for (int i = 0; i < bev.nx; ++i) {
    for (int j = 0; j < bev.ny; ++j) {
      out.at(i, j, kMapDrivable) = bev.at(i, j, base + SceneChannels::kDrivable) >= options.threshold ? 1.0F : 0.0F;
      out.at(i, j, kMapLane) = bev.at(i, j, base + SceneChannels::kLane) >= options.threshold ? 1.0F : 0.0F;
    }
  }
  return out;
}

std::vector<Box3D> decode_detections(const BevGrid & bev, int feature_channels, const VoxelGridSpec & grid,
  double ground_z, const DecodeOptions & options)
{
  check_bev(bev, feature_channels, grid);
  const int base = ground_layer(grid, ground_z) * feature_channels;
  std::vector<Box3D> boxes;
  std::vector<char> seen(static_cast<std::size_t>(bev.nx) * bev.ny);
  std::vector<std::array<int, 2>> stack;
  std::vector<std::array<int, 2>> cells;
  for (int cls = 0; cls < kNumObjectClasses; ++cls) {
    const int ch = base + SceneChannels::footprint(cls);
    const AnchorSize prior = class_prior(cls);
    std::fill(seen.begin(), seen.end(), 0);
    for (int i0 = 0; i0 < bev.nx; ++i0) {
      for (int j0 = 0; j0 < bev.ny; ++j0) {
        const std::size_t idx0 = static_cast<std::size_t>(i0) * bev.ny + j0;
        if (seen[idx0] || bev.at(i0, j0, ch) < options.threshold) {
          continue;
        }
        seen[idx0] = 1;
        stack.assign(1, {i0, j0});
        cells.clear();
        while (!stack.empty()) {
          const auto [i, j] = stack.back();
          stack.pop_back();
          cells.push_back({i, j});
          for (int di = -1; di <= 1; ++di) {
            for (int dj = -1; dj <= 1; ++dj) {
              const int ni = i + di;
              const int nj = j + dj;
              if (ni < 0 || nj < 0 || ni >= bev.nx || nj >= bev.ny) {
                continue;
              }
              const std::size_t idx = static_cast<std::size_t>(ni) * bev.ny + nj;
              if (!seen[idx] && bev.at(ni, nj, ch) >= options.threshold) {
                seen[idx] = 1;
                stack.push_back({ni, nj});
              }
            }
          }
        }
        // Order-independent statistics: sort before summing.
        std::sort(cells.begin(), cells.end());
        double sx = 0.0;
        double sy = 0.0;
        double evidence = 0.0;
        for (const auto & [i, j] : cells) {
          const Eigen::Vector2d c = grid.cell_center(i, j);
          sx += c.x();
          sy += c.y();
          evidence += bev.at(i, j, ch);
        }
        const double n = static_cast<double>(cells.size());
        const double mx = sx / n;
        const double my = sy / n;
        double cxx = 0.0;
        double cyy = 0.0;
        double cxy = 0.0;
        for (const auto & [i, j] : cells) {
          const Eigen::Vector2d c = grid.cell_center(i, j);
          cxx += (c.x() - mx) * (c.x() - mx);
          cyy += (c.y() - my) * (c.y() - my);
          cxy += (c.x() - mx) * (c.y() - my);
        }
        Box3D b;
        b.class_id = cls;
        b.x = mx;
        b.y = my;
        b.w = prior.w;
        b.l = prior.l;
        b.h = prior.h;
        b.z = ground_z + 0.5 * prior.h;
        b.theta = cells.size() >= 3 ? normalize_angle(0.5 * std::atan2(2.0 * cxy, cxx - cyy)) : 0.0;
        const double area_ratio = std::min(1.0, n * grid.dx * grid.dy / (prior.w * prior.l));
        b.score = std::clamp(evidence / n, 0.0, 1.0) * area_ratio;
        boxes.push_back(b);
      }
    }
  }
  return boxes;
}

SceneEval evaluate_scene(const SyntheticScene & scene, const CameraRig & rig, unsigned threads)
{
  UnprojectOptions opts;
  opts.threads = threads;
  const VoxelGrid voxels = unproject(rig, scene.feature_images, scene.grid, opts);
  const BevGrid bev = spatial_to_channel(voxels);
  SceneEval eval;
  eval.segmentation = decode_segmentation(bev, voxels.channels, scene.grid, scene.ground_z);
  const auto ious = seg_iou_per_class(eval.segmentation, scene.map_mask);
  eval.seg_iou = 0.5 * (ious[kMapDrivable] + ious[kMapLane]);
  eval.detections = decode_detections(bev, voxels.channels, scene.grid, scene.ground_z);
  eval.detail = center_distance_ap(eval.detections, scene.gt_boxes);
  eval.detail.seg_iou_per_class = ious;
  eval.map = eval.detail.map;
  return eval;
}

std::vector<SweepPoint> noise_sweep(std::span<const SyntheticScene> scenes, const SweepConfig & config)
{
  require(!scenes.empty(), ErrorCode::kInvalidArgument, "noise sweep needs at least one scene");
  require(config.trials >= 1, ErrorCode::kInvalidArgument, "noise sweep needs at least one trial");
  for (double sigma : config.levels) {
    require(sigma >= 0.0 && std::isfinite(sigma), ErrorCode::kInvalidArgument, "noise levels must be >= 0");
  }
  const std::size_t per_level = scenes.size() * static_cast<std::size_t>(config.trials);
  const std::size_t jobs = per_level * config.levels.size();
  std::vector<double> seg(jobs);
  std::vector<double> map(jobs);

  auto run = [&](std::size_t job) {
    const std::size_t level = job / per_level;
    const std::size_t s = (job % per_level) / static_cast<std::size_t>(config.trials);
    const std::size_t t = job % static_cast<std::size_t>(config.trials);
    NoiseSpec noise;
    noise.sigma = config.levels[level];
    noise.perturb_rotation = config.perturb_rotation;
    noise.perturb_translation = config.perturb_translation;
    // Independent of the level, so every level sees the same draw directions.
    const std::uint64_t draw = CounterRng::mix(config.seed ^ CounterRng::mix((s << 32) + t));
    const CameraRig rig = perturb_extrinsics(scenes[s].rig, noise, draw);
    const SceneEval eval = evaluate_scene(scenes[s], rig);
    seg[job] = eval.seg_iou;
    map[job] = eval.map;
  };

  unsigned workers = config.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : config.threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, jobs));
  if (workers <= 1) {
    for (std::size_t job = 0; job < jobs; ++job) {
      run(job);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t job = next++; job < jobs; job = next++) {
            try {
              run(job);
            } catch (...) {
              const std::lock_guard lock(error_mutex);
              if (!error) {
                error = std::current_exception();
              }
            }
          }
        });
      }
    }
    if (error) {
      std::rethrow_exception(error);
    }
  }

  std::vector<SweepPoint> points;
  for (std::size_t level = 0; level < config.levels.size(); ++level) {
    SweepPoint p;
    p.sigma = config.levels[level];
    p.runs = static_cast<int>(per_level);
    for (std::size_t k = 0; k < per_level; ++k) {
      p.seg_iou += seg[level * per_level + k];
      p.map += map[level * per_level + k];
    }
    p.seg_iou /= static_cast<double>(per_level);
    p.map /= static_cast<double>(per_level);
    points.push_back(p);
  }
  return points;
}

}  // namespace bevkit
