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

#ifndef BEVKIT_TOOLS_APP_HPP_
#define BEVKIT_TOOLS_APP_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bevkit/assignment.hpp"
#include "bevkit/boxes3d.hpp"
#include "bevkit/error.hpp"
#include "bevkit/grid.hpp"
#include "bevkit/metrics.hpp"
#include "bevkit/voxel_bev.hpp"

namespace bevkit::app
{

enum class Command
{
  kGen,
  kProject,
  kCenterness,
  kAssign,
  kNms,
  kEval,
  kBench,
  kNoiseSweep,
  kLossCheck,
  kSelftest,
};

enum ExitCode : int
{
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitNotFound = 3,
  kExitMalformed = 4,
  kExitShape = 5,
  kExitCheckFailed = 6,
  kExitIo = 7,
};

int exit_code_for(ErrorCode code);

struct RunConfig
{
  Command command = Command::kSelftest;

  std::filesystem::path out;
  std::filesystem::path rig;
  std::filesystem::path features;
  std::filesystem::path bev_out;
  std::filesystem::path in;
  std::filesystem::path anchors;
  std::filesystem::path gts;
  std::filesystem::path preds;
  std::filesystem::path map_pred;
  std::filesystem::path map_gt;
  std::filesystem::path plot_dir;
  std::vector<std::filesystem::path> scenes;

  VoxelGridSpec grid;
  Fusion fusion = Fusion::kAverage;
  Sampling sampling = Sampling::kBilinear;

  std::uint64_t seed = 7;
  int cameras = 6;
  int boxes = 20;

  bool dynamic_assign = false;
  double pos_iou = 0.6;
  double neg_iou = 0.45;
  DynamicAssignOptions dynamic;

  NmsOptions nms;
  std::vector<double> thresholds = kDefaultCenterThresholds;

  int layers = 3;
  bool bench_naive = true;
  bool bench_s2c = true;
  int channels = 64;
  int conv_channels = 64;
  int depth_bins = 59;
  int feat_height = 232;
  int feat_width = 400;

  std::vector<double> levels{0.0, 1e-3, 1e-2, 5e-2, 1e-1, 2e-1};
  int trials = 20;
  /// Scenes to generate for the sweep when no --scene is given.
  int generated_scenes = 0;
  bool perturb_rotation = true;
  bool perturb_translation = true;

  std::size_t loss_trials = 100;

  /// 0 means hardware concurrency.
  unsigned threads = 0;
};

/// "400x400x12" plus optional "0.25,0.25,0.5" bin sizes; the grid is centered
/// on the ego origin with layer 0 on the ground.
VoxelGridSpec parse_grid(const std::string & dims, const std::string & voxel_size);

std::vector<double> parse_number_list(const std::string & text);

/// Runs one subcommand. Diagnostics go to `err`, reports to `out`. Never throws.
int run_pipeline(const RunConfig & config, std::ostream & out, std::ostream & err);

struct SelftestReport
{
  std::vector<std::string> lines;
  bool pass = true;
};

/// Invariant suite used by `bevkit selftest`; writes deterministic artifacts
/// under `dir`.
SelftestReport run_selftest(const std::filesystem::path & dir, unsigned threads);

}  // namespace bevkit::app

#endif  // BEVKIT_TOOLS_APP_HPP_
