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

#ifndef BEVKIT_SWEEP_HPP_
#define BEVKIT_SWEEP_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "bevkit/boxes3d.hpp"
#include "bevkit/camera_rig.hpp"
#include "bevkit/metrics.hpp"
#include "bevkit/synthetic_scene.hpp"
#include "bevkit/voxel_bev.hpp"

namespace bevkit
{

// Desk-scale stand-ins for the task heads. They read the ground layer of a
// channel-stacked BEV tensor built from synthetic scene features.

struct DecodeOptions
{
  double threshold = 0.5;
};

/// nx x ny x 2 binary (drivable, lane) from the layer containing ground_z.
BevGrid decode_segmentation(const BevGrid & bev, int feature_channels, const VoxelGridSpec & grid, double ground_z,
  const DecodeOptions & options = {});

/// One box per 8-connected component of each class footprint channel. Size
/// comes from the class prior and yaw from the component's principal axis.
std::vector<Box3D> decode_detections(const BevGrid & bev, int feature_channels, const VoxelGridSpec & grid,
  double ground_z, const DecodeOptions & options = {});

struct SceneEval
{
  /// Mean of drivable and lane IoU.
  double seg_iou = 0.0;
  double map = 0.0;
  EvalResult detail;
  BevGrid segmentation;
  std::vector<Box3D> detections;
};

/// Unprojects the scene features through `rig`, which may differ from the rig
/// that rendered them, and scores the decoded outputs against ground truth.
SceneEval evaluate_scene(const SyntheticScene & scene, const CameraRig & rig, unsigned threads = 1);

struct SweepConfig
{
  std::vector<double> levels{0.0, 1e-3, 1e-2, 5e-2, 1e-1, 2e-1};
  /// Noise draws per scene and level. Draws are shared across levels.
  int trials = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool perturb_rotation = true;
  bool perturb_translation = true;
};

struct SweepPoint
{
  double sigma = 0.0;
  double seg_iou = 0.0;
  double map = 0.0;
  int runs = 0;
};

std::vector<SweepPoint> noise_sweep(std::span<const SyntheticScene> scenes, const SweepConfig & config);

}  // namespace bevkit

#endif  // BEVKIT_SWEEP_HPP_
