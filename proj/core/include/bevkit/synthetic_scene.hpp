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

#ifndef BEVKIT_SYNTHETIC_SCENE_HPP_
#define BEVKIT_SYNTHETIC_SCENE_HPP_

#include <cstdint>
#include <vector>

#include "bevkit/boxes3d.hpp"
#include "bevkit/camera_rig.hpp"
#include "bevkit/grid.hpp"
#include "bevkit/voxel_bev.hpp"

namespace bevkit
{

/// Object classes drawn by the scene generator.
enum class ObjectClass : int
{
  kCar = 0,
  kPedestrian = 1,
  kCone = 2,
};

inline constexpr int kNumObjectClasses = 3;

/// Mean footprint/height of each generated class.
AnchorSize class_prior(int class_id);

/// Channel layout of rendered scene feature images:
///   [0, K)        silhouette: the pixel overlaps the projected outline of a
///                 box of class k (no occlusion, boxes of a class share it)
///   K             drivable: the ray's ground hit is drivable
///   K + 1         lane: the ray's ground hit is on a lane line
///   [K + 2, 2K+2) footprint: the ray's ground hit is inside a class-k box
/// Ground channels treat boxes as transparent.
struct SceneChannels
{
  static constexpr int silhouette(int class_id) { return class_id; }
  static constexpr int kDrivable = kNumObjectClasses;
  static constexpr int kLane = kNumObjectClasses + 1;
  static constexpr int footprint(int class_id) { return kNumObjectClasses + 2 + class_id; }
  static constexpr int kCount = 2 * kNumObjectClasses + 2;
};

/// Map mask channels.
inline constexpr int kMapDrivable = 0;
inline constexpr int kMapLane = 1;

struct SceneOptions
{
  int image_width = 640;
  int image_height = 360;
  /// Feature maps are rendered at image size / stride.
  int feature_stride = 4;
  double hfov_deg = 75.0;
  double camera_height = 1.6;
  double ring_radius = 1.0;
  /// Boxes are centered on drivable cells when set.
  bool constrained_placement = true;
  /// Minimum ground distance of a box center from the ego origin.
  double min_box_range = 6.0;
  int lanes = 3;
};

struct SyntheticScene
{
  std::uint64_t seed = 0;
  VoxelGridSpec grid;
  /// Height of the ground plane: the center of the lowest voxel layer.
  double ground_z = 0.0;
  CameraRig rig;
  std::vector<Box3D> gt_boxes;
  /// nx x ny x 2 binary mask (drivable, lane).
  BevGrid map_mask;
  std::vector<FeatureImage> feature_images;
};

/// Outward-facing ring of cameras around the ego origin; `seed` jitters the
/// mounting yaw and pitch slightly.
CameraRig make_ring_rig(int n_cameras, const SceneOptions & options, std::uint64_t seed);

/// Renders one feature image per camera (feature resolution) for the given
/// world, using the channel layout of SceneChannels.
std::vector<FeatureImage> render_feature_images(const CameraRig & rig, const std::vector<Box3D> & boxes,
  const BevGrid & map_mask, const VoxelGridSpec & grid, double ground_z, const SceneOptions & options);

/// Deterministic scene: identical (seed, parameters) give bit-identical output.
SyntheticScene generate_scene(
  std::uint64_t seed, int n_cameras, int n_boxes, const VoxelGridSpec & grid, const SceneOptions & options = {});

/// Cells whose centers fall inside the box footprint.
std::vector<std::array<int, 2>> rasterize_footprint(const Box3D & box, const VoxelGridSpec & grid);

struct NoiseSpec
{
  /// Rotation perturbation scale (radians) and translation scale (meters).
  double sigma = 0.0;
  std::vector<double> levels{1e-3, 1e-2, 5e-2, 1e-1, 2e-1};
  bool perturb_rotation = true;
  bool perturb_translation = true;
};

/// Each camera's rotation is left-multiplied by an axis-angle rotation with a
/// uniformly random axis and magnitude min(|N(0, sigma^2)|, 3 sigma); each
/// translation component gets N(0, sigma^2). sigma = 0 is the identity.
CameraRig perturb_extrinsics(const CameraRig & rig, const NoiseSpec & noise, std::uint64_t seed);

}  // namespace bevkit

#endif  // BEVKIT_SYNTHETIC_SCENE_HPP_
