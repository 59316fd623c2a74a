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

#ifndef BEVKIT_CAMERA_RIG_HPP_
#define BEVKIT_CAMERA_RIG_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bevkit/boxes3d.hpp"

// Conventions
// -----------
// Ego frame: x forward, y left, z up (meters).
// Camera frame: +z along the optical axis, +x right, +y down.
// Pixel coordinates are continuous; pixel (col j, row i) covers
// [j, j + 1) x [i, i + 1), so a point is in frame iff 0 <= u < width and
// 0 <= v < height. No lens distortion is modelled.

namespace bevkit
{

struct Intrinsics
{
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  Eigen::Matrix3d matrix() const;

  /// Same camera sampled at a different resolution (e.g. a stride-4 feature
  /// map): focal lengths and principal point scale with the size ratio.
  Intrinsics rescaled(int new_width, int new_height) const;

  void validate() const;
};

/// Rigid ego -> camera transform: p_cam = rotation * p_ego + translation.
struct Extrinsics
{
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d to_camera(const Eigen::Vector3d & p_ego) const { return rotation * p_ego + translation; }

  /// Camera center in the ego frame.
  Eigen::Vector3d center() const { return -(rotation.transpose() * translation); }

  /// 4x4 homogeneous form.
  Eigen::Matrix4d matrix() const;
  static Extrinsics from_matrix(const Eigen::Matrix4d & m);

  /// Camera placed at `center` (ego frame) with camera axes given by the
  /// columns of `camera_to_ego`.
  static Extrinsics from_pose(const Eigen::Matrix3d & camera_to_ego, const Eigen::Vector3d & center);

  void validate() const;
};

struct Camera
{
  Intrinsics intrinsics;
  Extrinsics extrinsics;
};

struct PixelProjection
{
  double u;
  double v;
  double depth;
};

struct PixelRay
{
  std::size_t camera_index = 0;
  double u = 0.0;
  double v = 0.0;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();

  Eigen::Vector3d at(double t) const { return origin + t * direction; }
};

/// Axis-aligned pixel rectangle with the index of the box it came from.
struct ImageBox
{
  double u_min;
  double v_min;
  double u_max;
  double v_max;
  std::size_t source_index;
};

/// Immutable, validated, ordered camera set.
class CameraRig
{
public:
  CameraRig() = default;

  /// Throws Error(kInvalidArgument) naming the first offending camera.
  explicit CameraRig(std::vector<Camera> cameras);

  std::size_t size() const { return cameras_.size(); }
  bool empty() const { return cameras_.empty(); }

  const Camera & operator[](std::size_t index) const { return cameras_[index]; }

  /// Bounds-checked access; throws Error(kOutOfRange).
  const Camera & at(std::size_t index) const;

  std::span<const Camera> cameras() const { return cameras_; }

private:
  std::vector<Camera> cameras_;
};

/// Pinhole projection [u*D, v*D, D] = K * (R p + t). nullopt when the point
/// is at or behind the camera or lands outside the image.
std::optional<PixelProjection> project_point(const Camera & camera, const Eigen::Vector3d & p_ego);
std::optional<PixelProjection> project_point(
  const CameraRig & rig, std::size_t camera_index, const Eigen::Vector3d & p_ego);

/// Ego-frame ray through pixel (u, v). Throws Error(kOutOfRange) for pixels
/// outside the image.
PixelRay pixel_to_ray(const CameraRig & rig, std::size_t camera_index, double u, double v);

/// Convex pixel-space outline of the box after clipping it against the
/// near plane. Empty when the box is entirely behind the camera. Not clipped
/// to the image.
Polygon2 project_box_outline(const Camera & camera, const Box3D & box);

/// 2D ground-truth rectangles: the outline of every box that overlaps the
/// image with positive area, cropped to the frame and clamped to
/// [0, width - 1] x [0, height - 1].
std::vector<ImageBox> boxes_3d_to_2d(const CameraRig & rig, std::size_t camera_index, std::span<const Box3D> boxes);

}  // namespace bevkit

#endif  // BEVKIT_CAMERA_RIG_HPP_
