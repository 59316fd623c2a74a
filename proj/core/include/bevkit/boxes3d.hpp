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

#ifndef BEVKIT_BOXES3D_HPP_
#define BEVKIT_BOXES3D_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bevkit/grid.hpp"

namespace bevkit
{

/// Oriented 3D box in the ego frame.
///
/// (x, y, z) is the geometric center. `l` runs along the heading
/// (cos theta, sin theta), `w` across it, `h` along +z. Yaw is kept in
/// (-pi, pi].
struct Box3D
{
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 1.0;
  double l = 1.0;
  double h = 1.0;
  double theta = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double score = 1.0;
  int class_id = 0;

  /// Footprint corners, counter-clockwise.
  std::array<Eigen::Vector2d, 4> bev_corners() const;

  /// Bottom face (CCW seen from above) followed by the top face.
  std::array<Eigen::Vector3d, 8> corners() const;

  /// Regression vector in the order (x, y, z, w, h, l, theta, vx, vy).
  Eigen::Matrix<double, 9, 1> regression_vector() const;

  /// True when the ground-plane point (px, py) lies inside the footprint.
  bool footprint_contains(double px, double py) const;

  bool operator==(const Box3D & other) const = default;
};

/// Maps an angle into (-pi, pi].
double normalize_angle(double angle);

/// Throws Error(kInvalidArgument) unless w, l, h > 0 and all fields finite.
void validate_box(const Box3D & box);

using Polygon2 = std::vector<Eigen::Vector2d>;

/// Signed shoelace area; positive for counter-clockwise polygons.
double polygon_area(const Polygon2 & polygon);

/// Sutherland-Hodgman clip of `subject` against the convex CCW polygon `clip`.
Polygon2 clip_convex(const Polygon2 & subject, const Polygon2 & clip);

/// Convex hull (Andrew's monotone chain), counter-clockwise, collinear
/// points dropped.
Polygon2 convex_hull(Polygon2 points);

/// Intersection-over-union of the two yaw-rotated footprints. z and h are
/// ignored. The result is symmetric bit-for-bit.
double bev_iou(const Box3D & a, const Box3D & b);

struct NmsOptions
{
  double iou_threshold = 0.2;
  double score_threshold = 0.05;
  std::size_t max_out = 500;
};

/// Greedy rotated NMS, per class. Returns the indices of survivors ordered by
/// class_id ascending, then score descending, then input index.
std::vector<std::size_t> rotated_nms_indices(std::span<const Box3D> boxes, const NmsOptions & options = {});

std::vector<Box3D> rotated_nms(std::span<const Box3D> boxes, const NmsOptions & options = {});

struct AnchorSize
{
  double w;
  double l;
  double h;
};

struct AnchorSpec
{
  std::vector<AnchorSize> sizes;
  std::vector<double> rotations;  // radians
  double z_center = 0.0;

  /// Four sizes and two rotations (0 and 90 degrees).
  static AnchorSpec defaults();
};

std::size_t anchor_count(const AnchorSpec & spec, const VoxelGridSpec & grid);

/// One anchor per BEV cell center x size x rotation, ordered cell-major
/// (cell index i * ny + j), then size, then rotation.
std::vector<Box3D> generate_anchors(const AnchorSpec & spec, const VoxelGridSpec & grid);

}  // namespace bevkit

#endif  // BEVKIT_BOXES3D_HPP_
