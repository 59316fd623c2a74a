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

#ifndef BEVKIT_GRID_HPP_
#define BEVKIT_GRID_HPP_

#include <array>
#include <cstddef>
#include <optional>

#include <Eigen/Core>

namespace bevkit
{

/// Axis-aligned voxel lattice in the ego frame. Voxel (i, j, k) spans
/// origin + [i, i+1) * dx along x, and likewise for y and z.
struct VoxelGridSpec
{
  int nx = 400;
  int ny = 400;
  int nz = 12;
  double dx = 0.25;
  double dy = 0.25;
  double dz = 0.5;
  /// Minimum corner. The default puts the x/y extent at [-50, 50) m and
  /// centers the lowest layer on the ground plane z = 0.
  Eigen::Vector3d origin{-50.0, -50.0, -0.25};

  /// Grid centered on the ego origin in x/y with layer 0 centered at z = 0.
  static VoxelGridSpec centered(int nx, int ny, int nz, double dx, double dy, double dz);

  /// Throws Error(kInvalidArgument) if a count is < 1 or a bin size <= 0.
  void validate() const;

  std::size_t cell_count() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t voxel_count() const { return cell_count() * nz; }

  Eigen::Vector3d voxel_center(int i, int j, int k) const
  {
    return {origin.x() + (i + 0.5) * dx, origin.y() + (j + 0.5) * dy, origin.z() + (k + 0.5) * dz};
  }

  Eigen::Vector2d cell_center(int i, int j) const
  {
    return {origin.x() + (i + 0.5) * dx, origin.y() + (j + 0.5) * dy};
  }

  /// BEV cell containing (x, y), or nullopt outside the extent.
  std::optional<std::array<int, 2>> cell_of(double x, double y) const;

  /// Layer whose z-range contains `z`, or nullopt.
  std::optional<int> layer_of(double z) const;

  double x_min() const { return origin.x(); }
  double x_max() const { return origin.x() + nx * dx; }
  double y_min() const { return origin.y(); }
  double y_max() const { return origin.y() + ny * dy; }

  bool operator==(const VoxelGridSpec & other) const = default;
};

}  // namespace bevkit

#endif  // BEVKIT_GRID_HPP_
