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

#include "bevkit/grid.hpp"

#include <cmath>
#include <string>

#include "bevkit/error.hpp"

namespace bevkit
{

VoxelGridSpec VoxelGridSpec::centered(int nx, int ny, int nz, double dx, double dy, double dz)
{
  VoxelGridSpec spec;
  spec.nx = nx;
  spec.ny = ny;
  spec.nz = nz;
  spec.dx = dx;
  spec.dy = dy;
  spec.dz = dz;
  spec.origin = {-0.5 * nx * dx, -0.5 * ny * dy, -0.5 * dz};
  return spec;
}

void VoxelGridSpec::validate() const
{
  require(nx >= 1 && ny >= 1 && nz >= 1, ErrorCode::kInvalidArgument,
    "voxel grid counts must be >= 1, got " + std::to_string(nx) + "x" + std::to_string(ny) + "x" +
      std::to_string(nz));
  require(dx > 0.0 && dy > 0.0 && dz > 0.0, ErrorCode::kInvalidArgument, "voxel bin sizes must be positive");
  require(origin.allFinite(), ErrorCode::kInvalidArgument, "voxel grid origin must be finite");
}

std::optional<std::array<int, 2>> VoxelGridSpec::cell_of(double x, double y) const
{
  const double fi = std::floor((x - origin.x()) / dx);
  const double fj = std::floor((y - origin.y()) / dy);
  if (!(fi >= 0.0 && fi < nx && fj >= 0.0 && fj < ny)) {
    return std::nullopt;
  }
  return std::array<int, 2>{static_cast<int>(fi), static_cast<int>(fj)};
}

std::optional<int> VoxelGridSpec::layer_of(double z) const
{
  const double fk = std::floor((z - origin.z()) / dz);
  if (!(fk >= 0.0 && fk < nz)) {
    return std::nullopt;
  }
  return static_cast<int>(fk);
}

}  // namespace bevkit
