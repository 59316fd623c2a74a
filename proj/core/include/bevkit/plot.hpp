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

#ifndef BEVKIT_PLOT_HPP_
#define BEVKIT_PLOT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bevkit/sweep.hpp"
#include "bevkit/voxel_bev.hpp"

namespace bevkit
{

/// Writes one BEV channel as a binary PGM (P5). Row r is x-index r and column
/// c is y-index c. Values map linearly from [lo, hi] to [0, 255], clamped.
void write_pgm(const std::filesystem::path & path, const BevGrid & grid, int channel, double lo, double hi);

/// Pixel values of a PGM written by write_pgm, row-major, with its size.
std::vector<std::uint8_t> read_pgm(const std::filesystem::path & path, int & rows, int & cols);

void write_csv(const std::filesystem::path & path, const std::vector<std::string> & header,
  const std::vector<std::vector<double>> & rows);

struct PlotData
{
  std::optional<BevGrid> centerness;
  /// nx x ny x 2 (drivable, lane).
  std::optional<BevGrid> map_mask;
  std::vector<SweepPoint> sweep;
};

/// Writes centerness.pgm, drivable.pgm and lane.pgm for the grids that are
/// present, and always writes sweep.csv. Returns the files written.
std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path & dir, const PlotData & data);

}  // namespace bevkit

#endif  // BEVKIT_PLOT_HPP_
