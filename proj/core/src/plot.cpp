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

#include "bevkit/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bevkit/error.hpp"
#include "bevkit/io.hpp"

namespace bevkit
{

namespace fs = std::filesystem;

void write_pgm(const fs::path & path, const BevGrid & grid, int channel, double lo, double hi)
{
  require(channel >= 0 && channel < grid.channels, ErrorCode::kOutOfRange, "PGM channel out of range");
  require(hi > lo, ErrorCode::kInvalidArgument, "PGM range must have hi > lo");
  std::string bytes = "P5\n" + std::to_string(grid.ny) + " " + std::to_string(grid.nx) + "\n255\n";
  const std::size_t header = bytes.size();
  bytes.resize(header + static_cast<std::size_t>(grid.nx) * grid.ny);
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      const double t = std::clamp((grid.at(i, j, channel) - lo) / (hi - lo), 0.0, 1.0);
      const auto value = static_cast<unsigned char>(std::lround(t * 255.0));
      bytes[header + static_cast<std::size_t>(i) * grid.ny + j] = static_cast<char>(value);
    }
  }
  write_text_file(path, bytes);
}

std::vector<std::uint8_t> read_pgm(const fs::path & path, int & rows, int & cols)
{
  const std::string bytes = read_text_file(path);
  std::istringstream in(bytes);
  std::string magic;
  int maxval = 0;
  in >> magic >> cols >> rows >> maxval;
  require(in && magic == "P5" && maxval == 255 && rows > 0 && cols > 0, ErrorCode::kMalformedInput,
    path.string() + ": not an 8-bit P5 image");
  in.get();
  const auto start = static_cast<std::size_t>(in.tellg());
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  require(bytes.size() == start + n, ErrorCode::kMalformedInput, path.string() + ": wrong pixel count");
  return {bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.end()};
}

void write_csv(const fs::path & path, const std::vector<std::string> & header,
  const std::vector<std::vector<double>> & rows)
{
  std::string out;
  for (std::size_t k = 0; k < header.size(); ++k) {
    out += (k == 0 ? "" : ",") + header[k];
  }
  out += '\n';
  for (const auto & row : rows) {
    require(row.size() == header.size(), ErrorCode::kShapeMismatch, "CSV row width differs from header");
    for (std::size_t k = 0; k < row.size(); ++k) {
      out += (k == 0 ? "" : ",") + format_double(row[k]);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<fs::path> emit_plot_data(const fs::path & dir, const PlotData & data)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> written;
  if (data.centerness) {
    write_pgm(dir / "centerness.pgm", *data.centerness, 0, 1.0, 2.0);
    written.push_back(dir / "centerness.pgm");
  }
  if (data.map_mask) {
    require(data.map_mask->channels == 2, ErrorCode::kShapeMismatch, "map mask needs 2 channels");
    write_pgm(dir / "drivable.pgm", *data.map_mask, 0, 0.0, 1.0);
    write_pgm(dir / "lane.pgm", *data.map_mask, 1, 0.0, 1.0);
    written.push_back(dir / "drivable.pgm");
    written.push_back(dir / "lane.pgm");
  }
  std::vector<std::vector<double>> rows;
  for (const SweepPoint & p : data.sweep) {
    rows.push_back({p.sigma, p.seg_iou, p.map, static_cast<double>(p.runs)});
  }
  write_csv(dir / "sweep.csv", {"sigma", "seg_iou", "map", "runs"}, rows);
  written.push_back(dir / "sweep.csv");
  return written;
}

}  // namespace bevkit
