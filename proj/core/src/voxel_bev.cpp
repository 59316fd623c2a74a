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

#include "bevkit/voxel_bev.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <utility>

#include "bevkit/error.hpp"

namespace bevkit
{

FeatureImage::FeatureImage(std::size_t camera, int rows, int cols, int num_channels)
: camera_index(camera), height(rows), width(cols), channels(num_channels)
{
  require(rows > 0 && cols > 0 && num_channels > 0, ErrorCode::kInvalidArgument,
    "feature image dimensions must be positive");
  data.assign(static_cast<std::size_t>(rows) * cols * num_channels, 0.0F);
}

void FeatureImage::validate() const
{
  require(height > 0 && width > 0 && channels > 0, ErrorCode::kShapeMismatch,
    "feature image dimensions must be positive");
  require(data.size() == static_cast<std::size_t>(height) * width * channels, ErrorCode::kShapeMismatch,
    "feature image data size does not match its dimensions");
  require(std::all_of(data.begin(), data.end(), [](float v) { return std::isfinite(v); }),
    ErrorCode::kInvalidArgument, "feature image contains non-finite values");
}

VoxelGrid::VoxelGrid(const VoxelGridSpec & grid, int num_channels) : spec(grid), channels(num_channels)
{
  spec.validate();
  require(num_channels > 0, ErrorCode::kInvalidArgument, "voxel grid needs at least one channel");
  data.assign(spec.voxel_count() * num_channels, 0.0F);
  hit_count.assign(spec.voxel_count(), 0);
}

BevGrid::BevGrid(int rows_x, int rows_y, int num_channels, float fill)
: nx(rows_x), ny(rows_y), channels(num_channels)
{
  require(rows_x > 0 && rows_y > 0 && num_channels > 0, ErrorCode::kInvalidArgument,
    "BEV grid dimensions must be positive");
  data.assign(static_cast<std::size_t>(rows_x) * rows_y * num_channels, fill);
}

BevGrid BevGrid::channel(int c) const
{
  require(c >= 0 && c < channels, ErrorCode::kOutOfRange, "BEV channel out of range");
  BevGrid out(nx, ny, 1);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      out.at(i, j, 0) = at(i, j, c);
    }
  }
  return out;
}

void sample_feature(const FeatureImage & image, double u, double v, Sampling sampling, std::span<double> out)
{
  const int w = image.width;
  const int h = image.height;
  if (sampling == Sampling::kNearest) {
    const int col = std::clamp(static_cast<int>(std::floor(u)), 0, w - 1);
    const int row = std::clamp(static_cast<int>(std::floor(v)), 0, h - 1);
    const float * px = image.data.data() + image.offset(row, col);
    for (int c = 0; c < image.channels; ++c) {
      out[c] = static_cast<double>(px[c]);
    }
    return;
  }

  const double x = u - 0.5;
  const double y = v - 0.5;
  const double x0 = std::floor(x);
  const double y0 = std::floor(y);
  const double ax = x - x0;
  const double ay = y - y0;
  const int c0 = std::clamp(static_cast<int>(x0), 0, w - 1);
  const int c1 = std::clamp(static_cast<int>(x0) + 1, 0, w - 1);
  const int r0 = std::clamp(static_cast<int>(y0), 0, h - 1);
  const int r1 = std::clamp(static_cast<int>(y0) + 1, 0, h - 1);
  const double w00 = (1.0 - ax) * (1.0 - ay);
  const double w01 = ax * (1.0 - ay);
  const double w10 = (1.0 - ax) * ay;
  const double w11 = ax * ay;
  const float * f00 = image.data.data() + image.offset(r0, c0);
  const float * f01 = image.data.data() + image.offset(r0, c1);
  const float * f10 = image.data.data() + image.offset(r1, c0);
  const float * f11 = image.data.data() + image.offset(r1, c1);
  for (int c = 0; c < image.channels; ++c) {
    out[c] = w00 * f00[c] + w01 * f01[c] + w10 * f10[c] + w11 * f11[c];
  }
}

VoxelGrid unproject(const CameraRig & rig, std::span<const FeatureImage> features, const VoxelGridSpec & spec,
  const UnprojectOptions & options)
{
  spec.validate();
  require(!rig.empty(), ErrorCode::kInvalidArgument, "camera rig is empty");
  require(features.size() == rig.size(), ErrorCode::kShapeMismatch,
    "expected " + std::to_string(rig.size()) + " feature images, got " + std::to_string(features.size()));

  // Feature image per camera, by camera_index.
  std::vector<const FeatureImage *> by_camera(rig.size(), nullptr);
  for (const FeatureImage & f : features) {
    f.validate();
    require(f.camera_index < rig.size(), ErrorCode::kShapeMismatch,
      "feature image for unknown camera " + std::to_string(f.camera_index));
    require(by_camera[f.camera_index] == nullptr, ErrorCode::kShapeMismatch,
      "duplicate feature image for camera " + std::to_string(f.camera_index));
    require(f.channels == features.front().channels, ErrorCode::kShapeMismatch,
      "feature images disagree on channel count");
    by_camera[f.camera_index] = &f;
  }
  const int channels = features.front().channels;

  std::vector<Camera> cameras;
  cameras.reserve(rig.size());
  for (std::size_t n = 0; n < rig.size(); ++n) {
    Camera cam = rig[n];
    cam.intrinsics = cam.intrinsics.rescaled(by_camera[n]->width, by_camera[n]->height);
    cameras.push_back(cam);
  }

  VoxelGrid grid(spec, channels);

  auto fill_slab = [&](int i_begin, int i_end) {
    std::vector<double> acc(channels);
    std::vector<double> sample(channels);
    for (int i = i_begin; i < i_end; ++i) {
      for (int j = 0; j < spec.ny; ++j) {
        for (int k = 0; k < spec.nz; ++k) {
          const Eigen::Vector3d center = spec.voxel_center(i, j, k);
          std::fill(acc.begin(), acc.end(), 0.0);
          std::int32_t hits = 0;
          for (std::size_t n = 0; n < cameras.size(); ++n) {
            const auto proj = project_point(cameras[n], center);
            if (!proj) {
              continue;
            }
            sample_feature(*by_camera[n], proj->u, proj->v, options.sampling, sample);
            if (options.fusion != Fusion::kFirst) {
              for (int c = 0; c < channels; ++c) {
                acc[c] += sample[c];
              }
            } else if (hits == 0) {
              std::copy(sample.begin(), sample.end(), acc.begin());
            }
            ++hits;
          }
          const std::size_t vox = grid.voxel_index(i, j, k);
          grid.hit_count[vox] = hits;
          if (hits == 0) {
            continue;
          }
          float * dst = grid.data.data() + vox * channels;
          for (int c = 0; c < channels; ++c) {
            dst[c] = options.fusion == Fusion::kAverage ? static_cast<float>(acc[c] / hits)
                                                        : static_cast<float>(acc[c]);
          }
        }
      }
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : options.threads;
  threads = std::min<unsigned>(threads, static_cast<unsigned>(spec.nx));
  if (threads <= 1) {
    fill_slab(0, spec.nx);
    return grid;
  }
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      const int begin = static_cast<int>(static_cast<long long>(spec.nx) * t / threads);
      const int end = static_cast<int>(static_cast<long long>(spec.nx) * (t + 1) / threads);
      workers.emplace_back(fill_slab, begin, end);
    }
  }
  return grid;
}

BevGrid spatial_to_channel(const VoxelGrid & voxels)
{
  // With the (x, y, z, c) voxel layout the S2C output is a pure reshape.
  BevGrid bev;
  bev.nx = voxels.spec.nx;
  bev.ny = voxels.spec.ny;
  bev.channels = voxels.spec.nz * voxels.channels;
  bev.data = voxels.data;
  return bev;
}

VoxelGrid channel_to_spatial(
  const BevGrid & bev, const VoxelGridSpec & spec, int channels, std::vector<std::int32_t> hit_count)
{
  require(bev.nx == spec.nx && bev.ny == spec.ny && bev.channels == spec.nz * channels, ErrorCode::kShapeMismatch,
    "BEV grid shape does not match voxel spec");
  VoxelGrid out(spec, channels);
  out.data = bev.data;
  if (!hit_count.empty()) {
    require(hit_count.size() == spec.voxel_count(), ErrorCode::kShapeMismatch, "hit_count size mismatch");
    out.hit_count = std::move(hit_count);
  }
  return out;
}

BevGrid bev_centerness(int nx, int ny, double center_x, double center_y)
{
  require(nx >= 1 && ny >= 1, ErrorCode::kInvalidArgument, "centerness grid must be non-empty");
  require(center_x >= 0.0 && center_x <= nx - 1 && center_y >= 0.0 && center_y <= ny - 1,
    ErrorCode::kOutOfRange, "centerness center must lie inside the grid");
  const double far_x = std::max(center_x, (nx - 1) - center_x);
  const double far_y = std::max(center_y, (ny - 1) - center_y);
  const double denom = far_x * far_x + far_y * far_y;

  BevGrid out(nx, ny, 1, 1.0F);
  if (denom == 0.0) {
    return out;  // 1x1 grid
  }
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double ddx = i - center_x;
      const double ddy = j - center_y;
      out.at(i, j, 0) = static_cast<float>(1.0 + std::sqrt((ddx * ddx + ddy * ddy) / denom));
    }
  }
  return out;
}

BevGrid avg_pool_2x(const BevGrid & bev)
{
  const int ox = (bev.nx + 1) / 2;
  const int oy = (bev.ny + 1) / 2;
  BevGrid out(ox, oy, bev.channels);
  for (int i = 0; i < ox; ++i) {
    for (int j = 0; j < oy; ++j) {
      for (int c = 0; c < bev.channels; ++c) {
        double sum = 0.0;
        int count = 0;
        for (int di = 0; di < 2; ++di) {
          for (int dj = 0; dj < 2; ++dj) {
            const int si = 2 * i + di;
            const int sj = 2 * j + dj;
            if (si < bev.nx && sj < bev.ny) {
              sum += bev.at(si, sj, c);
              ++count;
            }
          }
        }
        out.at(i, j, c) = static_cast<float>(sum / count);
      }
    }
  }
  return out;
}

EncoderCost encoder_cost(const VoxelGridSpec & spec, int channels, int layers, EncoderMode mode, int conv_channels)
{
  spec.validate();
  require(layers >= 1, ErrorCode::kInvalidArgument, "encoder needs at least one layer");
  require(channels >= 1 && conv_channels >= 1, ErrorCode::kInvalidArgument, "channel counts must be positive");

  const auto nx = static_cast<std::uint64_t>(spec.nx);
  const auto ny = static_cast<std::uint64_t>(spec.ny);
  const auto nz = static_cast<std::uint64_t>(spec.nz);
  const auto cout = static_cast<std::uint64_t>(conv_channels);

  std::uint64_t kernel = 0;
  std::uint64_t positions = 0;
  std::uint64_t cin = 0;
  if (mode == EncoderMode::kNaive3d) {
    kernel = 27;
    positions = nx * ny * nz;
    cin = static_cast<std::uint64_t>(channels);
  } else {
    kernel = 9;
    positions = nx * ny;
    cin = nz * static_cast<std::uint64_t>(channels);
  }

  EncoderCost cost;
  for (int layer = 0; layer < layers; ++layer) {
    const std::uint64_t in = layer == 0 ? cin : cout;
    cost.params += kernel * in * cout + cout;
    cost.flops += positions * kernel * in * cout;
  }
  return cost;
}

LiftingCost lifting_cost(int num_cameras, int feat_height, int feat_width, int channels, int depth_bins)
{
  require(num_cameras >= 1 && feat_height >= 1 && feat_width >= 1 && channels >= 1 && depth_bins >= 1,
    ErrorCode::kInvalidArgument, "lifting cost arguments must be positive");
  const std::uint64_t per_view = static_cast<std::uint64_t>(feat_height) * feat_width * channels;
  return LiftingCost{num_cameras * per_view, num_cameras * per_view * static_cast<std::uint64_t>(depth_bins)};
}

FeatureImage normalize_rgb(std::span<const std::uint8_t> rgb, int height, int width, std::size_t camera_index)
{
  FeatureImage out(camera_index, height, width, 3);
  require(rgb.size() == out.data.size(), ErrorCode::kShapeMismatch, "RGB buffer size does not match dimensions");
  for (std::size_t p = 0; p < rgb.size(); ++p) {
    const std::size_t c = p % 3;
    out.data[p] = static_cast<float>((rgb[p] - kImageMean[c]) / kImageStd[c]);
  }
  return out;
}

}  // namespace bevkit
