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

#ifndef BEVKIT_VOXEL_BEV_HPP_
#define BEVKIT_VOXEL_BEV_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bevkit/camera_rig.hpp"
#include "bevkit/grid.hpp"

namespace bevkit
{

/// Per-camera feature map, row-major height x width x channels.
struct FeatureImage
{
  std::size_t camera_index = 0;
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  FeatureImage() = default;
  FeatureImage(std::size_t camera, int rows, int cols, int num_channels);

  std::size_t offset(int row, int col) const
  {
    return (static_cast<std::size_t>(row) * width + col) * channels;
  }
  float & at(int row, int col, int c) { return data[offset(row, col) + c]; }
  float at(int row, int col, int c) const { return data[offset(row, col) + c]; }

  /// Throws on a size mismatch or a non-finite value.
  void validate() const;
};

/// Dense X x Y x Z x C voxel features. Layout is ((i * ny + j) * nz + k) * C + c.
struct VoxelGrid
{
  VoxelGridSpec spec;
  int channels = 0;
  std::vector<float> data;
  /// Number of cameras in which each voxel center is visible.
  std::vector<std::int32_t> hit_count;

  VoxelGrid() = default;
  VoxelGrid(const VoxelGridSpec & grid, int num_channels);

  std::size_t voxel_index(int i, int j, int k) const
  {
    return (static_cast<std::size_t>(i) * spec.ny + j) * spec.nz + k;
  }
  float at(int i, int j, int k, int c) const { return data[voxel_index(i, j, k) * channels + c]; }
  std::span<const float> voxel(int i, int j, int k) const
  {
    return std::span<const float>(data).subspan(voxel_index(i, j, k) * channels, channels);
  }
};

/// Dense X x Y x channels BEV tensor. Layout is (i * ny + j) * channels + c.
struct BevGrid
{
  int nx = 0;
  int ny = 0;
  int channels = 0;
  std::vector<float> data;

  BevGrid() = default;
  BevGrid(int rows_x, int rows_y, int num_channels, float fill = 0.0F);

  std::size_t offset(int i, int j) const { return (static_cast<std::size_t>(i) * ny + j) * channels; }
  float & at(int i, int j, int c) { return data[offset(i, j) + c]; }
  float at(int i, int j, int c) const { return data[offset(i, j) + c]; }

  /// Single channel extracted as its own grid.
  BevGrid channel(int c) const;
};

enum class Fusion
{
  kAverage,
  kSum,
  kFirst,
};

enum class Sampling
{
  kBilinear,
  kNearest,
};

struct UnprojectOptions
{
  Fusion fusion = Fusion::kAverage;
  Sampling sampling = Sampling::kBilinear;
  /// Worker threads; 0 means hardware concurrency. Results do not depend on it.
  unsigned threads = 1;
};

/// Samples all channels of `image` at continuous pixel (u, v) into `out`
/// (size == channels).
///
/// Bilinear: pixel centers sit at half-integers; taps outside the image are
/// clamped to the border. With x = u - 0.5, y = v - 0.5, integer parts
/// (x0, y0) and fractions (ax, ay), the value is
///   (1-ax)(1-ay) f00 + ax(1-ay) f01 + (1-ax) ay f10 + ax ay f11
/// evaluated left to right in double precision.
/// Nearest: the pixel containing (u, v).
void sample_feature(const FeatureImage & image, double u, double v, Sampling sampling, std::span<double> out);

/// Uniform-depth unprojection: every voxel center is projected into each
/// camera (in rig order); where it lands in frame at positive depth the
/// sampled feature is fused. Features at a different resolution than the
/// camera's intrinsics are handled by rescaling the intrinsics.
///
/// Fusion: kAverage divides the per-channel double sum by the hit count;
/// kSum stores the sum; kFirst keeps the first visible camera's sample.
/// Voxels seen by no camera are zero.
VoxelGrid unproject(const CameraRig & rig, std::span<const FeatureImage> features, const VoxelGridSpec & spec,
  const UnprojectOptions & options = {});

/// Spatial-to-Channel: X x Y x Z x C -> X x Y x (Z * C), with output
/// channel k * C + c holding voxel (., ., k, c).
BevGrid spatial_to_channel(const VoxelGrid & voxels);

/// Inverse re-layout. `hit_count` may be empty (all zeros).
VoxelGrid channel_to_spatial(
  const BevGrid & bev, const VoxelGridSpec & spec, int channels, std::vector<std::int32_t> hit_count = {});

/// BEV centerness weight in [1, 2]:
///   1 + sqrt(((x - xc)^2 + (y - yc)^2) / ((x* - xc)^2 + (y* - yc)^2))
/// in grid coordinates, where x* and y* are the grid extremes farthest from
/// the center, so the farthest corner scores exactly 2.
BevGrid bev_centerness(int nx, int ny, double center_x, double center_y);

/// 2x2 average pooling (ceil mode; partial windows average what they cover).
BevGrid avg_pool_2x(const BevGrid & bev);

enum class EncoderMode
{
  kNaive3d,
  kS2c2d,
};

/// Weight count and multiply-accumulate count of a convolution stack.
struct EncoderCost
{
  std::uint64_t params = 0;
  std::uint64_t flops = 0;
};

/// Closed-form cost of `layers` stride-1, same-padded convolutions:
/// kNaive3d runs 3x3x3 kernels over nx x ny x nz with C then conv_channels
/// input channels; kS2c2d runs 3x3 kernels over nx x ny with Z * C then
/// conv_channels input channels. Params include one bias per output channel.
EncoderCost encoder_cost(const VoxelGridSpec & spec, int channels, int layers, EncoderMode mode, int conv_channels);

/// Stored feature elements when lifting N camera feature maps to 3D:
/// uniform-depth keeps h x w x C per camera, categorical-depth lifting keeps
/// h x w x D x C.
struct LiftingCost
{
  std::uint64_t uniform_elements = 0;
  std::uint64_t lifted_elements = 0;
};

LiftingCost lifting_cost(int num_cameras, int feat_height, int feat_width, int channels, int depth_bins);

/// Per-channel RGB normalization constants (0..255 scale).
inline constexpr std::array<double, 3> kImageMean{123.675, 116.28, 103.53};
inline constexpr std::array<double, 3> kImageStd{58.395, 57.12, 57.375};

/// Normalizes an interleaved 8-bit RGB image into a 3-channel FeatureImage.
FeatureImage normalize_rgb(std::span<const std::uint8_t> rgb, int height, int width, std::size_t camera_index = 0);

}  // namespace bevkit

#endif  // BEVKIT_VOXEL_BEV_HPP_
