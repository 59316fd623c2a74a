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

#ifndef BEVKIT_IO_HPP_
#define BEVKIT_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bevkit/assignment.hpp"
#include "bevkit/boxes3d.hpp"
#include "bevkit/camera_rig.hpp"
#include "bevkit/synthetic_scene.hpp"
#include "bevkit/voxel_bev.hpp"

// File formats
// ------------
// Rig JSON: {"cameras": [{"fx", "fy", "cx", "cy", "width", "height",
//            "rotation": [9 values, row-major, ego -> camera],
//            "translation": [3 values]}]}
//
// Tensor files (.bin): the 8 magic bytes "BEVKTNSR", a little-endian uint64
// header length, a UTF-8 JSON header of that length, then little-endian
// float32 values in row-major order. The header always carries
//   "kind": "feature" | "voxel" | "bev" | "tensor", "dims": [...],
//   "dtype": "float32", "order": "row-major"
// plus "camera_index" (feature), "grid" (voxel, optional for bev) and
// "hit_count": true (voxel; an int32 block of nx*ny*nz values follows the
// float data).
//
// Box CSV: header line then rows class_id,score,x,y,z,w,l,h,theta,vx,vy.
// Assignment CSV: header line then rows anchor_index,label,gt_index with
// label in {pos, neg, ign} and gt_index -1 unless positive.

namespace bevkit
{

CameraRig parse_rig_json(std::string_view text);
std::string rig_to_json(const CameraRig & rig);
CameraRig load_rig(const std::filesystem::path & path);
void save_rig(const std::filesystem::path & path, const CameraRig & rig);

void save_feature_image(const std::filesystem::path & path, const FeatureImage & image);
FeatureImage load_feature_image(const std::filesystem::path & path);
/// Every *.bin in `dir`, ordered by camera_index.
std::vector<FeatureImage> load_feature_dir(const std::filesystem::path & dir);

void save_voxel_grid(const std::filesystem::path & path, const VoxelGrid & grid);
VoxelGrid load_voxel_grid(const std::filesystem::path & path);

void save_bev_grid(const std::filesystem::path & path, const BevGrid & grid, const VoxelGridSpec * spec = nullptr);
BevGrid load_bev_grid(const std::filesystem::path & path, VoxelGridSpec * spec = nullptr);

/// Generic 2D float tensor (rows x cols), e.g. per-anchor class scores.
void save_matrix(const std::filesystem::path & path, const std::vector<double> & values, std::size_t rows,
  std::size_t cols);
std::vector<double> load_matrix(const std::filesystem::path & path, std::size_t & rows, std::size_t & cols);

std::string boxes_to_csv(const std::vector<Box3D> & boxes);
std::vector<Box3D> parse_boxes_csv(std::string_view text);
void save_boxes(const std::filesystem::path & path, const std::vector<Box3D> & boxes);
std::vector<Box3D> load_boxes(const std::filesystem::path & path);

std::string assignment_to_csv(const AssignmentResult & result, std::size_t num_anchors);

/// Scene bundle: rig.json, gt_boxes.csv, map.bin (with grid and ground
/// height in its header), features/cam<N>.bin.
void save_scene(const std::filesystem::path & dir, const SyntheticScene & scene);
SyntheticScene load_scene(const std::filesystem::path & dir);

/// Shortest decimal that round-trips the double.
std::string format_double(double value);

std::string read_text_file(const std::filesystem::path & path);
void write_text_file(const std::filesystem::path & path, std::string_view text);

}  // namespace bevkit

#endif  // BEVKIT_IO_HPP_
