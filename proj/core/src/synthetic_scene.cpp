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

#include "bevkit/synthetic_scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "bevkit/error.hpp"
#include "bevkit/random.hpp"

namespace bevkit
{

namespace
{

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool point_in_polygon(const Polygon2 & poly, double x, double y)
{
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Eigen::Vector2d & a = poly[i];
    const Eigen::Vector2d & b = poly[j];
    if ((a.y() > y) != (b.y() > y)) {
      const double x_cross = (b.x() - a.x()) * (y - a.y()) / (b.y() - a.y()) + a.x();
      if (x < x_cross) {
        inside = !inside;
      }
    }
  }
  return inside;
}

// 8-connected Bresenham line over cell indices.
void rasterize_segment(BevGrid & mask, int channel, std::array<int, 2> a, std::array<int, 2> b)
{
  int x0 = a[0];
  int y0 = a[1];
  const int x1 = b[0];
  const int y1 = b[1];
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    if (x0 >= 0 && x0 < mask.nx && y0 >= 0 && y0 < mask.ny) {
      mask.at(x0, y0, channel) = 1.0F;
    }
    if (x0 == x1 && y0 == y1) {
      break;
    }
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

std::array<int, 2> clamped_cell(const VoxelGridSpec & grid, double x, double y)
{
  const int i = std::clamp(static_cast<int>(std::floor((x - grid.origin.x()) / grid.dx)), 0, grid.nx - 1);
  const int j = std::clamp(static_cast<int>(std::floor((y - grid.origin.y()) / grid.dy)), 0, grid.ny - 1);
  return {i, j};
}

BevGrid generate_map(const VoxelGridSpec & grid, const SceneOptions & options, CounterRng & rng)
{
  BevGrid mask(grid.nx, grid.ny, 2);

  // Star-shaped (hence simple) polygon around the ego origin.
  constexpr int kVertices = 16;
  const double reach = 0.5 * std::min(grid.x_max() - grid.x_min(), grid.y_max() - grid.y_min());
  const double cx = 0.5 * (grid.x_min() + grid.x_max());
  const double cy = 0.5 * (grid.y_min() + grid.y_max());
  Polygon2 polygon;
  for (int k = 0; k < kVertices; ++k) {
    const double step = 2.0 * std::numbers::pi / kVertices;
    const double angle = k * step + rng.uniform(-0.3, 0.3) * step;
    const double radius = rng.uniform(0.3, 0.95) * reach;
    polygon.emplace_back(cx + radius * std::cos(angle), cy + radius * std::sin(angle));
  }
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      const Eigen::Vector2d c = grid.cell_center(i, j);
      if (point_in_polygon(polygon, c.x(), c.y())) {
        mask.at(i, j, kMapDrivable) = 1.0F;
      }
    }
  }

  for (int lane = 0; lane < options.lanes; ++lane) {
    std::array<int, 2> prev = clamped_cell(grid, rng.uniform(grid.x_min(), grid.x_max()),
      rng.uniform(grid.y_min(), grid.y_max()));
    for (int v = 0; v < 3; ++v) {
      const std::array<int, 2> next = clamped_cell(grid, rng.uniform(grid.x_min(), grid.x_max()),
        rng.uniform(grid.y_min(), grid.y_max()));
      rasterize_segment(mask, kMapLane, prev, next);
      prev = next;
    }
  }
  return mask;
}

Box3D sample_box_shape(CounterRng & rng)
{
  Box3D box;
  const double pick = rng.uniform();
  if (pick < 0.5) {
    box.class_id = static_cast<int>(ObjectClass::kCar);
    box.w = rng.uniform(1.7, 2.0);
    box.l = rng.uniform(3.9, 4.8);
    box.h = rng.uniform(1.4, 1.8);
  } else if (pick < 0.8) {
    box.class_id = static_cast<int>(ObjectClass::kPedestrian);
    box.w = rng.uniform(0.5, 0.8);
    box.l = rng.uniform(0.5, 0.9);
    box.h = rng.uniform(1.6, 1.9);
  } else {
    box.class_id = static_cast<int>(ObjectClass::kCone);
    box.w = rng.uniform(0.3, 0.5);
    box.l = box.w;
    box.h = rng.uniform(0.6, 1.0);
  }
  box.theta = normalize_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
  const double speed = box.class_id == static_cast<int>(ObjectClass::kCar)          ? rng.normal(0.0, 3.0)
                       : box.class_id == static_cast<int>(ObjectClass::kPedestrian) ? rng.normal(0.0, 1.0)
                                                                                    : 0.0;
  box.vx = speed * std::cos(box.theta);
  box.vy = speed * std::sin(box.theta);
  box.score = 1.0;
  return box;
}

bool inside_extent(const Box3D & box, const VoxelGridSpec & grid)
{
  for (const auto & c : box.bev_corners()) {
    if (!(c.x() >= grid.x_min() && c.x() < grid.x_max() && c.y() >= grid.y_min() && c.y() < grid.y_max())) {
      return false;
    }
  }
  return true;
}

std::vector<Box3D> generate_boxes(int n_boxes, const VoxelGridSpec & grid, double ground_z, const BevGrid & map,
  const SceneOptions & options, CounterRng & rng)
{
  std::vector<std::array<int, 2>> anchors_cells;
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      const Eigen::Vector2d c = grid.cell_center(i, j);
      const bool drivable = map.at(i, j, kMapDrivable) != 0.0F;
      if ((!options.constrained_placement || drivable) && c.norm() >= options.min_box_range) {
        anchors_cells.push_back({i, j});
      }
    }
  }

  std::vector<Box3D> boxes;
  if (anchors_cells.empty()) {
    return boxes;
  }
  const double jitter = std::min(0.25 * std::min(grid.dx, grid.dy), 0.1);
  constexpr int kAttemptsPerBox = 200;
  for (int n = 0; n < n_boxes; ++n) {
    for (int attempt = 0; attempt < kAttemptsPerBox; ++attempt) {
      Box3D box = sample_box_shape(rng);
      const auto cell = anchors_cells[rng.below(anchors_cells.size())];
      const Eigen::Vector2d c = grid.cell_center(cell[0], cell[1]);
      box.x = c.x() + rng.uniform(-jitter, jitter);
      box.y = c.y() + rng.uniform(-jitter, jitter);
      box.z = ground_z + 0.5 * box.h;
      if (!inside_extent(box, grid)) {
        continue;
      }
      const double r = 0.5 * std::hypot(box.w, box.l);
      const bool clear = std::none_of(boxes.begin(), boxes.end(), [&](const Box3D & o) {
        return std::hypot(o.x - box.x, o.y - box.y) <= r + 0.5 * std::hypot(o.w, o.l) + 0.5;
      });
      if (clear) {
        boxes.push_back(box);
        break;
      }
    }
  }
  return boxes;
}

}  // namespace

AnchorSize class_prior(int class_id)
{
  switch (static_cast<ObjectClass>(class_id)) {
    case ObjectClass::kCar:
      return {1.85, 4.35, 1.6};
    case ObjectClass::kPedestrian:
      return {0.65, 0.7, 1.75};
    case ObjectClass::kCone:
      return {0.4, 0.4, 0.8};
  }
  fail(ErrorCode::kOutOfRange, "unknown object class " + std::to_string(class_id));
}

CameraRig make_ring_rig(int n_cameras, const SceneOptions & options, std::uint64_t seed)
{
  require(n_cameras >= 1, ErrorCode::kInvalidArgument, "need at least one camera");
  CounterRng rng(seed, Stream::kRig);
  const double f = 0.5 * options.image_width / std::tan(0.5 * options.hfov_deg * kDegToRad);
  std::vector<Camera> cameras;
  for (int k = 0; k < n_cameras; ++k) {
    const double yaw = 2.0 * std::numbers::pi * k / n_cameras + rng.uniform(-2.0, 2.0) * kDegToRad;
    const double pitch = rng.uniform(0.0, 3.0) * kDegToRad;
    const Eigen::Vector3d forward{std::cos(yaw) * std::cos(pitch), std::sin(yaw) * std::cos(pitch), -std::sin(pitch)};
    const Eigen::Vector3d right{std::sin(yaw), -std::cos(yaw), 0.0};
    const Eigen::Vector3d down = forward.cross(right);
    Eigen::Matrix3d cam_to_ego;
    cam_to_ego.col(0) = right;
    cam_to_ego.col(1) = down;
    cam_to_ego.col(2) = forward;
    const Eigen::Vector3d center{
      options.ring_radius * std::cos(yaw), options.ring_radius * std::sin(yaw), options.camera_height};

    Camera cam;
    cam.intrinsics = Intrinsics{f, f, 0.5 * options.image_width, 0.5 * options.image_height, options.image_width,
      options.image_height};
    cam.extrinsics = Extrinsics::from_pose(cam_to_ego, center);
    cameras.push_back(cam);
  }
  return CameraRig(std::move(cameras));
}

std::vector<FeatureImage> render_feature_images(const CameraRig & rig, const std::vector<Box3D> & boxes,
  const BevGrid & map_mask, const VoxelGridSpec & grid, double ground_z, const SceneOptions & options)
{
  require(options.feature_stride >= 1, ErrorCode::kInvalidArgument, "feature stride must be >= 1");
  std::vector<FeatureImage> images;
  for (std::size_t n = 0; n < rig.size(); ++n) {
    Camera cam = rig[n];
    const int fw = std::max(1, cam.intrinsics.width / options.feature_stride);
    const int fh = std::max(1, cam.intrinsics.height / options.feature_stride);
    cam.intrinsics = cam.intrinsics.rescaled(fw, fh);
    FeatureImage img(n, fh, fw, SceneChannels::kCount);

    const Eigen::Matrix3d k_inv = cam.intrinsics.matrix().inverse();
    const Eigen::Matrix3d cam_to_ego = cam.extrinsics.rotation.transpose();
    const Eigen::Vector3d origin = cam.extrinsics.center();
    for (int row = 0; row < fh; ++row) {
      for (int col = 0; col < fw; ++col) {
        const Eigen::Vector3d dir = cam_to_ego * (k_inv * Eigen::Vector3d{col + 0.5, row + 0.5, 1.0});
        if (!(dir.z() < 0.0)) {
          continue;
        }
        const double t = (ground_z - origin.z()) / dir.z();
        if (!(t > 0.0)) {
          continue;
        }
        const Eigen::Vector3d hit = origin + t * dir;
        const auto cell = grid.cell_of(hit.x(), hit.y());
        if (!cell) {
          continue;
        }
        img.at(row, col, SceneChannels::kDrivable) = map_mask.at((*cell)[0], (*cell)[1], kMapDrivable);
        img.at(row, col, SceneChannels::kLane) = map_mask.at((*cell)[0], (*cell)[1], kMapLane);
        for (const Box3D & box : boxes) {
          if (box.footprint_contains(hit.x(), hit.y())) {
            img.at(row, col, SceneChannels::footprint(box.class_id)) = 1.0F;
          }
        }
      }
    }

    const Polygon2 frame{{0.0, 0.0}, {double(fw), 0.0}, {double(fw), double(fh)}, {0.0, double(fh)}};
    for (const Box3D & box : boxes) {
      const Polygon2 outline = project_box_outline(cam, box);
      if (outline.size() < 3) {
        continue;
      }
      const Polygon2 visible = clip_convex(outline, frame);
      if (!(polygon_area(visible) > 0.0)) {
        continue;
      }
      double u0 = visible[0].x(), u1 = u0, v0 = visible[0].y(), v1 = v0;
      for (const auto & p : visible) {
        u0 = std::min(u0, p.x());
        u1 = std::max(u1, p.x());
        v0 = std::min(v0, p.y());
        v1 = std::max(v1, p.y());
      }
      const int c_begin = std::clamp(static_cast<int>(std::floor(u0)), 0, fw - 1);
      const int c_end = std::clamp(static_cast<int>(std::floor(u1)), 0, fw - 1);
      const int r_begin = std::clamp(static_cast<int>(std::floor(v0)), 0, fh - 1);
      const int r_end = std::clamp(static_cast<int>(std::floor(v1)), 0, fh - 1);
      for (int row = r_begin; row <= r_end; ++row) {
        for (int col = c_begin; col <= c_end; ++col) {
          const Polygon2 square{{double(col), double(row)}, {col + 1.0, double(row)}, {col + 1.0, row + 1.0},
            {double(col), row + 1.0}};
          if (polygon_area(clip_convex(square, outline)) > 0.0) {
            img.at(row, col, SceneChannels::silhouette(box.class_id)) = 1.0F;
          }
        }
      }
    }
    images.push_back(std::move(img));
  }
  return images;
}

SyntheticScene generate_scene(
  std::uint64_t seed, int n_cameras, int n_boxes, const VoxelGridSpec & grid, const SceneOptions & options)
{
  grid.validate();
  require(n_cameras >= 1, ErrorCode::kInvalidArgument, "need at least one camera");
  require(n_boxes >= 0, ErrorCode::kInvalidArgument, "box count must be non-negative");

  SyntheticScene scene;
  scene.seed = seed;
  scene.grid = grid;
  scene.ground_z = grid.origin.z() + 0.5 * grid.dz;
  scene.rig = make_ring_rig(n_cameras, options, seed);

  CounterRng map_rng(seed, Stream::kMap);
  scene.map_mask = generate_map(grid, options, map_rng);

  CounterRng box_rng(seed, Stream::kBoxes);
  scene.gt_boxes = generate_boxes(n_boxes, grid, scene.ground_z, scene.map_mask, options, box_rng);

  scene.feature_images =
    render_feature_images(scene.rig, scene.gt_boxes, scene.map_mask, grid, scene.ground_z, options);
  return scene;
}

std::vector<std::array<int, 2>> rasterize_footprint(const Box3D & box, const VoxelGridSpec & grid)
{
  std::vector<std::array<int, 2>> cells;
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      const Eigen::Vector2d c = grid.cell_center(i, j);
      if (box.footprint_contains(c.x(), c.y())) {
        cells.push_back({i, j});
      }
    }
  }
  return cells;
}

CameraRig perturb_extrinsics(const CameraRig & rig, const NoiseSpec & noise, std::uint64_t seed)
{
  require(noise.sigma >= 0.0 && std::isfinite(noise.sigma), ErrorCode::kInvalidArgument,
    "noise sigma must be non-negative");
  CounterRng rng(seed, Stream::kNoise);
  std::vector<Camera> cameras(rig.cameras().begin(), rig.cameras().end());
  for (Camera & cam : cameras) {
    // Draw a fixed number of values per camera so the switches do not shift
    // later cameras' noise.
    Eigen::Vector3d axis{rng.normal(), rng.normal(), rng.normal()};
    const double magnitude = std::min(std::abs(rng.normal(0.0, noise.sigma)), 3.0 * noise.sigma);
    const Eigen::Vector3d shift{rng.normal(0.0, noise.sigma), rng.normal(0.0, noise.sigma),
      rng.normal(0.0, noise.sigma)};
    if (noise.perturb_rotation && magnitude > 0.0 && axis.norm() > 0.0) {
      const Eigen::Matrix3d delta = Eigen::AngleAxisd(magnitude, axis.normalized()).toRotationMatrix();
      cam.extrinsics.rotation = delta * cam.extrinsics.rotation;
    }
    if (noise.perturb_translation) {
      cam.extrinsics.translation += shift;
    }
  }
  return CameraRig(std::move(cameras));
}

}  // namespace bevkit
