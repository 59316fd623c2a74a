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

#include "bevkit/boxes3d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <tuple>

#include "bevkit/error.hpp"

namespace bevkit
{

namespace
{

double cross(const Eigen::Vector2d & a, const Eigen::Vector2d & b) { return a.x() * b.y() - a.y() * b.x(); }

Polygon2 footprint(const Box3D & box)
{
  const auto c = box.bev_corners();
  return {c.begin(), c.end()};
}

double circumradius(const Box3D & box) { return 0.5 * std::hypot(box.w, box.l); }

// Strict weak order used to make bev_iou argument-order independent.
bool canonical_less(const Box3D & a, const Box3D & b)
{
  return std::tie(a.x, a.y, a.w, a.l, a.theta) < std::tie(b.x, b.y, b.w, b.l, b.theta);
}

}  // namespace

std::array<Eigen::Vector2d, 4> Box3D::bev_corners() const
{
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double hl = 0.5 * l;
  const double hw = 0.5 * w;
  const std::array<Eigen::Vector2d, 4> local{
    Eigen::Vector2d{hl, -hw}, Eigen::Vector2d{hl, hw}, Eigen::Vector2d{-hl, hw}, Eigen::Vector2d{-hl, -hw}};
  std::array<Eigen::Vector2d, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = {x + c * local[i].x() - s * local[i].y(), y + s * local[i].x() + c * local[i].y()};
  }
  return out;
}

std::array<Eigen::Vector3d, 8> Box3D::corners() const
{
  const auto bev = bev_corners();
  std::array<Eigen::Vector3d, 8> out;
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = {bev[i].x(), bev[i].y(), z - 0.5 * h};
    out[i + 4] = {bev[i].x(), bev[i].y(), z + 0.5 * h};
  }
  return out;
}

Eigen::Matrix<double, 9, 1> Box3D::regression_vector() const
{
  Eigen::Matrix<double, 9, 1> v;
  v << x, y, z, w, h, l, theta, vx, vy;
  return v;
}

bool Box3D::footprint_contains(double px, double py) const
{
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double dx = px - x;
  const double dy = py - y;
  const double along = c * dx + s * dy;
  const double across = -s * dx + c * dy;
  return std::abs(along) <= 0.5 * l && std::abs(across) <= 0.5 * w;
}

double normalize_angle(double angle)
{
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, kTwoPi);  // (-2pi, 2pi)
  if (a <= -std::numbers::pi) {
    a += kTwoPi;
  } else if (a > std::numbers::pi) {
    a -= kTwoPi;
  }
  return a;
}

void validate_box(const Box3D & box)
{
  const bool finite = std::isfinite(box.x) && std::isfinite(box.y) && std::isfinite(box.z) && std::isfinite(box.theta) &&
                      std::isfinite(box.vx) && std::isfinite(box.vy) && std::isfinite(box.score);
  require(finite, ErrorCode::kInvalidArgument, "box fields must be finite");
  require(box.w > 0.0 && box.l > 0.0 && box.h > 0.0, ErrorCode::kInvalidArgument, "box sizes must be positive");
}

double polygon_area(const Polygon2 & polygon)
{
  const std::size_t n = polygon.size();
  if (n < 3) {
    return 0.0;
  }
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    twice += cross(polygon[i], polygon[(i + 1) % n]);
  }
  return 0.5 * twice;
}

Polygon2 clip_convex(const Polygon2 & subject, const Polygon2 & clip)
{
  Polygon2 output = subject;
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !output.empty(); ++e) {
    const Eigen::Vector2d a = clip[e];
    const Eigen::Vector2d edge = clip[(e + 1) % m] - a;
    const Polygon2 input = std::move(output);
    output.clear();
    const std::size_t n = input.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector2d & p = input[i];
      const Eigen::Vector2d & q = input[(i + 1) % n];
      const double sp = cross(edge, p - a);
      const double sq = cross(edge, q - a);
      if (sp >= 0.0) {
        output.push_back(p);
      }
      if ((sp >= 0.0) != (sq >= 0.0)) {
        const double t = sp / (sp - sq);
        output.push_back(p + t * (q - p));
      }
    }
  }
  return output;
}

Polygon2 convex_hull(Polygon2 points)
{
  std::sort(points.begin(), points.end(), [](const Eigen::Vector2d & a, const Eigen::Vector2d & b) {
    return std::tie(a.x(), a.y()) < std::tie(b.x(), b.y());
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) {
    return points;
  }
  Polygon2 hull(2 * points.size());
  std::size_t k = 0;
  for (const auto & p : points) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) {
      --k;
    }
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = points.rbegin() + 1; it != points.rend(); ++it) {
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], *it - hull[k - 2]) <= 0.0) {
      --k;
    }
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

double bev_iou(const Box3D & a, const Box3D & b)
{
  const Box3D & first = canonical_less(b, a) ? b : a;
  const Box3D & second = canonical_less(b, a) ? a : b;

  if (std::hypot(first.x - second.x, first.y - second.y) > circumradius(first) + circumradius(second)) {
    return 0.0;
  }
  const Polygon2 pa = footprint(first);
  const Polygon2 pb = footprint(second);
  const double inter = std::max(0.0, polygon_area(clip_convex(pa, pb)));
  const double uni = polygon_area(pa) + polygon_area(pb) - inter;
  if (uni <= 0.0) {
    return 0.0;
  }
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<std::size_t> rotated_nms_indices(std::span<const Box3D> boxes, const NmsOptions & options)
{
  std::vector<std::size_t> order;
  order.reserve(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (boxes[i].score >= options.score_threshold) {
      order.push_back(i);
    }
  }
  // Class-major, then score descending; equal scores keep input order.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (boxes[i].class_id != boxes[j].class_id) {
      return boxes[i].class_id < boxes[j].class_id;
    }
    return boxes[i].score > boxes[j].score;
  });

  std::vector<std::size_t> kept;
  std::size_t class_begin = 0;  // first kept index of the current class
  for (std::size_t n = 0; n < order.size(); ++n) {
    const Box3D & cand = boxes[order[n]];
    if (n > 0 && boxes[order[n - 1]].class_id != cand.class_id) {
      class_begin = kept.size();
    }
    bool suppressed = false;
    for (std::size_t k = class_begin; k < kept.size() && !suppressed; ++k) {
      suppressed = bev_iou(boxes[kept[k]], cand) > options.iou_threshold;
    }
    if (!suppressed) {
      kept.push_back(order[n]);
    }
  }

  if (kept.size() > options.max_out) {
    std::vector<std::size_t> by_score = kept;
    std::stable_sort(by_score.begin(), by_score.end(), [&](std::size_t i, std::size_t j) {
      if (boxes[i].score != boxes[j].score) {
        return boxes[i].score > boxes[j].score;
      }
      return i < j;
    });
    by_score.resize(options.max_out);
    std::sort(by_score.begin(), by_score.end());
    std::vector<std::size_t> trimmed;
    trimmed.reserve(options.max_out);
    for (std::size_t idx : kept) {
      if (std::binary_search(by_score.begin(), by_score.end(), idx)) {
        trimmed.push_back(idx);
      }
    }
    kept = std::move(trimmed);
  }
  return kept;
}

std::vector<Box3D> rotated_nms(std::span<const Box3D> boxes, const NmsOptions & options)
{
  std::vector<Box3D> out;
  for (std::size_t idx : rotated_nms_indices(boxes, options)) {
    out.push_back(boxes[idx]);
  }
  return out;
}

AnchorSpec AnchorSpec::defaults()
{
  AnchorSpec spec;
  spec.sizes = {{0.86, 2.59, 1.0}, {0.57, 1.73, 1.0}, {1.0, 1.0, 1.0}, {0.4, 0.4, 1.0}};
  spec.rotations = {0.0, 0.5 * std::numbers::pi};
  spec.z_center = 0.0;
  return spec;
}

std::size_t anchor_count(const AnchorSpec & spec, const VoxelGridSpec & grid)
{
  return grid.cell_count() * spec.sizes.size() * spec.rotations.size();
}

std::vector<Box3D> generate_anchors(const AnchorSpec & spec, const VoxelGridSpec & grid)
{
  grid.validate();
  require(!spec.sizes.empty() && !spec.rotations.empty(), ErrorCode::kInvalidArgument,
    "anchor spec needs at least one size and one rotation");
  std::vector<Box3D> anchors;
  anchors.reserve(anchor_count(spec, grid));
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      const Eigen::Vector2d c = grid.cell_center(i, j);
      for (const AnchorSize & size : spec.sizes) {
        for (double rot : spec.rotations) {
          Box3D a;
          a.x = c.x();
          a.y = c.y();
          a.z = spec.z_center;
          a.w = size.w;
          a.l = size.l;
          a.h = size.h;
          a.theta = normalize_angle(rot);
          a.score = 0.0;
          anchors.push_back(a);
        }
      }
    }
  }
  return anchors;
}

}  // namespace bevkit
