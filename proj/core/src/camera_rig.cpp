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

#include "bevkit/camera_rig.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "bevkit/error.hpp"

namespace bevkit
{

namespace
{

// Near clipping plane used when outlining boxes that cross the camera plane.
constexpr double kNearDepth = 1e-3;

constexpr std::array<std::pair<int, int>, 12> kBoxEdges{{
  {0, 1}, {1, 2}, {2, 3}, {3, 0},  // bottom
  {4, 5}, {5, 6}, {6, 7}, {7, 4},  // top
  {0, 4}, {1, 5}, {2, 6}, {3, 7},  // verticals
}};

}  // namespace

Eigen::Matrix3d Intrinsics::matrix() const
{
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Intrinsics Intrinsics::rescaled(int new_width, int new_height) const
{
  require(new_width > 0 && new_height > 0, ErrorCode::kInvalidArgument, "rescaled size must be positive");
  if (new_width == width && new_height == height) {
    return *this;
  }
  const double sx = static_cast<double>(new_width) / width;
  const double sy = static_cast<double>(new_height) / height;
  return Intrinsics{fx * sx, fy * sy, cx * sx, cy * sy, new_width, new_height};
}

void Intrinsics::validate() const
{
  require(width > 0 && height > 0, ErrorCode::kInvalidArgument, "image size must be positive");
  require(fx > 0.0 && fy > 0.0, ErrorCode::kInvalidArgument, "focal lengths must be positive");
  require(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height, ErrorCode::kInvalidArgument,
    "principal point must lie inside the image");
}

Eigen::Matrix4d Extrinsics::matrix() const
{
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Extrinsics Extrinsics::from_matrix(const Eigen::Matrix4d & m)
{
  return Extrinsics{m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

Extrinsics Extrinsics::from_pose(const Eigen::Matrix3d & camera_to_ego, const Eigen::Vector3d & center)
{
  Extrinsics e;
  e.rotation = camera_to_ego.transpose();
  e.translation = -(e.rotation * center);
  return e;
}

void Extrinsics::validate() const
{
  require(rotation.allFinite() && translation.allFinite(), ErrorCode::kInvalidArgument, "extrinsics must be finite");
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  require(ortho <= 1e-9, ErrorCode::kInvalidArgument, "rotation is not orthonormal");
  require(std::abs(rotation.determinant() - 1.0) <= 1e-9, ErrorCode::kInvalidArgument,
    "rotation determinant is not +1");
}

CameraRig::CameraRig(std::vector<Camera> cameras) : cameras_(std::move(cameras))
{
  require(!cameras_.empty(), ErrorCode::kInvalidArgument, "camera rig needs at least one camera");
  for (std::size_t i = 0; i < cameras_.size(); ++i) {
    try {
      cameras_[i].intrinsics.validate();
      cameras_[i].extrinsics.validate();
    } catch (const Error & e) {
      fail(e.code(), "camera " + std::to_string(i) + ": " + e.what());
    }
  }
}

const Camera & CameraRig::at(std::size_t index) const
{
  require(index < cameras_.size(), ErrorCode::kOutOfRange,
    "camera index " + std::to_string(index) + " out of range for rig of " + std::to_string(cameras_.size()));
  return cameras_[index];
}

std::optional<PixelProjection> project_point(const Camera & camera, const Eigen::Vector3d & p_ego)
{
  const Eigen::Vector3d hom = camera.intrinsics.matrix() * camera.extrinsics.to_camera(p_ego);
  const double depth = hom.z();
  if (!(depth > 0.0)) {
    return std::nullopt;
  }
  const double u = hom.x() / depth;
  const double v = hom.y() / depth;
  if (!(u >= 0.0 && u < camera.intrinsics.width && v >= 0.0 && v < camera.intrinsics.height)) {
    return std::nullopt;
  }
  return PixelProjection{u, v, depth};
}

std::optional<PixelProjection> project_point(
  const CameraRig & rig, std::size_t camera_index, const Eigen::Vector3d & p_ego)
{
  return project_point(rig.at(camera_index), p_ego);
}

PixelRay pixel_to_ray(const CameraRig & rig, std::size_t camera_index, double u, double v)
{
  const Camera & cam = rig.at(camera_index);
  const Intrinsics & k = cam.intrinsics;
  require(u >= 0.0 && u < k.width && v >= 0.0 && v < k.height, ErrorCode::kOutOfRange,
    "pixel (" + std::to_string(u) + ", " + std::to_string(v) + ") outside image");
  const Eigen::Vector3d dir_cam{(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0};
  PixelRay ray;
  ray.camera_index = camera_index;
  ray.u = u;
  ray.v = v;
  ray.origin = cam.extrinsics.center();
  ray.direction = (cam.extrinsics.rotation.transpose() * dir_cam).normalized();
  return ray;
}

Polygon2 project_box_outline(const Camera & camera, const Box3D & box)
{
  const auto corners = box.corners();
  std::array<Eigen::Vector3d, 8> cam_pts;
  for (std::size_t i = 0; i < 8; ++i) {
    cam_pts[i] = camera.extrinsics.to_camera(corners[i]);
  }

  std::vector<Eigen::Vector3d> front;
  for (const auto & p : cam_pts) {
    if (p.z() >= kNearDepth) {
      front.push_back(p);
    }
  }
  if (front.empty()) {
    return {};
  }
  for (const auto & [a, b] : kBoxEdges) {
    const Eigen::Vector3d & pa = cam_pts[a];
    const Eigen::Vector3d & pb = cam_pts[b];
    if ((pa.z() >= kNearDepth) != (pb.z() >= kNearDepth)) {
      const double t = (kNearDepth - pa.z()) / (pb.z() - pa.z());
      front.push_back(pa + t * (pb - pa));
    }
  }

  const Eigen::Matrix3d k = camera.intrinsics.matrix();
  Polygon2 pixels;
  pixels.reserve(front.size());
  for (const auto & p : front) {
    const Eigen::Vector3d hom = k * p;
    pixels.emplace_back(hom.x() / hom.z(), hom.y() / hom.z());
  }
  return convex_hull(std::move(pixels));
}

std::vector<ImageBox> boxes_3d_to_2d(const CameraRig & rig, std::size_t camera_index, std::span<const Box3D> boxes)
{
  const Camera & cam = rig.at(camera_index);
  const double w = cam.intrinsics.width;
  const double h = cam.intrinsics.height;
  const Polygon2 frame{{0.0, 0.0}, {w, 0.0}, {w, h}, {0.0, h}};

  std::vector<ImageBox> out;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Polygon2 outline = project_box_outline(cam, boxes[i]);
    if (outline.size() < 3) {
      continue;
    }
    const Polygon2 visible = clip_convex(outline, frame);
    if (!(polygon_area(visible) > 0.0)) {
      continue;
    }
    ImageBox r{visible[0].x(), visible[0].y(), visible[0].x(), visible[0].y(), i};
    for (const auto & p : visible) {
      r.u_min = std::min(r.u_min, p.x());
      r.v_min = std::min(r.v_min, p.y());
      r.u_max = std::max(r.u_max, p.x());
      r.v_max = std::max(r.v_max, p.y());
    }
    r.u_min = std::clamp(r.u_min, 0.0, w - 1.0);
    r.u_max = std::clamp(r.u_max, 0.0, w - 1.0);
    r.v_min = std::clamp(r.v_min, 0.0, h - 1.0);
    r.v_max = std::clamp(r.v_max, 0.0, h - 1.0);
    out.push_back(r);
  }
  return out;
}

}  // namespace bevkit
