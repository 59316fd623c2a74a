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

#ifndef BEVKIT_TESTS_FIXTURES_HPP_
#define BEVKIT_TESTS_FIXTURES_HPP_

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Geometry>

#include "bevkit/boxes3d.hpp"
#include "bevkit/camera_rig.hpp"
#include "bevkit/random.hpp"
#include "bevkit/voxel_bev.hpp"

namespace bevkit::testing
{

/// Ego-frame axes of a camera looking along ego +x before yaw/pitch/roll.
inline Eigen::Matrix3d forward_camera_axes()
{
  Eigen::Matrix3d m;
  m.col(0) = Eigen::Vector3d(0, -1, 0);  // image right = ego right
  m.col(1) = Eigen::Vector3d(0, 0, -1);  // image down = ego down
  m.col(2) = Eigen::Vector3d(1, 0, 0);   // optical axis = ego forward
  return m;
}

inline Camera random_camera(CounterRng & rng, int width = 640, int height = 480)
{
  Camera cam;
  cam.intrinsics.width = width;
  cam.intrinsics.height = height;
  cam.intrinsics.fx = rng.uniform(0.5, 1.5) * width;
  cam.intrinsics.fy = cam.intrinsics.fx * rng.uniform(0.9, 1.1);
  cam.intrinsics.cx = width * rng.uniform(0.4, 0.6);
  cam.intrinsics.cy = height * rng.uniform(0.4, 0.6);
  const Eigen::Matrix3d turn = (Eigen::AngleAxisd(rng.uniform(-std::numbers::pi, std::numbers::pi), Eigen::Vector3d::UnitZ()) *
                                Eigen::AngleAxisd(rng.uniform(-0.2, 0.2), Eigen::Vector3d::UnitY()) *
                                Eigen::AngleAxisd(rng.uniform(-0.05, 0.05), Eigen::Vector3d::UnitX()))
                                 .toRotationMatrix();
  const Eigen::Vector3d center{rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(1.2, 2.0)};
  cam.extrinsics = Extrinsics::from_pose(turn * forward_camera_axes(), center);
  return cam;
}

inline CameraRig random_rig(CounterRng & rng, int n, int width = 640, int height = 480)
{
  std::vector<Camera> cams;
  for (int k = 0; k < n; ++k) {
    cams.push_back(random_camera(rng, width, height));
  }
  return CameraRig(std::move(cams));
}

inline FeatureImage random_features(CounterRng & rng, std::size_t camera, int height, int width, int channels)
{
  FeatureImage f(camera, height, width, channels);
  for (float & v : f.data) {
    v = static_cast<float>(rng.uniform(-1.0, 1.0));
  }
  return f;
}

inline Box3D random_box(CounterRng & rng, double extent = 3.0, int num_classes = 1)
{
  Box3D b;
  b.x = rng.uniform(-extent, extent);
  b.y = rng.uniform(-extent, extent);
  b.z = rng.uniform(-0.5, 0.5);
  b.w = rng.uniform(0.3, 2.5);
  b.l = rng.uniform(0.3, 5.0);
  b.h = rng.uniform(0.5, 2.0);
  b.theta = normalize_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
  b.score = rng.uniform(0.0, 1.0);
  b.class_id = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_classes)));
  return b;
}

}  // namespace bevkit::testing

#endif  // BEVKIT_TESTS_FIXTURES_HPP_
