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

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "bevkit/camera_rig.hpp"
#include "bevkit/error.hpp"
#include "bevkit/synthetic_scene.hpp"
#include "oracles/iou.hpp"
#include "oracles/projection.hpp"
#include "oracles/raster.hpp"

namespace bevkit
{
namespace
{

VoxelGridSpec test_grid() { return VoxelGridSpec::centered(96, 96, 4, 0.5, 0.5, 1.0); }

SceneOptions small_images()
{
  SceneOptions o;
  o.image_width = 320;
  o.image_height = 180;
  return o;
}

TEST(GenerateScene, DeterministicPerSeed)
{
  const SyntheticScene a = generate_scene(5, 6, 12, test_grid(), small_images());
  const SyntheticScene b = generate_scene(5, 6, 12, test_grid(), small_images());
  EXPECT_EQ(a.gt_boxes, b.gt_boxes);
  EXPECT_EQ(a.map_mask.data, b.map_mask.data);
  ASSERT_EQ(a.feature_images.size(), b.feature_images.size());
  for (std::size_t c = 0; c < a.feature_images.size(); ++c) {
    EXPECT_EQ(a.feature_images[c].data, b.feature_images[c].data);
    EXPECT_EQ(a.rig[c].extrinsics.rotation, b.rig[c].extrinsics.rotation);
  }
  const SyntheticScene c = generate_scene(6, 6, 12, test_grid(), small_images());
  EXPECT_NE(a.gt_boxes, c.gt_boxes);
}

TEST(GenerateScene, EmptyScene)
{
  const SyntheticScene s = generate_scene(3, 2, 0, test_grid(), small_images());
  EXPECT_TRUE(s.gt_boxes.empty());
  EXPECT_EQ(s.rig.size(), 2U);
  EXPECT_EQ(s.feature_images.size(), 2U);
  for (const FeatureImage & f : s.feature_images) {
    EXPECT_EQ(f.channels, SceneChannels::kCount);
    EXPECT_EQ(f.width, 80);
    EXPECT_EQ(f.height, 45);
  }
  EXPECT_THROW(generate_scene(3, 0, 1, test_grid()), Error);
}

TEST(GenerateScene, StructuralInvariants)
{
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const SyntheticScene s = generate_scene(seed, 6, 20, test_grid(), small_images());
    const VoxelGridSpec & g = s.grid;
    EXPECT_EQ(s.gt_boxes.size(), 20U);
    for (float v : s.map_mask.data) {
      EXPECT_TRUE(v == 0.0F || v == 1.0F);
    }
    for (const Box3D & b : s.gt_boxes) {
      for (const auto & c : b.bev_corners()) {
        EXPECT_GE(c.x(), g.x_min());
        EXPECT_LE(c.x(), g.x_max());
        EXPECT_GE(c.y(), g.y_min());
        EXPECT_LE(c.y(), g.y_max());
      }
      EXPECT_GE(b.class_id, 0);
      EXPECT_LT(b.class_id, kNumObjectClasses);
      EXPECT_DOUBLE_EQ(b.z, s.ground_z + 0.5 * b.h);
      const auto cells = oracle::footprint_cells(b, g);
      const bool on_road = std::any_of(cells.begin(), cells.end(),
        [&](const auto & ij) { return s.map_mask.at(ij[0], ij[1], kMapDrivable) == 1.0F; });
      EXPECT_TRUE(on_road) << "seed " << seed;
    }
  }
}

TEST(GenerateScene, RingCoversAllDirections)
{
  const CameraRig rig = make_ring_rig(6, SceneOptions{}, 9);
  for (int deg = 0; deg < 360; deg += 5) {
    const double a = deg * std::numbers::pi / 180.0;
    const Eigen::Vector3d p{20.0 * std::cos(a), 20.0 * std::sin(a), 1.0};
    bool seen = false;
    for (std::size_t c = 0; c < rig.size(); ++c) {
      seen = seen || project_point(rig, c, p).has_value();
    }
    EXPECT_TRUE(seen) << deg;
  }
}

TEST(RasterizeFootprint, MatchesGridScan)
{
  CounterRng rng(601, Stream::kTest);
  const VoxelGridSpec g = VoxelGridSpec::centered(40, 30, 1, 0.5, 0.5, 1.0);
  for (int n = 0; n < 100; ++n) {
    Box3D b;
    b.x = rng.uniform(-12, 12);
    b.y = rng.uniform(-9, 9);
    b.w = rng.uniform(0.2, 3.0);
    b.l = rng.uniform(0.2, 6.0);
    b.theta = rng.uniform(-3.14, 3.14);
    auto got = rasterize_footprint(b, g);
    auto want = oracle::footprint_cells(b, g);
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, want) << n;
  }
}

TEST(RenderedFeatures, SilhouetteIffProjectedRectangle)
{
  const SceneOptions opt = small_images();
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const SyntheticScene s = generate_scene(seed, 6, 15, test_grid(), opt);
    for (const Box3D & box : s.gt_boxes) {
      const std::vector<Box3D> one{box};
      const auto images = render_feature_images(s.rig, one, s.map_mask, s.grid, s.ground_z, opt);
      for (std::size_t c = 0; c < s.rig.size(); ++c) {
        const bool visible = !boxes_3d_to_2d(s.rig, c, one).empty();
        const FeatureImage & f = images[c];
        bool coded = false;
        for (int r = 0; r < f.height && !coded; ++r) {
          for (int q = 0; q < f.width && !coded; ++q) {
            coded = f.at(r, q, SceneChannels::silhouette(box.class_id)) != 0.0F;
          }
        }
        EXPECT_EQ(coded, visible) << "seed " << seed << " camera " << c;
      }
    }
  }
}

TEST(RenderedFeatures, GroundChannelsFollowMap)
{
  const SceneOptions opt = small_images();
  const SyntheticScene s = generate_scene(2, 6, 10, test_grid(), opt);
  const Camera cam0 = s.rig[0];
  const FeatureImage & f = s.feature_images[0];
  Camera feat = cam0;
  feat.intrinsics = cam0.intrinsics.rescaled(f.width, f.height);
  std::size_t checked = 0;
  for (int i = 0; i < s.grid.nx; i += 3) {
    for (int j = 0; j < s.grid.ny; j += 3) {
      const Eigen::Vector2d c = s.grid.cell_center(i, j);
      const auto px = oracle::project(feat, c.x(), c.y(), s.ground_z);
      if (!px) {
        continue;
      }
      // Only check pixels whose center ray lands in this same cell.
      const int row = static_cast<int>(px->v);
      const int col = static_cast<int>(px->u);
      const CameraRig one({feat});
      const PixelRay ray = pixel_to_ray(one, 0, col + 0.5, row + 0.5);
      const double t = (s.ground_z - ray.origin.z()) / ray.direction.z();
      const Eigen::Vector3d hit = ray.at(t);
      const auto cell = s.grid.cell_of(hit.x(), hit.y());
      if (!(t > 0.0) || !cell || (*cell)[0] != i || (*cell)[1] != j) {
        continue;
      }
      EXPECT_EQ(f.at(row, col, SceneChannels::kDrivable), s.map_mask.at(i, j, kMapDrivable));
      EXPECT_EQ(f.at(row, col, SceneChannels::kLane), s.map_mask.at(i, j, kMapLane));
      ++checked;
    }
  }
  EXPECT_GT(checked, 20U);
}

TEST(PerturbExtrinsics, ZeroSigmaIsIdentity)
{
  const CameraRig rig = make_ring_rig(6, SceneOptions{}, 4);
  const CameraRig same = perturb_extrinsics(rig, NoiseSpec{}, 99);
  for (std::size_t c = 0; c < rig.size(); ++c) {
    EXPECT_EQ(same[c].extrinsics.rotation, rig[c].extrinsics.rotation);
    EXPECT_EQ(same[c].extrinsics.translation, rig[c].extrinsics.translation);
  }
  NoiseSpec bad;
  bad.sigma = -1.0;
  EXPECT_THROW(perturb_extrinsics(rig, bad, 1), Error);
}

TEST(PerturbExtrinsics, SeededAndSwitchable)
{
  const CameraRig rig = make_ring_rig(6, SceneOptions{}, 4);
  NoiseSpec n;
  n.sigma = 0.05;
  const CameraRig a = perturb_extrinsics(rig, n, 7);
  const CameraRig b = perturb_extrinsics(rig, n, 7);
  const CameraRig c = perturb_extrinsics(rig, n, 8);
  EXPECT_EQ(a[3].extrinsics.rotation, b[3].extrinsics.rotation);
  EXPECT_NE(a[3].extrinsics.rotation, c[3].extrinsics.rotation);
  n.perturb_translation = false;
  const CameraRig r = perturb_extrinsics(rig, n, 7);
  n.perturb_translation = true;
  n.perturb_rotation = false;
  const CameraRig t = perturb_extrinsics(rig, n, 7);
  for (std::size_t k = 0; k < rig.size(); ++k) {
    EXPECT_EQ(r[k].extrinsics.translation, rig[k].extrinsics.translation);
    EXPECT_NE(r[k].extrinsics.rotation, rig[k].extrinsics.rotation);
    EXPECT_EQ(t[k].extrinsics.rotation, rig[k].extrinsics.rotation);
    const Eigen::Matrix3d rr = a[k].extrinsics.rotation;
    EXPECT_NEAR((rr * rr.transpose() - Eigen::Matrix3d::Identity()).norm(), 0.0, 1e-12);
    // Rotation magnitude is clamped at 3 sigma.
    const double angle = Eigen::AngleAxisd(rr * rig[k].extrinsics.rotation.transpose()).angle();
    EXPECT_LE(angle, 3.0 * 0.05 + 1e-12);
  }
}

TEST(PerturbExtrinsics, ReprojectionErrorGrowsWithSigma)
{
  const CameraRig rig = make_ring_rig(6, SceneOptions{}, 4);
  // Fixed points 10 m along each optical axis.
  std::vector<std::pair<std::size_t, Eigen::Vector3d>> points;
  for (std::size_t c = 0; c < rig.size(); ++c) {
    for (int k = 0; k < 5; ++k) {
      const PixelRay ray = pixel_to_ray(rig, c, 100.0 + 100.0 * k, 180.0);
      points.emplace_back(c, ray.at(10.0));
    }
  }
  double prev = 0.0;
  for (double sigma : NoiseSpec{}.levels) {
    NoiseSpec n;
    n.sigma = sigma;
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const CameraRig p = perturb_extrinsics(rig, n, seed);
      for (const auto & [c, x] : points) {
        const auto a = oracle::project_raw(rig[c], x.x(), x.y(), x.z());
        const auto b = oracle::project_raw(p[c], x.x(), x.y(), x.z());
        total += std::hypot(a.u - b.u, a.v - b.v);
      }
    }
    const double mean = total / (100.0 * points.size());
    EXPECT_GT(mean, prev) << sigma;
    prev = mean;
  }
}

}  // namespace
}  // namespace bevkit
