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
#include <cstdio>
#include <functional>
#include <string>

#include "app.hpp"
#include "bevkit/gradcheck.hpp"
#include "bevkit/io.hpp"
#include "bevkit/plot.hpp"
#include "bevkit/random.hpp"
#include "bevkit/sweep.hpp"
#include "bevkit/synthetic_scene.hpp"

namespace bevkit::app
{

namespace fs = std::filesystem;

namespace
{

constexpr std::uint64_t kSeed = 11;

std::string sci(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

class Suite
{
public:
  void check(const std::string & name, const std::function<std::string(bool &)> & body)
  {
    bool ok = true;
    std::string detail;
    try {
      detail = body(ok);
    } catch (const std::exception & e) {
      ok = false;
      detail = std::string("threw: ") + e.what();
    }
    report.pass = report.pass && ok;
    report.lines.push_back(std::string(ok ? "PASS " : "FAIL ") + name + (detail.empty() ? "" : "  " + detail));
  }

  SelftestReport report;
};

SceneOptions small_images()
{
  SceneOptions o;
  o.image_width = 320;
  o.image_height = 180;
  return o;
}

}  // namespace

SelftestReport run_selftest(const fs::path & dir, unsigned threads)
{
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir, ec);
  require(!ec, ErrorCode::kIo, "cannot create " + dir.string());

  Suite suite;
  const VoxelGridSpec grid = VoxelGridSpec::centered(48, 48, 4, 1.0, 1.0, 0.5);
  const SceneOptions opts = small_images();
  const SyntheticScene scene = generate_scene(kSeed, 6, 10, grid, opts);
  save_scene(dir / "scene", scene);

  suite.check("scene_determinism", [&](bool & ok) {
    const SyntheticScene again = generate_scene(kSeed, 6, 10, grid, opts);
    ok = boxes_to_csv(again.gt_boxes) == boxes_to_csv(scene.gt_boxes) && again.map_mask.data == scene.map_mask.data;
    for (std::size_t n = 0; ok && n < again.feature_images.size(); ++n) {
      ok = again.feature_images[n].data == scene.feature_images[n].data;
    }
    const SyntheticScene loaded = load_scene(dir / "scene");
    ok = ok && boxes_to_csv(loaded.gt_boxes) == boxes_to_csv(scene.gt_boxes) && loaded.grid == scene.grid;
    return std::to_string(scene.gt_boxes.size()) + " boxes";
  });

  suite.check("projection_round_trip", [&](bool & ok) {
    CounterRng rng(kSeed, Stream::kTest);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
      const std::size_t cam = rng.below(scene.rig.size());
      const Intrinsics & k = scene.rig[cam].intrinsics;
      const PixelRay ray = pixel_to_ray(scene.rig, cam, rng.uniform(0.0, k.width), rng.uniform(0.0, k.height));
      const Eigen::Vector3d p = ray.at(rng.uniform(1.0, 60.0));
      const auto proj = project_point(scene.rig, cam, p);
      if (!proj) {
        ok = false;
        continue;
      }
      const PixelRay back = pixel_to_ray(scene.rig, cam, proj->u, proj->v);
      const double along = proj->depth / (scene.rig[cam].extrinsics.rotation * back.direction).z();
      worst = std::max(worst, (back.at(along) - p).norm());
    }
    ok = ok && worst < 1e-6;
    return "max_err=" + sci(worst);
  });

  VoxelGrid voxels;
  suite.check("unproject_schedule_independent", [&](bool & ok) {
    voxels = unproject(scene.rig, scene.feature_images, grid, {Fusion::kAverage, Sampling::kBilinear, 1});
    const VoxelGrid par =
      unproject(scene.rig, scene.feature_images, grid, {Fusion::kAverage, Sampling::kBilinear, std::max(threads, 3U)});
    ok = par.data == voxels.data && par.hit_count == voxels.hit_count;
    save_voxel_grid(dir / "voxels.bin", voxels);
    const auto visible = std::count_if(voxels.hit_count.begin(), voxels.hit_count.end(), [](auto h) { return h > 0; });
    return "visible=" + std::to_string(visible) + "/" + std::to_string(voxels.hit_count.size());
  });

  suite.check("uniform_ray_fill", [&](bool & ok) {
    const FeatureImage & f = scene.feature_images[0];
    Camera cam = scene.rig[0];
    cam.intrinsics = cam.intrinsics.rescaled(f.width, f.height);
    const CameraRig feat_rig({cam});
    const VoxelGrid v = unproject(feat_rig, std::span(&f, 1), grid, {Fusion::kAverage, Sampling::kNearest, 1});
    std::size_t checked = 0;
    for (int i = 0; i < grid.nx; ++i) {
      for (int j = 0; j < grid.ny; ++j) {
        for (int k = 0; k < grid.nz; ++k) {
          const auto p = project_point(cam, grid.voxel_center(i, j, k));
          if (!p || p->u < 0 || p->v < 0 || p->u >= f.width || p->v >= f.height) {
            ok = ok && v.hit_count[v.voxel_index(i, j, k)] == 0;
            continue;
          }
          const int col = static_cast<int>(std::floor(p->u));
          const int row = static_cast<int>(std::floor(p->v));
          for (int c = 0; c < f.channels; ++c) {
            ok = ok && v.at(i, j, k, c) == f.at(row, col, c);
          }
          ++checked;
        }
      }
    }
    return "voxels_checked=" + std::to_string(checked);
  });

  suite.check("s2c_round_trip", [&](bool & ok) {
    const BevGrid bev = spatial_to_channel(voxels);
    const VoxelGrid back = channel_to_spatial(bev, grid, voxels.channels, voxels.hit_count);
    ok = back.data == voxels.data && bev.channels == grid.nz * voxels.channels;
    save_bev_grid(dir / "bev.bin", bev, &grid);
    return "bev_channels=" + std::to_string(bev.channels);
  });

  suite.check("centerness_range", [&](bool & ok) {
    const BevGrid w = bev_centerness(101, 101, 50.0, 50.0);
    const auto [lo, hi] = std::minmax_element(w.data.begin(), w.data.end());
    ok = *lo == 1.0F && *hi == 2.0F && w.at(50, 50, 0) == 1.0F && w.at(0, 0, 0) == 2.0F &&
         std::abs(w.at(100, 50, 0) - 1.70710678) < 1e-5;
    write_pgm(dir / "centerness.pgm", w, 0, 1.0, 2.0);
    return "edge_mid=" + sci(w.at(100, 50, 0));
  });

  suite.check("bev_iou_properties", [&](bool & ok) {
    CounterRng rng(kSeed + 1, Stream::kTest);
    for (int n = 0; n < 500; ++n) {
      Box3D a{rng.uniform(-3, 3), rng.uniform(-3, 3), 0, rng.uniform(0.5, 3), rng.uniform(0.5, 5), 1,
        rng.uniform(-3.1, 3.1)};
      Box3D b{rng.uniform(-3, 3), rng.uniform(-3, 3), 0, rng.uniform(0.5, 3), rng.uniform(0.5, 5), 1,
        rng.uniform(-3.1, 3.1)};
      const double ab = bev_iou(a, b);
      ok = ok && ab == bev_iou(b, a) && ab >= 0.0 && ab <= 1.0 && bev_iou(a, a) == 1.0;
    }
    return "";
  });

  std::vector<Box3D> candidates;
  suite.check("nms_idempotent_antichain", [&](bool & ok) {
    CounterRng rng(kSeed + 2, Stream::kTest);
    for (const Box3D & g : scene.gt_boxes) {
      for (int n = 0; n < 4; ++n) {
        Box3D b = g;
        b.x += rng.uniform(-0.5, 0.5);
        b.y += rng.uniform(-0.5, 0.5);
        b.theta = normalize_angle(b.theta + rng.uniform(-0.2, 0.2));
        b.score = rng.uniform(0.01, 1.0);
        candidates.push_back(b);
      }
    }
    const auto kept = rotated_nms(candidates);
    ok = rotated_nms(kept) == kept;
    for (std::size_t a = 0; a < kept.size(); ++a) {
      for (std::size_t b = a + 1; b < kept.size(); ++b) {
        ok = ok && (kept[a].class_id != kept[b].class_id || bev_iou(kept[a], kept[b]) <= 0.2);
      }
    }
    save_boxes(dir / "nms.csv", kept);
    return "kept=" + std::to_string(kept.size()) + "/" + std::to_string(candidates.size());
  });

  suite.check("assignment", [&](bool & ok) {
    const auto anchors = generate_anchors(AnchorSpec::defaults(), grid);
    const auto fixed = assign_fixed_iou(anchors, scene.gt_boxes, 0.6, 0.45);
    std::vector<int> has_pos(scene.gt_boxes.size());
    for (const auto & [a, g] : fixed.positive) {
      has_pos[g] = 1;
    }
    ok = std::all_of(has_pos.begin(), has_pos.end(), [](int v) { return v == 1; });
    AnchorPrediction pred;
    pred.num_classes = kNumObjectClasses;
    CounterRng rng(kSeed + 3, Stream::kTest);
    for (std::size_t n = 0; n < anchors.size() * pred.num_classes; ++n) {
      pred.cls_scores.push_back(rng.uniform());
    }
    const auto dyn = assign_dynamic(anchors, scene.gt_boxes, pred);
    ok = ok && dyn.positive.size() == scene.gt_boxes.size();
    for (const auto & [a, g] : dyn.positive) {
      const auto & bag = dyn.per_gt_bag[g];
      ok = ok && std::find(bag.begin(), bag.end(), a) != bag.end();
    }
    write_text_file(dir / "assignment.csv", assignment_to_csv(dyn, anchors.size()));
    return "anchors=" + std::to_string(anchors.size()) + " fixed_pos=" + std::to_string(fixed.positive.size()) +
           " dynamic_pos=" + std::to_string(dyn.positive.size());
  });

  suite.check("loss_gradients", [&](bool & ok) {
    GradCheckConfig gc;
    gc.trials = 20;
    std::string csv = "loss,trials,components,failures,max_relative_error\n";
    double worst = 0.0;
    for (const GradCheckRow & r : run_loss_gradient_checks(gc)) {
      ok = ok && r.pass();
      worst = std::max(worst, r.max_relative_error);
      csv += r.loss + "," + std::to_string(r.trials) + "," + std::to_string(r.components) + "," +
             std::to_string(r.failures) + "," + format_double(r.max_relative_error) + "\n";
    }
    write_text_file(dir / "loss_check.csv", csv);
    return "max_rel_err=" + sci(worst);
  });

  suite.check("metrics_perfect_predictions", [&](bool & ok) {
    const EvalResult r = center_distance_ap(scene.gt_boxes, scene.gt_boxes);
    ok = r.map == 1.0 && seg_iou(scene.map_mask.channel(kMapDrivable), scene.map_mask.channel(kMapDrivable)) == 1.0;
    return "";
  });

  suite.check("pipeline_eval", [&](bool & ok) {
    const SceneEval eval = evaluate_scene(scene, scene.rig);
    save_boxes(dir / "detections.csv", eval.detections);
    ok = eval.seg_iou > 0.0 && eval.seg_iou <= 1.0 && eval.map >= 0.0 && eval.map <= 1.0;
    SweepConfig sc;
    sc.levels = {0.0, 1e-3, 2e-1};
    sc.threads = threads;
    const SyntheticScene scenes[] = {scene};
    PlotData plot;
    plot.sweep = noise_sweep(scenes, sc);
    plot.map_mask = scene.map_mask;
    plot.centerness = bev_centerness(grid.nx, grid.ny, 0.5 * (grid.nx - 1), 0.5 * (grid.ny - 1));
    emit_plot_data(dir / "plots", plot);
    return "seg_iou=" + sci(eval.seg_iou) + " map=" + sci(eval.map);
  });

  std::string text;
  for (const std::string & line : suite.report.lines) {
    text += line + "\n";
  }
  write_text_file(dir / "report.txt", text);
  return suite.report;
}

}  // namespace bevkit::app
