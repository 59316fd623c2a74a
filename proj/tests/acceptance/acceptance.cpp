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

// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
//
// usage: bevkit_acceptance <path to bevkit executable> [scratch dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "bevkit/assignment.hpp"
#include "bevkit/boxes3d.hpp"
#include "bevkit/camera_rig.hpp"
#include "bevkit/gradcheck.hpp"
#include "bevkit/losses.hpp"
#include "bevkit/sweep.hpp"
#include "bevkit/synthetic_scene.hpp"
#include "bevkit/voxel_bev.hpp"
#include "fixtures.hpp"
#include "oracles/assignment.hpp"
#include "oracles/iou.hpp"
#include "oracles/nms.hpp"
#include "oracles/unproject.hpp"

namespace
{

using namespace bevkit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome
{
  bool pass;
  std::string detail;
};

std::string num(double v, const char * fmt = "%.3g")
{
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

Outcome projection_round_trip()
{
  CounterRng rng(1, Stream::kTest);
  const CameraRig rig = testing::random_rig(rng, 6, 1600, 900);
  const auto start = Clock::now();
  double worst = 0.0;
  int done = 0;
  while (done < 10000) {
    const std::size_t cam = static_cast<std::size_t>(done % 6);
    const Eigen::Vector3d p{rng.uniform(-60, 60), rng.uniform(-60, 60), rng.uniform(-2, 4)};
    const auto px = project_point(rig, cam, p);
    if (!px) {
      continue;
    }
    const PixelRay ray = pixel_to_ray(rig, cam, px->u, px->v);
    const double dz = (rig[cam].extrinsics.rotation * ray.direction).z();
    worst = std::max(worst, (ray.at(px->depth / dz) - p).norm());
    ++done;
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-6 && secs < 1.0, "10000 points, max error " + num(worst) + " m, " + num(secs) + " s"};
}

Outcome unprojection_oracle()
{
  CounterRng rng(2, Stream::kTest);
  const auto start = Clock::now();
  int mismatches = 0;
  for (int scene = 0; scene < 50; ++scene) {
    const int ncam = 1 + static_cast<int>(rng.below(3));
    const CameraRig rig = testing::random_rig(rng, ncam, 320, 240);
    std::vector<FeatureImage> feats;
    const int stride = 1 + static_cast<int>(rng.below(4));
    const int channels = 1 + static_cast<int>(rng.below(8));
    for (int c = 0; c < ncam; ++c) {
      feats.push_back(testing::random_features(rng, static_cast<std::size_t>(c), 240 / stride, 320 / stride, channels));
    }
    const VoxelGridSpec g = VoxelGridSpec::centered(4 + static_cast<int>(rng.below(13)),
      4 + static_cast<int>(rng.below(13)), 1 + static_cast<int>(rng.below(4)), rng.uniform(0.5, 3.0),
      rng.uniform(0.5, 3.0), rng.uniform(0.5, 2.0));
    const Fusion fusion = static_cast<Fusion>(scene % 3);
    const Sampling sampling = (scene / 3) % 2 == 0 ? Sampling::kBilinear : Sampling::kNearest;
    const VoxelGrid v = unproject(rig, feats, g, {fusion, sampling, 1});
    const oracle::Result o = oracle::unproject(rig, feats, g, fusion, sampling);
    const bool same = v.data.size() == o.data.size() &&
                      std::memcmp(v.data.data(), o.data.data(), v.data.size() * sizeof(float)) == 0 &&
                      std::equal(v.hit_count.begin(), v.hit_count.end(), o.hits.begin());
    mismatches += same ? 0 : 1;
  }
  const double secs = seconds_since(start);
  return {mismatches == 0 && secs < 10.0,
    "50 scenes, " + std::to_string(mismatches) + " mismatching, " + num(secs) + " s"};
}

Outcome uniform_ray()
{
  CounterRng rng(3, Stream::kTest);
  const CameraRig rig = testing::random_rig(rng, 1, 320, 240);
  const FeatureImage f = testing::random_features(rng, 0, 12, 16, 4);
  const VoxelGridSpec g = VoxelGridSpec::centered(96, 96, 8, 0.5, 0.5, 0.5);
  const VoxelGrid v = unproject(rig, std::vector<FeatureImage>{f}, g, {Fusion::kAverage, Sampling::kNearest, 1});
  Camera feat = rig[0];
  feat.intrinsics = feat.intrinsics.rescaled(f.width, f.height);

  // Group voxels by the feature pixel their center projects into.
  std::map<std::pair<int, int>, std::vector<std::array<int, 3>>> rays;
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      for (int k = 0; k < g.nz; ++k) {
        const auto px = project_point(feat, g.voxel_center(i, j, k));
        if (px) {
          rays[{static_cast<int>(px->v), static_cast<int>(px->u)}].push_back({i, j, k});
        }
      }
    }
  }
  std::vector<std::pair<int, int>> pixels;
  for (const auto & [px, cells] : rays) {
    if (cells.size() >= 2) {
      pixels.push_back(px);
    }
  }
  if (pixels.size() < 100) {
    return {false, "only " + std::to_string(pixels.size()) + " pixels with 2+ voxels"};
  }
  int violations = 0;
  std::size_t voxels = 0;
  for (int n = 0; n < 100; ++n) {
    const auto [row, col] = pixels[rng.below(pixels.size())];
    for (const auto & [i, j, k] : rays[{row, col}]) {
      ++voxels;
      for (int c = 0; c < f.channels; ++c) {
        violations += v.at(i, j, k, c) == f.at(row, col, c) ? 0 : 1;
      }
    }
  }
  return {violations == 0,
    "100 rays, " + std::to_string(voxels) + " voxels, " + std::to_string(violations) + " violations"};
}

Outcome s2c_bijection()
{
  CounterRng rng(4, Stream::kTest);
  int failures = 0;
  for (int n = 0; n < 100; ++n) {
    const VoxelGridSpec g = VoxelGridSpec::centered(1 + static_cast<int>(rng.below(20)),
      1 + static_cast<int>(rng.below(20)), 1 + static_cast<int>(rng.below(12)), 0.5, 0.5, 0.5);
    VoxelGrid v(g, 1 + static_cast<int>(rng.below(6)));
    for (float & x : v.data) {
      x = static_cast<float>(rng.normal());
    }
    for (auto & h : v.hit_count) {
      h = static_cast<std::int32_t>(rng.below(7));
    }
    const BevGrid b = spatial_to_channel(v);
    const VoxelGrid back = channel_to_spatial(b, g, v.channels, v.hit_count);
    std::vector<float> a = v.data;
    std::vector<float> m = b.data;
    std::sort(a.begin(), a.end());
    std::sort(m.begin(), m.end());
    const bool ok = back.data == v.data && back.hit_count == v.hit_count && a == m &&
                    b.channels == g.nz * v.channels;
    failures += ok ? 0 : 1;
  }
  return {failures == 0, "100 grids, " + std::to_string(failures) + " failures"};
}

Outcome centerness()
{
  const BevGrid w = bev_centerness(101, 101, 50.0, 50.0);
  const auto [lo, hi] = std::minmax_element(w.data.begin(), w.data.end());
  bool ok = *lo == 1.0F && w.at(50, 50, 0) == 1.0F && *hi == 2.0F && w.at(0, 0, 0) == 2.0F &&
            w.at(100, 100, 0) == 2.0F && w.at(0, 100, 0) == 2.0F;
  const double scalar = 1.0 + std::sqrt((50.0 * 50.0 + 0.0) / (50.0 * 50.0 + 50.0 * 50.0));
  const double mid = w.at(100, 50, 0);
  ok = ok && std::abs(mid - scalar) <= 1e-5 && std::abs(mid - 1.70711) <= 1e-5;

  CounterRng rng(5, Stream::kTest);
  int violations = 0;
  for (int n = 0; n < 1000; ++n) {
    const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double r1 = rng.uniform(0.0, 49.0);
    const double r2 = rng.uniform(r1 + 1.5, 50.0 + 1.5);
    const int i1 = static_cast<int>(std::lround(50.0 + r1 * std::cos(ang)));
    const int j1 = static_cast<int>(std::lround(50.0 + r1 * std::sin(ang)));
    const int i2 = std::clamp(static_cast<int>(std::lround(50.0 + r2 * std::cos(ang))), 0, 100);
    const int j2 = std::clamp(static_cast<int>(std::lround(50.0 + r2 * std::sin(ang))), 0, 100);
    const double d1 = std::hypot(i1 - 50.0, j1 - 50.0);
    const double d2 = std::hypot(i2 - 50.0, j2 - 50.0);
    if (d2 > d1 && !(w.at(i2, j2, 0) > w.at(i1, j1, 0))) {
      ++violations;
    }
    if (d2 == d1 && w.at(i2, j2, 0) != w.at(i1, j1, 0)) {
      ++violations;
    }
  }
  ok = ok && violations == 0;
  return {ok, "min " + num(*lo) + " max " + num(*hi) + " midpoint " + num(mid, "%.6f") + ", " +
                std::to_string(violations) + " monotonicity violations in 1000 pairs"};
}

Outcome rotated_iou()
{
  CounterRng rng(6, Stream::kTest);
  double worst_mc = 0.0;
  double worst_sym = 0.0;
  double worst_rot = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const Box3D a = testing::random_box(rng, n % 10 == 0 ? 6.0 : 1.5);
    const Box3D b = testing::random_box(rng, n % 10 == 0 ? 6.0 : 1.5);
    const double iou = bev_iou(a, b);
    worst_mc = std::max(worst_mc, std::abs(iou - oracle::monte_carlo_iou(a, b, 1000, 10000 + n)));
    worst_sym = std::max(worst_sym, std::abs(iou - bev_iou(b, a)));
    const double ang = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double px = rng.uniform(-10, 10);
    const double py = rng.uniform(-10, 10);
    auto turn = [&](Box3D box) {
      const double dx = box.x - px;
      const double dy = box.y - py;
      box.x = px + std::cos(ang) * dx - std::sin(ang) * dy;
      box.y = py + std::sin(ang) * dx + std::cos(ang) * dy;
      box.theta = normalize_angle(box.theta + ang);
      return box;
    };
    worst_rot = std::max(worst_rot, std::abs(iou - bev_iou(turn(a), turn(b))));
  }
  return {worst_mc <= 1e-3 && worst_sym <= 1e-9 && worst_rot <= 1e-9,
    "1000 pairs, max |iou - mc| " + num(worst_mc) + ", symmetry " + num(worst_sym) + ", rotation " +
      num(worst_rot)};
}

Outcome nms()
{
  const NmsOptions defaults;
  bool ok = defaults.iou_threshold == 0.2 && defaults.score_threshold == 0.05 && defaults.max_out == 500;
  CounterRng rng(7, Stream::kTest);
  int mismatches = 0;
  int antichain = 0;
  int idempotence = 0;
  for (int set = 0; set < 200; ++set) {
    std::vector<Box3D> boxes;
    for (int k = 0; k < 50; ++k) {
      boxes.push_back(testing::random_box(rng, 5.0, 3));
    }
    if (oracle::nms(boxes, 0.2, 0.05, 500) != rotated_nms_indices(boxes)) {
      ++mismatches;
    }
    const std::vector<Box3D> kept = rotated_nms(boxes);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        if (kept[i].class_id == kept[j].class_id && bev_iou(kept[i], kept[j]) > 0.2) {
          ++antichain;
        }
      }
    }
    idempotence += rotated_nms(kept) == kept ? 0 : 1;
  }
  const bool defaults_ok = ok;
  ok = ok && mismatches == 0 && antichain == 0 && idempotence == 0;
  return {ok, "200 sets of 50, " + std::to_string(mismatches) + " oracle mismatches, " + std::to_string(antichain) +
                " antichain and " + std::to_string(idempotence) + " idempotence violations, defaults " +
                (defaults_ok ? "0.2/0.05/500" : "wrong")};
}

struct AssignInstance
{
  std::vector<Box3D> anchors;
  std::vector<Box3D> gts;
  AnchorPrediction pred;
};

AssignInstance random_assign_instance(CounterRng & rng)
{
  AssignInstance in;
  const std::size_t na = 1 + rng.below(200);
  const std::size_t ng = 1 + rng.below(10);
  for (std::size_t a = 0; a < na; ++a) {
    in.anchors.push_back(testing::random_box(rng, 3.0));
  }
  for (std::size_t g = 0; g < ng; ++g) {
    in.gts.push_back(testing::random_box(rng, 3.0, 3));
  }
  in.pred.num_classes = 3;
  for (std::size_t k = 0; k < na * 3; ++k) {
    in.pred.cls_scores.push_back(rng.uniform());
  }
  if (rng.below(2) == 1) {
    for (const Box3D & a : in.anchors) {
      Box3D b = a;
      b.x += rng.normal(0.0, 0.3);
      b.theta = normalize_angle(b.theta + rng.normal(0.0, 0.2));
      in.pred.loc_boxes.push_back(b);
    }
  }
  return in;
}

Outcome assignment()
{
  CounterRng rng(8, Stream::kTest);
  int fixed_bad = 0;
  int dynamic_bad = 0;
  for (int n = 0; n < 100; ++n) {
    const AssignInstance in = random_assign_instance(rng);
    const double pos = rng.uniform(0.3, 0.7);
    const double neg = rng.uniform(0.05, pos);
    const auto fixed = oracle::from_result(assign_fixed_iou(in.anchors, in.gts, pos, neg), in.anchors.size());
    const auto want = oracle::fixed(in.anchors, in.gts, pos, neg);
    fixed_bad += fixed.label == want.label && fixed.gt == want.gt ? 0 : 1;

    DynamicAssignOptions o;
    o.bag_size = 1 + rng.below(50);
    o.score_weight = rng.uniform();
    const AssignmentResult r = assign_dynamic(in.anchors, in.gts, in.pred, o);
    const auto got = oracle::from_result(r, in.anchors.size());
    const auto d = oracle::dynamic(in.anchors, in.gts, in.pred, o);
    dynamic_bad += got.label == d.assignment.label && got.gt == d.assignment.gt && r.per_gt_bag == d.bags ? 0 : 1;
  }
  int invariance_bad = 0;
  for (int n = 0; n < 100; ++n) {
    AssignInstance in = random_assign_instance(rng);
    DynamicAssignOptions o;
    o.score_weight = 1.0;
    const auto before = assign_dynamic(in.anchors, in.gts, in.pred, o).positive;
    const double power = rng.uniform(0.2, 5.0);
    const double scale = rng.uniform(0.1, 1.0);
    for (double & s : in.pred.cls_scores) {
      s = scale * std::pow(s, power);
    }
    invariance_bad += assign_dynamic(in.anchors, in.gts, in.pred, o).positive == before ? 0 : 1;
  }
  return {fixed_bad == 0 && dynamic_bad == 0 && invariance_bad == 0,
    "100 instances: fixed " + std::to_string(fixed_bad) + ", dynamic " + std::to_string(dynamic_bad) +
      " mismatches; 100 rescaling trials, " + std::to_string(invariance_bad) + " changed"};
}

Outcome losses()
{
  GradCheckConfig config;
  config.trials = 100;
  config.step = 1e-5;
  config.tolerance = 1e-4;
  bool ok = true;
  std::string detail;
  for (const GradCheckRow & row : run_loss_gradient_checks(config)) {
    ok = ok && row.pass() && row.trials == 100;
    detail += row.loss + " " + num(row.max_relative_error) + ", ";
  }
  const double focal = focal_loss(0.5, 1, 0.25, 2.0);
  DetLossTerms det;
  det.cls = 2.0;
  det.n_pos = 2;
  const double det3d = total_loss(det, {}, {}).det3d;
  ok = ok && std::abs(focal - 0.043322) <= 1e-6 && det3d == 1.0;
  return {ok, "max rel err: " + detail + "focal " + num(focal, "%.7f") + ", det3d " + num(det3d, "%.17g")};
}

Outcome noise_sweep_shape()
{
  const auto start = Clock::now();
  const VoxelGridSpec grid = VoxelGridSpec::centered(160, 160, 4, 0.5, 0.5, 0.5);
  std::vector<SyntheticScene> scenes;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    scenes.push_back(generate_scene(seed, 6, 20, grid));
  }
  SweepConfig config;
  config.levels = {0.0, 1e-3, 1e-2, 2e-1};
  config.seed = 1;
  config.threads = 0;
  const std::vector<SweepPoint> pts = noise_sweep(scenes, config);
  const double secs = seconds_since(start);
  const SweepPoint & clean = pts[0];
  const SweepPoint & tiny = pts[1];
  const SweepPoint & mid = pts[2];
  const SweepPoint & big = pts[3];
  const bool ok = clean.seg_iou - tiny.seg_iou < 0.02 && clean.map - tiny.map < 0.02 &&
                  big.seg_iou < mid.seg_iou && big.map < mid.map && secs < 120.0;
  std::string detail = "20 scenes;";
  for (const SweepPoint & p : pts) {
    detail += " sigma " + num(p.sigma) + ": seg " + num(p.seg_iou, "%.4f") + " map " + num(p.map, "%.4f") + ";";
  }
  return {ok, detail + " " + num(secs) + " s"};
}

Outcome cost_model()
{
  const VoxelGridSpec g;
  VoxelGridSpec g2 = g;
  g2.nx *= 2;
  bool ok = true;
  std::uint64_t naive = 0;
  std::uint64_t s2c = 0;
  for (int layers = 1; layers <= 8; ++layers) {
    for (EncoderMode mode : {EncoderMode::kNaive3d, EncoderMode::kS2c2d}) {
      ok = ok && encoder_cost(g2, 64, layers, mode, 64).flops == 2 * encoder_cost(g, 64, layers, mode, 64).flops;
    }
    const auto n = encoder_cost(g, 64, layers, EncoderMode::kNaive3d, 64).flops;
    const auto s = encoder_cost(g, 64, layers, EncoderMode::kS2c2d, 64).flops;
    ok = ok && s < n;
    if (layers == 3) {
      naive = n;
      s2c = s;
    }
  }
  return {ok, "layers 1..8; at 3 layers naive3d " + num(static_cast<double>(naive), "%.4e") + " vs s2c2d " +
                num(static_cast<double>(s2c), "%.4e") + " flops; 2x on doubled nx"};
}

std::vector<std::pair<std::string, std::string>> snapshot(const fs::path & dir)
{
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto & entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      std::ifstream in(entry.path(), std::ios::binary);
      files.emplace_back(fs::relative(entry.path(), dir).generic_string(),
        std::string(std::istreambuf_iterator<char>(in), {}));
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

Outcome determinism(const std::string & exe, const fs::path & scratch)
{
  if (exe.empty()) {
    return {false, "no bevkit executable given"};
  }
  const fs::path a = scratch / "selftest_a";
  const fs::path b = scratch / "selftest_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const std::string ca = "\"" + exe + "\" selftest --out \"" + a.string() + "\" > /dev/null";
  const std::string cb = "\"" + exe + "\" selftest --out \"" + b.string() + "\" > /dev/null";
  const int ra = std::system(ca.c_str());
  const int rb = std::system(cb.c_str());
  if (ra != 0 || rb != 0) {
    return {false, "selftest exited with " + std::to_string(ra) + " / " + std::to_string(rb)};
  }
  const auto sa = snapshot(a);
  const auto sb = snapshot(b);
  std::size_t bytes = 0;
  for (const auto & f : sa) {
    bytes += f.second.size();
  }
  return {!sa.empty() && sa == sb,
    std::to_string(sa.size()) + " files, " + std::to_string(bytes) + " bytes, " + (sa == sb ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char ** argv)
{
  const std::string exe = argc > 1 ? argv[1] : "";
  const fs::path scratch = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "bevkit_acceptance";
  fs::create_directories(scratch);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
    {"projection round-trip", projection_round_trip},
    {"unprojection oracle", unprojection_oracle},
    {"uniform-ray fill", uniform_ray},
    {"S2C bijection", s2c_bijection},
    {"centerness", centerness},
    {"rotated IoU", rotated_iou},
    {"NMS", nms},
    {"assignment", assignment},
    {"losses", losses},
    {"noise sweep", noise_sweep_shape},
    {"cost model", cost_model},
    {"determinism", [&] { return determinism(exe, scratch); }},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o{false, ""};
    try {
      o = criteria[k].second();
    } catch (const std::exception & e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
