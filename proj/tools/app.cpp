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

#include "app.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "bevkit/gradcheck.hpp"
#include "bevkit/io.hpp"
#include "bevkit/plot.hpp"
#include "bevkit/sweep.hpp"
#include "bevkit/synthetic_scene.hpp"

namespace bevkit::app
{

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code)
{
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kOutOfRange:
      return kExitUsage;
    case ErrorCode::kFileNotFound:
      return kExitNotFound;
    case ErrorCode::kMalformedInput:
      return kExitMalformed;
    case ErrorCode::kShapeMismatch:
      return kExitShape;
    case ErrorCode::kIo:
      return kExitIo;
  }
  return kExitInternal;
}

namespace
{

double parse_number(std::string_view s)
{
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc{} && ptr == s.data() + s.size() && !s.empty(), ErrorCode::kInvalidArgument,
    "not a number: '" + std::string(s) + "'");
  return v;
}

int parse_count(std::string_view s)
{
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc{} && ptr == s.data() + s.size() && v > 0, ErrorCode::kInvalidArgument,
    "not a positive integer: '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t pos = s.find(sep); pos != std::string_view::npos; pos = s.find(sep, start)) {
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  parts.push_back(s.substr(start));
  return parts;
}

unsigned resolve_threads(unsigned requested)
{
  return requested == 0 ? std::max(1U, std::thread::hardware_concurrency()) : requested;
}

void require_file(const fs::path & p, const char * what)
{
  require(!p.empty(), ErrorCode::kInvalidArgument, std::string("missing --") + what);
  require(fs::exists(p), ErrorCode::kFileNotFound, std::string(what) + " not found: " + p.string());
}

void ensure_parent(const fs::path & p)
{
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    require(!ec, ErrorCode::kIo, "cannot create " + p.parent_path().string());
  }
}

void emit(const fs::path & path, const std::string & text, std::ostream & out)
{
  if (path.empty()) {
    out << text;
  } else {
    ensure_parent(path);
    write_text_file(path, text);
  }
}

std::string fixed(double v, int digits = 4)
{
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

int cmd_gen(const RunConfig & c, std::ostream & out)
{
  require(!c.out.empty(), ErrorCode::kInvalidArgument, "missing --out");
  const SyntheticScene scene = generate_scene(c.seed, c.cameras, c.boxes, c.grid);
  save_scene(c.out, scene);
  out << "scene seed " << c.seed << ": " << scene.rig.size() << " cameras, " << scene.gt_boxes.size()
      << " boxes, grid " << c.grid.nx << "x" << c.grid.ny << "x" << c.grid.nz << " -> " << c.out.string() << "\n";
  return kExitOk;
}

int cmd_project(const RunConfig & c, std::ostream & out)
{
  require_file(c.rig, "rig");
  require_file(c.features, "features");
  require(!c.out.empty(), ErrorCode::kInvalidArgument, "missing --out");
  const CameraRig rig = load_rig(c.rig);
  const std::vector<FeatureImage> features = load_feature_dir(c.features);
  UnprojectOptions opts{c.fusion, c.sampling, resolve_threads(c.threads)};
  const VoxelGrid voxels = unproject(rig, features, c.grid, opts);
  ensure_parent(c.out);
  save_voxel_grid(c.out, voxels);
  if (!c.bev_out.empty()) {
    ensure_parent(c.bev_out);
    save_bev_grid(c.bev_out, spatial_to_channel(voxels), &c.grid);
  }
  const auto visible = std::count_if(voxels.hit_count.begin(), voxels.hit_count.end(), [](auto h) { return h > 0; });
  out << "voxels " << voxels.hit_count.size() << ", visible " << visible << ", channels " << voxels.channels
      << " -> " << c.out.string() << "\n";
  return kExitOk;
}

BevGrid grid_centerness(const VoxelGridSpec & g)
{
  // Ego origin in cell-index coordinates.
  const double cx = std::clamp(-g.origin.x() / g.dx - 0.5, 0.0, g.nx - 1.0);
  const double cy = std::clamp(-g.origin.y() / g.dy - 0.5, 0.0, g.ny - 1.0);
  return bev_centerness(g.nx, g.ny, cx, cy);
}

int cmd_centerness(const RunConfig & c, std::ostream & out)
{
  require(!c.out.empty(), ErrorCode::kInvalidArgument, "missing --out");
  std::error_code ec;
  fs::create_directories(c.out, ec);
  require(!ec, ErrorCode::kIo, "cannot create " + c.out.string());
  const BevGrid w = grid_centerness(c.grid);
  save_bev_grid(c.out / "centerness.bin", w, &c.grid);
  write_pgm(c.out / "centerness.pgm", w, 0, 1.0, 2.0);
  const auto [lo, hi] = std::minmax_element(w.data.begin(), w.data.end());
  out << "centerness " << w.nx << "x" << w.ny << " min " << fixed(*lo, 6) << " max " << fixed(*hi, 6) << "\n";
  return kExitOk;
}

int cmd_assign(const RunConfig & c, std::ostream & out)
{
  require_file(c.anchors, "anchors");
  require_file(c.gts, "gts");
  const auto anchors = load_boxes(c.anchors);
  const auto gts = load_boxes(c.gts);
  AssignmentResult result;
  if (c.dynamic_assign) {
    require_file(c.preds, "preds");
    std::size_t rows = 0;
    std::size_t cols = 0;
    AnchorPrediction pred;
    pred.cls_scores = load_matrix(c.preds, rows, cols);
    require(rows == anchors.size(), ErrorCode::kShapeMismatch,
      "preds has " + std::to_string(rows) + " rows for " + std::to_string(anchors.size()) + " anchors");
    pred.num_classes = cols;
    result = assign_dynamic(anchors, gts, pred, c.dynamic);
  } else {
    result = assign_fixed_iou(anchors, gts, c.pos_iou, c.neg_iou);
  }
  emit(c.out, assignment_to_csv(result, anchors.size()), out);
  if (!c.out.empty()) {
    out << "positive " << result.positive.size() << ", negative " << result.negative.size() << ", ignored "
        << result.ignored.size() << "\n";
  }
  return kExitOk;
}

int cmd_nms(const RunConfig & c, std::ostream & out)
{
  require_file(c.in, "in");
  const auto boxes = load_boxes(c.in);
  const auto kept = rotated_nms(boxes, c.nms);
  emit(c.out, boxes_to_csv(kept), out);
  if (!c.out.empty()) {
    out << "kept " << kept.size() << " of " << boxes.size() << "\n";
  }
  return kExitOk;
}

int cmd_eval(const RunConfig & c, std::ostream & out)
{
  const bool det = !c.preds.empty() || !c.gts.empty();
  const bool seg = !c.map_pred.empty() || !c.map_gt.empty();
  require(det || seg, ErrorCode::kInvalidArgument, "eval needs --preds/--gts and/or --map-pred/--map-gt");
  std::string csv = "metric,class_id,threshold,value\n";
  std::ostringstream table;
  if (seg) {
    require_file(c.map_pred, "map-pred");
    require_file(c.map_gt, "map-gt");
    const auto ious = seg_iou_per_class(load_bev_grid(c.map_pred), load_bev_grid(c.map_gt));
    double mean = 0.0;
    for (std::size_t k = 0; k < ious.size(); ++k) {
      table << "seg_iou  channel " << k << "  " << fixed(ious[k]) << "\n";
      csv += "seg_iou," + std::to_string(k) + ",," + format_double(ious[k]) + "\n";
      mean += ious[k] / static_cast<double>(ious.size());
    }
    table << "seg_miou            " << fixed(mean) << "\n";
    csv += "seg_miou,,," + format_double(mean) + "\n";
  }
  if (det) {
    require_file(c.preds, "preds");
    require_file(c.gts, "gts");
    const auto preds = load_boxes(c.preds);
    const auto gts = load_boxes(c.gts);
    const EvalResult r = center_distance_ap(preds, gts, c.thresholds);
    for (std::size_t k = 0; k < r.class_ids.size(); ++k) {
      table << "ap  class " << r.class_ids[k];
      for (std::size_t t = 0; t < r.thresholds.size(); ++t) {
        table << "  @" << format_double(r.thresholds[t]) << "m " << fixed(r.ap[k][t]);
        csv += "ap," + std::to_string(r.class_ids[k]) + "," + format_double(r.thresholds[t]) + "," +
               format_double(r.ap[k][t]) + "\n";
      }
      table << "\n";
    }
    table << "map                 " << fixed(r.map) << "\n";
    csv += "map,,," + format_double(r.map) + "\n";
  }
  out << table.str();
  if (!c.out.empty()) {
    ensure_parent(c.out);
    write_text_file(c.out, csv);
  }
  return kExitOk;
}

int cmd_bench(const RunConfig & c, std::ostream & out)
{
  out << "grid " << c.grid.nx << "x" << c.grid.ny << "x" << c.grid.nz << ", channels " << c.channels << ", layers "
      << c.layers << ", conv channels " << c.conv_channels << "\n";
  out << "mode      params        flops\n";
  EncoderCost naive;
  EncoderCost s2c;
  if (c.bench_naive) {
    naive = encoder_cost(c.grid, c.channels, c.layers, EncoderMode::kNaive3d, c.conv_channels);
    out << "naive3d   " << std::setw(12) << naive.params << "  " << naive.flops << "\n";
  }
  if (c.bench_s2c) {
    s2c = encoder_cost(c.grid, c.channels, c.layers, EncoderMode::kS2c2d, c.conv_channels);
    out << "s2c2d     " << std::setw(12) << s2c.params << "  " << s2c.flops << "\n";
  }
  const LiftingCost lift = lifting_cost(c.cameras, c.feat_height, c.feat_width, c.channels, c.depth_bins);
  out << "image features kept (uniform depth): " << lift.uniform_elements << "\n";
  out << "image features kept (" << c.depth_bins << " depth bins): " << lift.lifted_elements << "\n";
  if (c.bench_naive && c.bench_s2c && !(s2c.flops < naive.flops)) {
    out << "FAIL: s2c2d is not cheaper than naive3d\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

int cmd_noise_sweep(const RunConfig & c, std::ostream & out)
{
  std::vector<SyntheticScene> scenes;
  for (const fs::path & p : c.scenes) {
    require(fs::is_directory(p), ErrorCode::kFileNotFound, "scene not found: " + p.string());
  }
  for (const fs::path & p : c.scenes) {
    scenes.push_back(load_scene(p));
  }
  for (int s = 0; s < c.generated_scenes; ++s) {
    scenes.push_back(generate_scene(c.seed + static_cast<std::uint64_t>(s), c.cameras, c.boxes, c.grid));
  }
  require(!scenes.empty(), ErrorCode::kInvalidArgument, "noise-sweep needs --scene or --generate");
  SweepConfig sc;
  sc.levels = c.levels;
  sc.trials = c.trials;
  sc.seed = c.seed;
  sc.threads = resolve_threads(c.threads);
  sc.perturb_rotation = c.perturb_rotation;
  sc.perturb_translation = c.perturb_translation;
  const auto points = noise_sweep(scenes, sc);

  std::string csv = "sigma,seg_iou,map,runs\n";
  for (const SweepPoint & p : points) {
    csv += format_double(p.sigma) + "," + format_double(p.seg_iou) + "," + format_double(p.map) + "," +
           std::to_string(p.runs) + "\n";
  }
  emit(c.out, csv, out);
  if (!c.out.empty()) {
    out << "sigma       seg_iou  map\n";
    for (const SweepPoint & p : points) {
      out << std::left << std::setw(10) << format_double(p.sigma) << "  " << fixed(p.seg_iou) << "   "
          << fixed(p.map) << "\n";
    }
  }
  if (!c.plot_dir.empty()) {
    PlotData plot;
    plot.sweep = points;
    plot.map_mask = scenes.front().map_mask;
    plot.centerness = grid_centerness(scenes.front().grid);
    emit_plot_data(c.plot_dir, plot);
  }
  return kExitOk;
}

int cmd_loss_check(const RunConfig & c, std::ostream & out)
{
  GradCheckConfig gc;
  gc.seed = c.seed;
  gc.trials = c.loss_trials;
  const auto rows = run_loss_gradient_checks(gc);
  bool pass = true;
  out << "loss                 trials  components  max_rel_err   result\n";
  for (const GradCheckRow & r : rows) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-20s %6zu  %10zu  %11.3e   %s\n", r.loss.c_str(), r.trials, r.components,
      r.max_relative_error, r.pass() ? "PASS" : "FAIL");
    out << line;
    pass = pass && r.pass();
  }
  return pass ? kExitOk : kExitCheckFailed;
}

int cmd_selftest(const RunConfig & c, std::ostream & out)
{
  const fs::path dir = c.out.empty() ? fs::path("selftest_out") : c.out;
  const SelftestReport report = run_selftest(dir, resolve_threads(c.threads));
  for (const std::string & line : report.lines) {
    out << line << "\n";
  }
  out << (report.pass ? "selftest passed" : "selftest FAILED") << "; artifacts in " << dir.string() << "\n";
  return report.pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

VoxelGridSpec parse_grid(const std::string & dims, const std::string & voxel_size)
{
  const auto d = split(dims, 'x');
  require(d.size() == 3, ErrorCode::kInvalidArgument, "grid must look like 400x400x12");
  double sx = 0.25;
  double sy = 0.25;
  double sz = 0.5;
  if (!voxel_size.empty()) {
    const auto v = split(voxel_size, ',');
    require(v.size() == 3, ErrorCode::kInvalidArgument, "voxel size must look like 0.25,0.25,0.5");
    sx = parse_number(v[0]);
    sy = parse_number(v[1]);
    sz = parse_number(v[2]);
  }
  const VoxelGridSpec g = VoxelGridSpec::centered(parse_count(d[0]), parse_count(d[1]), parse_count(d[2]), sx, sy, sz);
  g.validate();
  return g;
}

std::vector<double> parse_number_list(const std::string & text)
{
  std::vector<double> values;
  for (auto part : split(text, ',')) {
    values.push_back(parse_number(part));
  }
  return values;
}

int run_pipeline(const RunConfig & config, std::ostream & out, std::ostream & err)
{
  try {
    switch (config.command) {
      case Command::kGen:
        return cmd_gen(config, out);
      case Command::kProject:
        return cmd_project(config, out);
      case Command::kCenterness:
        return cmd_centerness(config, out);
      case Command::kAssign:
        return cmd_assign(config, out);
      case Command::kNms:
        return cmd_nms(config, out);
      case Command::kEval:
        return cmd_eval(config, out);
      case Command::kBench:
        return cmd_bench(config, out);
      case Command::kNoiseSweep:
        return cmd_noise_sweep(config, out);
      case Command::kLossCheck:
        return cmd_loss_check(config, out);
      case Command::kSelftest:
        return cmd_selftest(config, out);
    }
  } catch (const Error & e) {
    err << "bevkit: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error & e) {
    err << "bevkit: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception & e) {
    err << "bevkit: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace bevkit::app
