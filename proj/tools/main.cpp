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

#include <cstdint>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "app.hpp"

namespace
{

using bevkit::app::Command;
using bevkit::app::RunConfig;

struct GridArgs
{
  std::string dims = "400x400x12";
  std::string voxel;
};

void add_grid(CLI::App * cmd, GridArgs & g)
{
  cmd->add_option("--grid", g.dims, "Voxel counts as NXxNYxNZ")->capture_default_str();
  cmd->add_option("--voxel", g.voxel, "Voxel size in meters as DX,DY,DZ (default 0.25,0.25,0.5)");
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"bevkit: multi-camera BEV geometry toolkit"};
  app.require_subcommand(1);
  RunConfig cfg;
  GridArgs grid;
  std::string fusion = "average";
  std::string sampling = "bilinear";
  std::string assign_mode = "fixed";
  std::string bench_mode = "both";
  std::string levels;
  std::string thresholds;
  bool rotation_only = false;
  bool translation_only = false;

  app.add_option("--threads", cfg.threads, "Worker threads (0 = all cores; 1 = reference path)")
    ->envname("BEVKIT_THREADS");

  std::map<std::string, Command> commands;
  auto sub = [&](const char * name, const char * help, Command command) {
    CLI::App * s = app.add_subcommand(name, help);
    commands[name] = command;
    return s;
  };

  auto * gen = sub("gen", "Generate a synthetic scene bundle", Command::kGen);
  gen->add_option("--seed", cfg.seed)->capture_default_str();
  gen->add_option("--cameras", cfg.cameras)->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--boxes", cfg.boxes)->capture_default_str()->check(CLI::NonNegativeNumber);
  gen->add_option("--out", cfg.out, "Output scene directory")->required();
  add_grid(gen, grid);

  auto * project = sub("project", "Unproject feature images into a voxel grid", Command::kProject);
  project->add_option("--rig", cfg.rig, "Rig JSON")->required();
  project->add_option("--features", cfg.features, "Directory of feature tensors")->required();
  project->add_option("--out", cfg.out, "Voxel tensor output")->required();
  project->add_option("--bev", cfg.bev_out, "Also write the channel-stacked BEV tensor");
  project->add_option("--fusion", fusion)
    ->capture_default_str()
    ->check(CLI::IsMember({"average", "sum", "first"}));
  project->add_option("--sampling", sampling)->capture_default_str()->check(CLI::IsMember({"bilinear", "nearest"}));
  add_grid(project, grid);

  auto * centerness = sub("centerness", "Write the BEV centerness weight map", Command::kCenterness);
  centerness->add_option("--out", cfg.out, "Output directory")->required();
  add_grid(centerness, grid);

  auto * assign = sub("assign", "Assign anchors to ground-truth boxes", Command::kAssign);
  assign->add_option("--mode", assign_mode)->capture_default_str()->check(CLI::IsMember({"fixed", "dynamic"}));
  assign->add_option("--anchors", cfg.anchors, "Anchor box CSV")->required();
  assign->add_option("--gts", cfg.gts, "Ground-truth box CSV")->required();
  assign->add_option("--preds", cfg.preds, "Anchor class scores (anchors x classes tensor), dynamic mode");
  assign->add_option("--pos-iou", cfg.pos_iou)->capture_default_str();
  assign->add_option("--neg-iou", cfg.neg_iou)->capture_default_str();
  assign->add_option("--bag", cfg.dynamic.bag_size)->capture_default_str();
  assign->add_option("--score-weight", cfg.dynamic.score_weight)->capture_default_str();
  assign->add_option("--ignore-iou", cfg.dynamic.ignore_iou)->capture_default_str();
  assign->add_option("--out", cfg.out, "Assignment CSV (default stdout)");

  auto * nms = sub("nms", "Rotated non-maximum suppression", Command::kNms);
  nms->add_option("--in", cfg.in, "Box CSV")->required();
  nms->add_option("--iou", cfg.nms.iou_threshold)->capture_default_str();
  nms->add_option("--score", cfg.nms.score_threshold)->capture_default_str();
  nms->add_option("--max", cfg.nms.max_out)->capture_default_str();
  nms->add_option("--out", cfg.out, "Kept boxes CSV (default stdout)");

  auto * eval = sub("eval", "Segmentation IoU and center-distance AP", Command::kEval);
  auto * preds_opt = eval->add_option("--preds", cfg.preds, "Predicted box CSV");
  auto * gts_opt = eval->add_option("--gts", cfg.gts, "Ground-truth box CSV");
  auto * mp_opt = eval->add_option("--map-pred", cfg.map_pred, "Predicted BEV mask tensor");
  auto * mg_opt = eval->add_option("--map-gt", cfg.map_gt, "Ground-truth BEV mask tensor");
  preds_opt->needs(gts_opt);
  gts_opt->needs(preds_opt);
  mp_opt->needs(mg_opt);
  mg_opt->needs(mp_opt);
  eval->add_option("--thresholds", thresholds, "Center distance thresholds in meters (default 0.5,1,2,4)");
  eval->add_option("--out", cfg.out, "Metric CSV");

  auto * bench = sub("bench", "Encoder parameter and FLOP counts", Command::kBench);
  add_grid(bench, grid);
  bench->add_option("--layers", cfg.layers)->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--mode", bench_mode)->capture_default_str()->check(CLI::IsMember({"naive3d", "s2c2d", "both"}));
  bench->add_option("--channels", cfg.channels, "Voxel feature channels")->capture_default_str();
  bench->add_option("--conv-channels", cfg.conv_channels)->capture_default_str();
  bench->add_option("--cameras", cfg.cameras)->capture_default_str();
  bench->add_option("--depth-bins", cfg.depth_bins)->capture_default_str();

  auto * sweep = sub("noise-sweep", "Extrinsic noise sweep over scenes", Command::kNoiseSweep);
  auto * scene_opt = sweep->add_option("--scene", cfg.scenes, "Scene directory (repeatable)");
  auto * gen_opt = sweep->add_option("--generate", cfg.generated_scenes, "Generate N scenes from --seed instead");
  scene_opt->excludes(gen_opt);
  sweep->add_option("--levels", levels, "Comma-separated sigmas (default 0,1e-3,1e-2,5e-2,1e-1,2e-1)");
  sweep->add_option("--trials", cfg.trials, "Noise draws per scene and level")->capture_default_str();
  sweep->add_option("--seed", cfg.seed)->capture_default_str();
  sweep->add_option("--cameras", cfg.cameras)->capture_default_str();
  sweep->add_option("--boxes", cfg.boxes)->capture_default_str();
  auto * rot_flag = sweep->add_flag("--rotation-only", rotation_only);
  auto * trans_flag = sweep->add_flag("--translation-only", translation_only);
  rot_flag->excludes(trans_flag);
  sweep->add_option("--out", cfg.out, "Sweep CSV (default stdout)");
  sweep->add_option("--plot-dir", cfg.plot_dir, "Write PGM heatmaps and sweep CSV here");
  add_grid(sweep, grid);

  auto * loss = sub("loss-check", "Finite-difference check of every loss gradient", Command::kLossCheck);
  std::uint64_t loss_seed = 2022;
  loss->add_option("--seed", loss_seed)->capture_default_str();
  loss->add_option("--trials", cfg.loss_trials)->capture_default_str();

  auto * selftest = sub("selftest", "Run the invariant suite and write artifacts", Command::kSelftest);
  std::string selftest_out = "selftest_out";
  selftest->add_option("--out", selftest_out, "Artifact directory")->capture_default_str();

  try {
    app.parse(argc, argv);
    for (const auto & [name, command] : commands) {
      if (app.got_subcommand(name)) {
        cfg.command = command;
      }
    }
    cfg.grid = bevkit::app::parse_grid(grid.dims, grid.voxel);
    cfg.fusion = fusion == "sum"     ? bevkit::Fusion::kSum
                 : fusion == "first" ? bevkit::Fusion::kFirst
                                     : bevkit::Fusion::kAverage;
    cfg.sampling = sampling == "nearest" ? bevkit::Sampling::kNearest : bevkit::Sampling::kBilinear;
    cfg.dynamic_assign = assign_mode == "dynamic";
    cfg.bench_naive = bench_mode != "s2c2d";
    cfg.bench_s2c = bench_mode != "naive3d";
    if (!levels.empty()) {
      cfg.levels = bevkit::app::parse_number_list(levels);
    }
    if (!thresholds.empty()) {
      cfg.thresholds = bevkit::app::parse_number_list(thresholds);
    }
    if (cfg.command == Command::kLossCheck) {
      cfg.seed = loss_seed;
    }
    if (cfg.command == Command::kSelftest) {
      cfg.out = selftest_out;
    }
    cfg.perturb_rotation = !translation_only;
    cfg.perturb_translation = !rotation_only;
  } catch (const CLI::ParseError & e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : bevkit::app::kExitUsage;
  } catch (const bevkit::Error & e) {
    std::cerr << "bevkit: " << e.what() << "\n" << app.help();
    return bevkit::app::kExitUsage;
  }
  return bevkit::app::run_pipeline(cfg, std::cout, std::cerr);
}
