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

#include "bevkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "bevkit/error.hpp"

namespace bevkit
{

namespace
{

void check_binary_pair(const BevGrid & pred, const BevGrid & gt)
{
  require(pred.nx == gt.nx && pred.ny == gt.ny && pred.channels == gt.channels &&
            pred.data.size() == gt.data.size(),
    ErrorCode::kShapeMismatch, "segmentation masks differ in shape");
  auto binary = [](float v) { return v == 0.0F || v == 1.0F; };
  require(std::all_of(pred.data.begin(), pred.data.end(), binary) &&
            std::all_of(gt.data.begin(), gt.data.end(), binary),
    ErrorCode::kInvalidArgument, "segmentation masks must be binary");
}

double iou_over(const BevGrid & pred, const BevGrid & gt, int channel)
{
  std::size_t inter = 0;
  std::size_t uni = 0;
  const std::size_t cells = static_cast<std::size_t>(pred.nx) * pred.ny;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    for (int c = 0; c < pred.channels; ++c) {
      if (channel >= 0 && c != channel) {
        continue;
      }
      const bool p = pred.data[cell * pred.channels + c] != 0.0F;
      const bool g = gt.data[cell * gt.channels + c] != 0.0F;
      inter += (p && g) ? 1 : 0;
      uni += (p || g) ? 1 : 0;
    }
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

double seg_iou(const BevGrid & pred, const BevGrid & gt)
{
  check_binary_pair(pred, gt);
  return iou_over(pred, gt, -1);
}

std::vector<double> seg_iou_per_class(const BevGrid & pred, const BevGrid & gt)
{
  check_binary_pair(pred, gt);
  std::vector<double> out;
  for (int c = 0; c < pred.channels; ++c) {
    out.push_back(iou_over(pred, gt, c));
  }
  return out;
}

double center_distance_ap_single(
  std::span<const Box3D> preds, std::span<const Box3D> gts, int class_id, double threshold)
{
  std::vector<std::size_t> gt_idx;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (gts[g].class_id == class_id) {
      gt_idx.push_back(g);
    }
  }
  if (gt_idx.empty()) {
    return 0.0;
  }
  std::vector<std::size_t> order;
  for (std::size_t p = 0; p < preds.size(); ++p) {
    if (preds[p].class_id == class_id) {
      order.push_back(p);
    }
  }
  std::stable_sort(
    order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });

  std::vector<bool> matched(gt_idx.size(), false);
  std::vector<double> precision;
  std::vector<double> recall;
  std::size_t tp = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Box3D & p = preds[order[rank]];
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_g = gt_idx.size();
    for (std::size_t k = 0; k < gt_idx.size(); ++k) {
      if (matched[k]) {
        continue;
      }
      const double d = std::hypot(p.x - gts[gt_idx[k]].x, p.y - gts[gt_idx[k]].y);
      if (d < threshold && d < best) {
        best = d;
        best_g = k;
      }
    }
    if (best_g < gt_idx.size()) {
      matched[best_g] = true;
      ++tp;
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gt_idx.size()));
  }

  // Running max of precision from the right gives the interpolated envelope.
  for (std::size_t k = precision.size(); k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double sum = 0.0;
  std::size_t k = 0;
  for (int r = 0; r <= 100; ++r) {
    const double level = r / 100.0;
    while (k < recall.size() && recall[k] < level) {
      ++k;
    }
    if (k == recall.size()) {
      break;
    }
    sum += precision[k];
  }
  return sum / 101.0;
}

EvalResult center_distance_ap(std::span<const Box3D> preds, std::span<const Box3D> gts, std::span<const double> thresholds)
{
  require(!thresholds.empty(), ErrorCode::kInvalidArgument, "need at least one distance threshold");
  EvalResult result;
  result.thresholds.assign(thresholds.begin(), thresholds.end());
  std::set<int> classes;
  for (const Box3D & g : gts) {
    classes.insert(g.class_id);
  }
  result.class_ids.assign(classes.begin(), classes.end());
  double sum = 0.0;
  for (int c : result.class_ids) {
    std::vector<double> row;
    for (double t : thresholds) {
      row.push_back(center_distance_ap_single(preds, gts, c, t));
      sum += row.back();
    }
    result.ap.push_back(std::move(row));
  }
  if (!result.class_ids.empty()) {
    result.map = sum / static_cast<double>(result.class_ids.size() * thresholds.size());
  }
  return result;
}

}  // namespace bevkit
