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

#include "bevkit/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include "bevkit/error.hpp"

namespace bevkit
{

namespace
{

// Row-major num_gts x num_anchors IoU table.
std::vector<double> iou_table(std::span<const Box3D> anchors, std::span<const Box3D> gts)
{
  std::vector<double> table(gts.size() * anchors.size(), 0.0);
  for (std::size_t g = 0; g < gts.size(); ++g) {
    const double reach_g = 0.5 * std::hypot(gts[g].w, gts[g].l);
    for (std::size_t a = 0; a < anchors.size(); ++a) {
      const double reach = reach_g + 0.5 * std::hypot(anchors[a].w, anchors[a].l);
      if (std::abs(anchors[a].x - gts[g].x) > reach || std::abs(anchors[a].y - gts[g].y) > reach) {
        continue;
      }
      table[g * anchors.size() + a] = bev_iou(anchors[a], gts[g]);
    }
  }
  return table;
}

AssignmentResult from_labels(const std::vector<AnchorLabel> & label, const std::vector<long> & gt_of)
{
  AssignmentResult result;
  for (std::size_t a = 0; a < label.size(); ++a) {
    switch (label[a]) {
      case AnchorLabel::kPositive:
        result.positive.emplace_back(a, static_cast<std::size_t>(gt_of[a]));
        break;
      case AnchorLabel::kNegative:
        result.negative.push_back(a);
        break;
      case AnchorLabel::kIgnored:
        result.ignored.push_back(a);
        break;
    }
  }
  return result;
}

}  // namespace

std::vector<std::pair<AnchorLabel, long>> AssignmentResult::labels(std::size_t num_anchors) const
{
  std::vector<std::pair<AnchorLabel, long>> out(num_anchors, {AnchorLabel::kNegative, -1});
  for (const auto & [a, g] : positive) {
    out[a] = {AnchorLabel::kPositive, static_cast<long>(g)};
  }
  for (std::size_t a : ignored) {
    out[a] = {AnchorLabel::kIgnored, -1};
  }
  return out;
}

AssignmentResult assign_fixed_iou(
  std::span<const Box3D> anchors, std::span<const Box3D> gts, double pos_thr, double neg_thr)
{
  require(pos_thr >= neg_thr, ErrorCode::kInvalidArgument, "pos_thr must be >= neg_thr");
  const std::size_t na = anchors.size();
  std::vector<AnchorLabel> label(na, AnchorLabel::kNegative);
  std::vector<long> gt_of(na, -1);
  if (gts.empty()) {
    return from_labels(label, gt_of);
  }

  const std::vector<double> iou = iou_table(anchors, gts);
  for (std::size_t a = 0; a < na; ++a) {
    double best = -1.0;
    long best_gt = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (iou[g * na + a] > best) {
        best = iou[g * na + a];
        best_gt = static_cast<long>(g);
      }
    }
    if (best >= pos_thr) {
      label[a] = AnchorLabel::kPositive;
      gt_of[a] = best_gt;
    } else if (best < neg_thr) {
      label[a] = AnchorLabel::kNegative;
    } else {
      label[a] = AnchorLabel::kIgnored;
    }
  }

  // Low-quality rescue: every gt keeps its best anchor.
  for (std::size_t g = 0; g < gts.size(); ++g) {
    double best = 0.0;
    long best_anchor = -1;
    for (std::size_t a = 0; a < na; ++a) {
      if (iou[g * na + a] > best) {
        best = iou[g * na + a];
        best_anchor = static_cast<long>(a);
      }
    }
    if (best_anchor >= 0) {
      label[best_anchor] = AnchorLabel::kPositive;
      gt_of[best_anchor] = static_cast<long>(g);
    }
  }
  return from_labels(label, gt_of);
}

std::vector<long> select_bag_positives(std::span<const std::vector<BagCandidate>> bags)
{
  struct Pair
  {
    double quality;
    std::size_t gt;
    std::size_t anchor;
  };
  std::vector<Pair> pairs;
  for (std::size_t g = 0; g < bags.size(); ++g) {
    for (const BagCandidate & c : bags[g]) {
      pairs.push_back({c.quality, g, c.anchor});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair & a, const Pair & b) {
    if (a.quality != b.quality) {
      return a.quality > b.quality;
    }
    return std::tie(a.gt, a.anchor) < std::tie(b.gt, b.anchor);
  });

  std::vector<long> chosen(bags.size(), -1);
  std::vector<std::size_t> taken;
  for (const Pair & p : pairs) {
    if (chosen[p.gt] >= 0 || std::find(taken.begin(), taken.end(), p.anchor) != taken.end()) {
      continue;
    }
    chosen[p.gt] = static_cast<long>(p.anchor);
    taken.push_back(p.anchor);
  }
  return chosen;
}

AssignmentResult assign_dynamic(std::span<const Box3D> anchors, std::span<const Box3D> gts,
  const AnchorPrediction & predictions, const DynamicAssignOptions & options)
{
  require(options.bag_size >= 1, ErrorCode::kInvalidArgument, "bag_size must be >= 1");
  require(options.score_weight >= 0.0 && options.score_weight <= 1.0, ErrorCode::kInvalidArgument,
    "score_weight must lie in [0, 1]");
  require(gts.empty() || !anchors.empty(), ErrorCode::kInvalidArgument, "no anchors to assign ground truth to");
  const std::size_t na = anchors.size();
  require(predictions.cls_scores.size() == na * predictions.num_classes, ErrorCode::kShapeMismatch,
    "prediction scores do not match the anchor count");
  require(predictions.loc_boxes.empty() || predictions.loc_boxes.size() == na, ErrorCode::kShapeMismatch,
    "predicted boxes do not match the anchor count");
  for (const Box3D & g : gts) {
    require(g.class_id >= 0 && static_cast<std::size_t>(g.class_id) < predictions.num_classes,
      ErrorCode::kShapeMismatch, "gt class " + std::to_string(g.class_id) + " has no prediction column");
  }

  const bool loc_is_anchor = predictions.loc_boxes.empty();
  const std::vector<double> iou = iou_table(anchors, gts);

  AssignmentResult result;
  result.per_gt_bag.resize(gts.size());
  std::vector<std::vector<BagCandidate>> bags(gts.size());
  for (std::size_t g = 0; g < gts.size(); ++g) {
    std::vector<std::size_t> members;
    for (std::size_t a = 0; a < na; ++a) {
      if (iou[g * na + a] > 0.0) {
        members.push_back(a);
      }
    }
    const std::size_t keep = std::min(options.bag_size, members.size());
    std::partial_sort(members.begin(), members.begin() + static_cast<long>(keep), members.end(),
      [&](std::size_t a, std::size_t b) {
        if (iou[g * na + a] != iou[g * na + b]) {
          return iou[g * na + a] > iou[g * na + b];
        }
        return a < b;
      });
    members.resize(keep);
    std::sort(members.begin(), members.end());
    result.per_gt_bag[g] = members;
    for (std::size_t a : members) {
      const double loc_iou = loc_is_anchor ? iou[g * na + a] : bev_iou(predictions.loc_boxes[a], gts[g]);
      const double q =
        options.score_weight * predictions.score(a, gts[g].class_id) + (1.0 - options.score_weight) * loc_iou;
      bags[g].push_back({a, q});
    }
  }

  const std::vector<long> chosen = select_bag_positives(bags);
  std::vector<AnchorLabel> label(na, AnchorLabel::kNegative);
  std::vector<long> gt_of(na, -1);
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (iou[g * na + a] >= options.ignore_iou && iou[g * na + a] > 0.0) {
        label[a] = AnchorLabel::kIgnored;
        break;
      }
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (chosen[g] >= 0) {
      label[chosen[g]] = AnchorLabel::kPositive;
      gt_of[chosen[g]] = static_cast<long>(g);
    }
  }
  AssignmentResult labelled = from_labels(label, gt_of);
  result.positive = std::move(labelled.positive);
  result.negative = std::move(labelled.negative);
  result.ignored = std::move(labelled.ignored);
  return result;
}

}  // namespace bevkit
