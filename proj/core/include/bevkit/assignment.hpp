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

#ifndef BEVKIT_ASSIGNMENT_HPP_
#define BEVKIT_ASSIGNMENT_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "bevkit/boxes3d.hpp"

namespace bevkit
{

enum class AnchorLabel
{
  kNegative,
  kPositive,
  kIgnored,
};

/// Anchor <-> ground-truth matching. Every anchor is in exactly one of
/// positive / negative / ignored; each list is sorted by anchor index.
struct AssignmentResult
{
  std::vector<std::pair<std::size_t, std::size_t>> positive;  // (anchor, gt)
  std::vector<std::size_t> negative;
  std::vector<std::size_t> ignored;
  /// Candidate bag per ground truth (dynamic assignment only).
  std::vector<std::vector<std::size_t>> per_gt_bag;

  /// Dense per-anchor view: label and matched gt (or -1).
  std::vector<std::pair<AnchorLabel, long>> labels(std::size_t num_anchors) const;
};

/// Per-anchor class probabilities (row-major num_anchors x num_classes) and
/// decoded boxes. An empty `loc_boxes` means the anchors themselves.
struct AnchorPrediction
{
  std::size_t num_classes = 0;
  std::vector<double> cls_scores;
  std::vector<Box3D> loc_boxes;

  double score(std::size_t anchor, int class_id) const
  {
    return cls_scores[anchor * num_classes + static_cast<std::size_t>(class_id)];
  }
};

/// Fixed-threshold matching: an anchor is positive to its best-IoU gt when
/// that IoU >= pos_thr, negative when its best IoU < neg_thr, ignored
/// otherwise. Each gt then claims its single best anchor if that IoU > 0
/// (later gts win conflicts). Ties go to the lowest index.
AssignmentResult assign_fixed_iou(
  std::span<const Box3D> anchors, std::span<const Box3D> gts, double pos_thr, double neg_thr);

struct DynamicAssignOptions
{
  std::size_t bag_size = 50;
  /// Weight of the classification score in the matching quality; the rest
  /// goes to the localization IoU.
  double score_weight = 0.5;
  /// Unselected anchors with IoU >= this to any gt are ignored.
  double ignore_iou = 0.3;
};

/// One bag member: anchor index and its matching quality for that gt.
struct BagCandidate
{
  std::size_t anchor;
  double quality;
};

/// Picks one anchor per bag by descending quality. Among all unresolved
/// (gt, anchor) pairs whose anchor is still free, the highest quality pair
/// is taken first (ties: lower gt, then lower anchor). Without conflicts
/// this is the per-bag argmax. Returns the chosen anchor per gt, or -1 when
/// a bag is empty or fully claimed.
std::vector<long> select_bag_positives(std::span<const std::vector<BagCandidate>> bags);

/// Learning-to-match assignment: each gt's bag holds its top `bag_size`
/// anchors by BEV IoU (IoU > 0 only); quality is
///   q = score_weight * cls_score(gt class) + (1 - score_weight) * IoU(loc box, gt)
/// and select_bag_positives picks the positives. Unselected anchors overlapping
/// some gt with IoU >= ignore_iou are ignored, everything else is negative.
AssignmentResult assign_dynamic(std::span<const Box3D> anchors, std::span<const Box3D> gts,
  const AnchorPrediction & predictions, const DynamicAssignOptions & options = {});

}  // namespace bevkit

#endif  // BEVKIT_ASSIGNMENT_HPP_
