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

#ifndef BEVKIT_METRICS_HPP_
#define BEVKIT_METRICS_HPP_

#include <span>
#include <vector>

#include "bevkit/boxes3d.hpp"
#include "bevkit/voxel_bev.hpp"

namespace bevkit
{

struct EvalResult
{
  std::vector<double> seg_iou_per_class;
  /// Classes present in the ground truth, ascending; rows of `ap`.
  std::vector<int> class_ids;
  std::vector<double> thresholds;
  /// ap[class][threshold]
  std::vector<std::vector<double>> ap;
  /// Mean of `ap` over classes and thresholds; 0 when there is no ground truth.
  double map = 0.0;
};

inline const std::vector<double> kDefaultCenterThresholds{0.5, 1.0, 2.0, 4.0};

/// |pred AND gt| / |pred OR gt| over every element; 1 when both are empty.
/// Values must be exactly 0 or 1.
double seg_iou(const BevGrid & pred, const BevGrid & gt);

/// seg_iou evaluated channel by channel.
std::vector<double> seg_iou_per_class(const BevGrid & pred, const BevGrid & gt);

/// Center-distance average precision of one class at one threshold.
///
/// Predictions are visited by descending score (ties by input order); each
/// matches the nearest still-unmatched gt of its class whose ground-plane
/// center distance is < threshold. AP is the 101-point interpolated area
/// under the precision/recall curve.
double center_distance_ap_single(
  std::span<const Box3D> preds, std::span<const Box3D> gts, int class_id, double threshold);

EvalResult center_distance_ap(std::span<const Box3D> preds, std::span<const Box3D> gts,
  std::span<const double> thresholds = kDefaultCenterThresholds);

}  // namespace bevkit

#endif  // BEVKIT_METRICS_HPP_
