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

#ifndef BEVKIT_TESTS_ORACLES_ASSIGNMENT_HPP_
#define BEVKIT_TESTS_ORACLES_ASSIGNMENT_HPP_

#include <algorithm>
#include <vector>

#include "bevkit/assignment.hpp"
#include "bevkit/boxes3d.hpp"

namespace oracle
{

enum Label
{
  kNeg = 0,
  kPos = 1,
  kIgn = 2,
};

struct Assignment
{
  std::vector<int> label;
  std::vector<long> gt;
};

inline std::vector<std::vector<double>> iou_matrix(
  const std::vector<bevkit::Box3D> & anchors, const std::vector<bevkit::Box3D> & gts)
{
  std::vector<std::vector<double>> m(gts.size(), std::vector<double>(anchors.size()));
  for (std::size_t g = 0; g < gts.size(); ++g) {
    for (std::size_t a = 0; a < anchors.size(); ++a) {
      m[g][a] = bevkit::bev_iou(anchors[a], gts[g]);
    }
  }
  return m;
}

inline Assignment fixed(const std::vector<bevkit::Box3D> & anchors, const std::vector<bevkit::Box3D> & gts,
  double pos_thr, double neg_thr)
{
  const auto m = iou_matrix(anchors, gts);
  Assignment out{std::vector<int>(anchors.size(), kNeg), std::vector<long>(anchors.size(), -1)};
  for (std::size_t a = 0; a < anchors.size() && !gts.empty(); ++a) {
    std::size_t best = 0;
    for (std::size_t g = 1; g < gts.size(); ++g) {
      if (m[g][a] > m[best][a]) {
        best = g;
      }
    }
    if (m[best][a] >= pos_thr) {
      out.label[a] = kPos;
      out.gt[a] = static_cast<long>(best);
    } else if (m[best][a] >= neg_thr) {
      out.label[a] = kIgn;
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    std::size_t best = anchors.size();
    for (std::size_t a = 0; a < anchors.size(); ++a) {
      if (m[g][a] > 0.0 && (best == anchors.size() || m[g][a] > m[g][best])) {
        best = a;
      }
    }
    if (best < anchors.size()) {
      out.label[best] = kPos;
      out.gt[best] = static_cast<long>(g);
    }
  }
  return out;
}

struct DynamicOracle
{
  Assignment assignment;
  std::vector<std::vector<std::size_t>> bags;
};

/// Bags by full sort; conflicts resolved by repeatedly taking the single best
/// remaining (quality, gt, anchor) triple.
inline DynamicOracle dynamic(const std::vector<bevkit::Box3D> & anchors, const std::vector<bevkit::Box3D> & gts,
  const bevkit::AnchorPrediction & pred, const bevkit::DynamicAssignOptions & opt)
{
  const auto m = iou_matrix(anchors, gts);
  DynamicOracle out;
  out.assignment = {std::vector<int>(anchors.size(), kNeg), std::vector<long>(anchors.size(), -1)};
  std::vector<std::vector<double>> quality(gts.size());
  for (std::size_t g = 0; g < gts.size(); ++g) {
    std::vector<std::size_t> order;
    for (std::size_t a = 0; a < anchors.size(); ++a) {
      if (m[g][a] > 0.0) {
        order.push_back(a);
      }
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return m[g][a] > m[g][b] || (m[g][a] == m[g][b] && a < b);
    });
    if (order.size() > opt.bag_size) {
      order.resize(opt.bag_size);
    }
    std::sort(order.begin(), order.end());
    out.bags.push_back(order);
    for (std::size_t a : order) {
      const double loc = pred.loc_boxes.empty() ? m[g][a] : bevkit::bev_iou(pred.loc_boxes[a], gts[g]);
      quality[g].push_back(opt.score_weight * pred.score(a, gts[g].class_id) + (1.0 - opt.score_weight) * loc);
    }
  }
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (m[g][a] > 0.0 && m[g][a] >= opt.ignore_iou) {
        out.assignment.label[a] = kIgn;
      }
    }
  }
  std::vector<char> gt_done(gts.size(), 0);
  std::vector<char> anchor_used(anchors.size(), 0);
  while (true) {
    long bg = -1;
    std::size_t bk = 0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gt_done[g]) {
        continue;
      }
      for (std::size_t k = 0; k < out.bags[g].size(); ++k) {
        if (anchor_used[out.bags[g][k]]) {
          continue;
        }
        // Strictly better quality wins; on a tie the earlier (gt, anchor) stays.
        if (bg < 0 || quality[g][k] > quality[bg][bk]) {
          bg = static_cast<long>(g);
          bk = k;
        }
      }
    }
    if (bg < 0) {
      break;
    }
    const std::size_t a = out.bags[bg][bk];
    gt_done[bg] = 1;
    anchor_used[a] = 1;
    out.assignment.label[a] = kPos;
    out.assignment.gt[a] = bg;
  }
  return out;
}

inline Assignment from_result(const bevkit::AssignmentResult & r, std::size_t n)
{
  Assignment out{std::vector<int>(n, -1), std::vector<long>(n, -1)};
  for (const auto & [a, g] : r.positive) {
    out.label[a] = kPos;
    out.gt[a] = static_cast<long>(g);
  }
  for (std::size_t a : r.negative) {
    out.label[a] = kNeg;
  }
  for (std::size_t a : r.ignored) {
    out.label[a] = kIgn;
  }
  return out;
}

}  // namespace oracle

#endif  // BEVKIT_TESTS_ORACLES_ASSIGNMENT_HPP_
