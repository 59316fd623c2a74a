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

#include "bevkit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bevkit/boxes3d.hpp"
#include "bevkit/error.hpp"

namespace bevkit
{

namespace
{

constexpr double kProbEps = 1e-7;

void check_target(int target)
{
  require(target == 0 || target == 1, ErrorCode::kInvalidArgument, "binary target must be 0 or 1");
}

void check_open_probability(double p)
{
  require(p > 0.0 && p < 1.0, ErrorCode::kInvalidArgument, "probability must lie in (0, 1)");
}

void check_mask_pair(std::span<const double> pred, std::span<const double> target, std::span<const double> weights)
{
  require(pred.size() == target.size(), ErrorCode::kShapeMismatch, "prediction and target masks differ in size");
  require(weights.empty() || weights.size() == pred.size(), ErrorCode::kShapeMismatch,
    "weight map does not match the mask size");
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0.0, ErrorCode::kInvalidArgument, "loss weights must be non-negative");
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    require(pred[i] >= 0.0 && pred[i] <= 1.0, ErrorCode::kInvalidArgument, "mask probabilities must lie in [0, 1]");
    require(target[i] == 0.0 || target[i] == 1.0, ErrorCode::kInvalidArgument, "target mask must be binary");
  }
}

double residual(const BoxVector & pred, const BoxVector & target, int dim, AngleEncoding encoding)
{
  if (dim == kThetaIndex && encoding == AngleEncoding::kSinDifference) {
    return std::sin(pred(dim) - target(dim));
  }
  return pred(dim) - target(dim);
}

}  // namespace

void LossWeights::validate() const
{
  auto ok = [](double w) { return std::isfinite(w) && w >= 0.0; };
  bool all = ok(beta_cls) && ok(beta_loc) && ok(beta_dir) && ok(beta_dice) && ok(beta_bce) && ok(task_det3d) &&
             ok(task_seg3d) && ok(task_det2d);
  for (double w : box_dim_weights) {
    all = all && ok(w);
  }
  require(all, ErrorCode::kInvalidArgument, "loss weights must be finite and non-negative");
}

double focal_loss(double p, int target, double alpha, double gamma)
{
  check_open_probability(p);
  check_target(target);
  if (target == 1) {
    return -alpha * std::pow(1.0 - p, gamma) * std::log(p);
  }
  return -(1.0 - alpha) * std::pow(p, gamma) * std::log(1.0 - p);
}

double focal_loss_grad(double p, int target, double alpha, double gamma)
{
  check_open_probability(p);
  check_target(target);
  if (target == 1) {
    const double q = 1.0 - p;
    const double dpow = gamma == 0.0 ? 0.0 : gamma * std::pow(q, gamma - 1.0);
    return alpha * (dpow * std::log(p) - std::pow(q, gamma) / p);
  }
  const double dpow = gamma == 0.0 ? 0.0 : gamma * std::pow(p, gamma - 1.0);
  return -(1.0 - alpha) * (dpow * std::log(1.0 - p) - std::pow(p, gamma) / (1.0 - p));
}

double huber(double d, double beta)
{
  const double ad = std::abs(d);
  return ad < beta ? 0.5 * d * d / beta : ad - 0.5 * beta;
}

double huber_grad(double d, double beta)
{
  if (std::abs(d) < beta) {
    return d / beta;
  }
  return d > 0.0 ? 1.0 : -1.0;
}

double smooth_l1_box(const BoxVector & pred, const BoxVector & target, const std::array<double, 9> & dim_weights,
  double beta, AngleEncoding encoding)
{
  require(beta > 0.0, ErrorCode::kInvalidArgument, "smooth-L1 beta must be positive");
  double sum = 0.0;
  for (int d = 0; d < 9; ++d) {
    sum += dim_weights[d] * huber(residual(pred, target, d, encoding), beta);
  }
  return sum;
}

BoxVector smooth_l1_box_grad(const BoxVector & pred, const BoxVector & target,
  const std::array<double, 9> & dim_weights, double beta, AngleEncoding encoding)
{
  require(beta > 0.0, ErrorCode::kInvalidArgument, "smooth-L1 beta must be positive");
  BoxVector g;
  for (int d = 0; d < 9; ++d) {
    g(d) = dim_weights[d] * huber_grad(residual(pred, target, d, encoding), beta);
    if (d == kThetaIndex && encoding == AngleEncoding::kSinDifference) {
      g(d) *= std::cos(pred(d) - target(d));
    }
  }
  return g;
}

int direction_bin(double theta) { return normalize_angle(theta) > 0.0 ? 1 : 0; }

double direction_loss(double logit, int target)
{
  check_target(target);
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

double direction_loss_grad(double logit, int target)
{
  check_target(target);
  const double sigmoid = logit >= 0.0 ? 1.0 / (1.0 + std::exp(-logit)) : std::exp(logit) / (1.0 + std::exp(logit));
  return sigmoid - target;
}

double dice_loss(std::span<const double> pred, std::span<const double> target)
{
  check_mask_pair(pred, target, {});
  double inter = 0.0;
  double sp = 0.0;
  double st = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    inter += pred[i] * target[i];
    sp += pred[i];
    st += target[i];
  }
  return 1.0 - (2.0 * inter + 1.0) / (sp + st + 1.0);
}

std::vector<double> dice_loss_grad(std::span<const double> pred, std::span<const double> target)
{
  check_mask_pair(pred, target, {});
  double inter = 0.0;
  double sp = 0.0;
  double st = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    inter += pred[i] * target[i];
    sp += pred[i];
    st += target[i];
  }
  const double num = 2.0 * inter + 1.0;
  const double den = sp + st + 1.0;
  std::vector<double> g(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    g[i] = -(2.0 * target[i] * den - num) / (den * den);
  }
  return g;
}

double weighted_bce_seg(std::span<const double> pred, std::span<const double> target, std::span<const double> weights)
{
  check_mask_pair(pred, target, weights);
  if (pred.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred[i], kProbEps, 1.0 - kProbEps);
    const double w = weights.empty() ? 1.0 : weights[i];
    sum += w * -(target[i] * std::log(p) + (1.0 - target[i]) * std::log(1.0 - p));
  }
  return sum / static_cast<double>(pred.size());
}

std::vector<double> weighted_bce_seg_grad(
  std::span<const double> pred, std::span<const double> target, std::span<const double> weights)
{
  check_mask_pair(pred, target, weights);
  std::vector<double> g(pred.size(), 0.0);
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < kProbEps || pred[i] > 1.0 - kProbEps) {
      continue;  // clamped: flat
    }
    const double p = pred[i];
    const double w = weights.empty() ? 1.0 : weights[i];
    g[i] = w * (p - target[i]) / (p * (1.0 - p)) / n;
  }
  return g;
}

LossReport total_loss(
  const DetLossTerms & det, const SegLossTerms & seg, const Det2dLossTerms & det2d, const LossWeights & weights)
{
  weights.validate();
  for (double v : {det.cls, det.loc, det.dir, seg.dice, seg.bce, det2d.cls, det2d.box, det2d.centerness}) {
    require(std::isfinite(v) && v >= 0.0, ErrorCode::kInvalidArgument, "loss components must be non-negative");
  }
  LossReport r;
  r.n_pos = det.n_pos;
  const double npos = static_cast<double>(std::max<std::size_t>(det.n_pos, 1));
  r.det3d = weights.task_det3d *
            (weights.beta_cls * det.cls + weights.beta_loc * det.loc + weights.beta_dir * det.dir) / npos;
  r.seg3d = weights.task_seg3d * (weights.beta_dice * seg.dice + weights.beta_bce * seg.bce);
  r.det2d = weights.task_det2d * (det2d.cls + det2d.box + det2d.centerness);
  r.total = r.det3d + r.seg3d + r.det2d;
  return r;
}

}  // namespace bevkit
