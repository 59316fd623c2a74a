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

#ifndef BEVKIT_LOSSES_HPP_
#define BEVKIT_LOSSES_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bevkit
{

/// Box regression vector (x, y, z, w, h, l, theta, vx, vy).
using BoxVector = Eigen::Matrix<double, 9, 1>;
inline constexpr int kThetaIndex = 6;

struct LossWeights
{
  double beta_cls = 1.0;
  double beta_loc = 0.8;
  double beta_dir = 0.8;
  double beta_dice = 1.0;
  double beta_bce = 1.0;
  std::array<double, 9> box_dim_weights{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.2, 0.2};
  /// Per-task multipliers on the three summed task losses.
  double task_det3d = 1.0;
  double task_seg3d = 1.0;
  double task_det2d = 1.0;

  /// Throws unless every weight is finite and non-negative.
  void validate() const;
};

// Focal loss on a probability p in (0, 1):
//   target 1: -alpha (1 - p)^gamma log(p)
//   target 0: -(1 - alpha) p^gamma log(1 - p)
double focal_loss(double p, int target, double alpha = 0.25, double gamma = 2.0);
double focal_loss_grad(double p, int target, double alpha = 0.25, double gamma = 2.0);

/// Huber / smooth-L1 with transition at beta: 0.5 d^2 / beta for |d| < beta,
/// |d| - 0.5 beta otherwise.
double huber(double d, double beta);
double huber_grad(double d, double beta);

enum class AngleEncoding
{
  /// The yaw residual is sin(pred - target), so theta and theta + pi agree
  /// and the direction classifier resolves the flip.
  kSinDifference,
  kRaw,
};

inline constexpr double kDefaultHuberBeta = 1.0 / 9.0;

double smooth_l1_box(const BoxVector & pred, const BoxVector & target, const std::array<double, 9> & dim_weights,
  double beta = kDefaultHuberBeta, AngleEncoding encoding = AngleEncoding::kSinDifference);
BoxVector smooth_l1_box_grad(const BoxVector & pred, const BoxVector & target,
  const std::array<double, 9> & dim_weights, double beta = kDefaultHuberBeta,
  AngleEncoding encoding = AngleEncoding::kSinDifference);

/// Heading-flip bin: 1 when the yaw lies in (0, pi], else 0.
int direction_bin(double theta);

/// Binary cross-entropy on a logit, evaluated as
/// max(z, 0) - z t + log1p(exp(-|z|)).
double direction_loss(double logit, int target);
double direction_loss_grad(double logit, int target);

/// 1 - (2 sum(p t) + 1) / (sum(p) + sum(t) + 1).
double dice_loss(std::span<const double> pred, std::span<const double> target);
std::vector<double> dice_loss_grad(std::span<const double> pred, std::span<const double> target);

/// Mean of w_i * BCE(p_i, t_i); empty `weights` means all ones. Probabilities
/// are clamped to [1e-7, 1 - 1e-7] before taking logs.
double weighted_bce_seg(
  std::span<const double> pred, std::span<const double> target, std::span<const double> weights = {});
std::vector<double> weighted_bce_seg_grad(
  std::span<const double> pred, std::span<const double> target, std::span<const double> weights = {});

struct DetLossTerms
{
  double cls = 0.0;
  double loc = 0.0;
  double dir = 0.0;
  std::size_t n_pos = 0;
};

struct SegLossTerms
{
  double dice = 0.0;
  double bce = 0.0;
};

/// Components of the auxiliary 2D detection head, computed by the caller.
struct Det2dLossTerms
{
  double cls = 0.0;
  double box = 0.0;
  double centerness = 0.0;
};

/// `det3d`, `seg3d` and `det2d` already include the task multipliers, so
/// total == det3d + seg3d + det2d.
struct LossReport
{
  double total = 0.0;
  double det3d = 0.0;
  double seg3d = 0.0;
  double det2d = 0.0;
  std::size_t n_pos = 0;
};

/// det3d = (b_cls Lcls + b_loc Lloc + b_dir Ldir) / max(n_pos, 1)
/// seg3d = b_dice Ldice + b_bce Lbce
/// det2d = Lcls + Lbox + Lcenterness
/// Negative components are rejected.
LossReport total_loss(const DetLossTerms & det, const SegLossTerms & seg, const Det2dLossTerms & det2d,
  const LossWeights & weights = {});

}  // namespace bevkit

#endif  // BEVKIT_LOSSES_HPP_
