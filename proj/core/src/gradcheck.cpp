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

#include "bevkit/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "bevkit/losses.hpp"
#include "bevkit/random.hpp"

namespace bevkit
{

namespace
{

class RowAccumulator
{
public:
  RowAccumulator(std::string name, double tolerance) : tolerance_(tolerance) { row_.loss = std::move(name); }

  void record(double analytic, double numeric)
  {
    const double err = relative_error(analytic, numeric);
    ++row_.components;
    row_.max_relative_error = std::max(row_.max_relative_error, err);
    if (!(err <= tolerance_)) {
      ++row_.failures;
    }
  }

  GradCheckRow finish(std::size_t trials)
  {
    row_.trials = trials;
    return row_;
  }

private:
  GradCheckRow row_;
  double tolerance_;
};

std::vector<double> random_probabilities(CounterRng & rng, std::size_t n)
{
  std::vector<double> p(n);
  for (double & v : p) {
    v = rng.uniform(0.02, 0.98);
  }
  return p;
}

std::vector<double> random_bits(CounterRng & rng, std::size_t n)
{
  std::vector<double> t(n);
  for (double & v : t) {
    v = rng.uniform() < 0.5 ? 0.0 : 1.0;
  }
  return t;
}

// Central difference of a mask loss with respect to element i.
template <typename Loss>
double mask_partial(Loss && loss, std::vector<double> pred, std::size_t i, double h)
{
  const double x = pred[i];
  return central_difference(
    [&](double xi) {
      pred[i] = xi;
      return loss(pred);
    },
    x, h);
}

}  // namespace

double central_difference(const std::function<double(double)> & f, double x, double h)
{
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

double relative_error(double analytic, double numeric, double floor)
{
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

std::vector<GradCheckRow> run_loss_gradient_checks(const GradCheckConfig & config)
{
  CounterRng rng(config.seed, Stream::kTest);
  const double h = config.step;
  std::vector<GradCheckRow> rows;

  {
    RowAccumulator acc("focal", config.tolerance);
    for (std::size_t t = 0; t < config.trials; ++t) {
      const double p = rng.uniform(0.02, 0.98);
      const int target = rng.uniform() < 0.5 ? 0 : 1;
      const double alpha = rng.uniform(0.1, 0.9);
      const double gamma = rng.uniform(0.0, 3.0);
      const double numeric =
        central_difference([&](double x) { return focal_loss(x, target, alpha, gamma); }, p, h);
      acc.record(focal_loss_grad(p, target, alpha, gamma), numeric);
    }
    rows.push_back(acc.finish(config.trials));
  }

  {
    RowAccumulator acc("smooth_l1_box", config.tolerance);
    const LossWeights weights;
    for (std::size_t t = 0; t < config.trials; ++t) {
      BoxVector pred;
      BoxVector target;
      for (int d = 0; d < 9; ++d) {
        pred(d) = rng.normal();
        target(d) = rng.normal();
      }
      const AngleEncoding enc = (t % 2 == 0) ? AngleEncoding::kSinDifference : AngleEncoding::kRaw;
      const BoxVector g = smooth_l1_box_grad(pred, target, weights.box_dim_weights, kDefaultHuberBeta, enc);
      for (int d = 0; d < 9; ++d) {
        const double numeric = central_difference(
          [&](double x) {
            BoxVector p = pred;
            p(d) = x;
            return smooth_l1_box(p, target, weights.box_dim_weights, kDefaultHuberBeta, enc);
          },
          pred(d), h);
        acc.record(g(d), numeric);
      }
    }
    rows.push_back(acc.finish(config.trials));
  }

  {
    RowAccumulator acc("direction_bce", config.tolerance);
    for (std::size_t t = 0; t < config.trials; ++t) {
      const double logit = rng.normal(0.0, 3.0);
      const int target = rng.uniform() < 0.5 ? 0 : 1;
      const double numeric = central_difference([&](double z) { return direction_loss(z, target); }, logit, h);
      acc.record(direction_loss_grad(logit, target), numeric);
    }
    rows.push_back(acc.finish(config.trials));
  }

  constexpr std::size_t kMask = 32;
  {
    RowAccumulator acc("dice", config.tolerance);
    for (std::size_t t = 0; t < config.trials; ++t) {
      const std::vector<double> pred = random_probabilities(rng, kMask);
      const std::vector<double> target = random_bits(rng, kMask);
      const std::vector<double> g = dice_loss_grad(pred, target);
      for (std::size_t i = 0; i < kMask; ++i) {
        acc.record(g[i], mask_partial([&](const std::vector<double> & p) { return dice_loss(p, target); }, pred, i, h));
      }
    }
    rows.push_back(acc.finish(config.trials));
  }

  {
    RowAccumulator acc("weighted_bce", config.tolerance);
    for (std::size_t t = 0; t < config.trials; ++t) {
      const std::vector<double> pred = random_probabilities(rng, kMask);
      const std::vector<double> target = random_bits(rng, kMask);
      std::vector<double> weights(kMask);
      for (double & w : weights) {
        w = rng.uniform(1.0, 2.0);
      }
      const std::vector<double> g = weighted_bce_seg_grad(pred, target, weights);
      for (std::size_t i = 0; i < kMask; ++i) {
        acc.record(g[i], mask_partial(
                           [&](const std::vector<double> & p) { return weighted_bce_seg(p, target, weights); },
                           pred, i, h));
      }
    }
    rows.push_back(acc.finish(config.trials));
  }

  return rows;
}

}  // namespace bevkit
