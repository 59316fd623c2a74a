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

#ifndef BEVKIT_GRADCHECK_HPP_
#define BEVKIT_GRADCHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bevkit
{

/// (f(x + h) - f(x - h)) / 2h
double central_difference(const std::function<double(double)> & f, double x, double h = 1e-5);

/// |analytic - numeric| / max(|analytic|, |numeric|, floor). The floor keeps
/// vanishing gradients from turning rounding noise into huge ratios.
double relative_error(double analytic, double numeric, double floor = 1e-6);

struct GradCheckRow
{
  std::string loss;
  std::size_t trials = 0;
  std::size_t components = 0;
  std::size_t failures = 0;
  double max_relative_error = 0.0;

  bool pass() const { return failures == 0; }
};

struct GradCheckConfig
{
  std::uint64_t seed = 2022;
  std::size_t trials = 100;
  double step = 1e-5;
  double tolerance = 1e-4;
};

/// Compares every analytic loss gradient against central differences on
/// randomly drawn inputs: focal, smooth-L1 box, direction BCE, dice,
/// centerness-weighted BCE.
std::vector<GradCheckRow> run_loss_gradient_checks(const GradCheckConfig & config = {});

}  // namespace bevkit

#endif  // BEVKIT_GRADCHECK_HPP_
