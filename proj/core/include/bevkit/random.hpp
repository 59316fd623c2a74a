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

#ifndef BEVKIT_RANDOM_HPP_
#define BEVKIT_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace bevkit
{

/// Independent random streams derived from one scene seed.
enum class Stream : std::uint64_t
{
  kRig = 1,
  kBoxes = 2,
  kMap = 3,
  kNoise = 4,
  kFeatures = 5,
  kTest = 6,
};

/// Counter-based generator: the i-th draw is splitmix64(key + i * golden),
/// so a (seed, stream, counter) triple fully determines every value. Draws
/// and the derived uniform/normal transforms are implemented here rather
/// than through <random> distributions, whose outputs differ between
/// standard library implementations.
class CounterRng
{
public:
  CounterRng(std::uint64_t seed, Stream stream)
  : CounterRng(seed, static_cast<std::uint64_t>(stream))
  {
  }

  CounterRng(std::uint64_t seed, std::uint64_t stream)
  : key_(mix(seed ^ mix(stream + kGolden)))
  {
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept
  {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() noexcept { return mix(key_ + (++counter_) * kGolden); }

  std::uint64_t counter() const noexcept { return counter_; }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept
  {
    // Lemire's multiply-shift; the bias is < n / 2^64 and irrelevant here.
    return mul_high(next_u64(), n);
  }

  /// Standard normal via Box-Muller (one value per two draws).
  double normal() noexcept
  {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sigma) noexcept { return mean + sigma * normal(); }

private:
  static constexpr std::uint64_t mul_high(std::uint64_t a, std::uint64_t b) noexcept
  {
    const std::uint64_t a_lo = a & 0xffffffffULL;
    const std::uint64_t a_hi = a >> 32;
    const std::uint64_t b_lo = b & 0xffffffffULL;
    const std::uint64_t b_hi = b >> 32;
    const std::uint64_t lo_lo = a_lo * b_lo;
    const std::uint64_t hi_lo = a_hi * b_lo;
    const std::uint64_t lo_hi = a_lo * b_hi;
    const std::uint64_t cross = (lo_lo >> 32) + (hi_lo & 0xffffffffULL) + lo_hi;
    return a_hi * b_hi + (hi_lo >> 32) + (cross >> 32);
  }

  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace bevkit

#endif  // BEVKIT_RANDOM_HPP_
