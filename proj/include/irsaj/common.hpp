// Copyright 2026 The irsaj Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace irsaj {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;

using StateIndex = std::size_t;
using ActionIndex = std::size_t;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Raised when a channel block carries no energy in a direction we must normalize.
class DegenerateChannelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Configuration problems carry the dotted path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Reading or writing run artifacts failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Units. Physics is SI throughout; dBm only appears at config boundaries.

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watts_to_dbm(double watts) {
  if (watts <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(watts) + 30.0;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double lin) {
  if (lin <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(lin);
}

// ---------------------------------------------------------------------------
// Random streams. Every consumer of randomness in a run owns a stream derived
// from (seed, stream id), so adding draws in one place never shifts another.

using Rng = std::mt19937_64;

enum class Stream : std::uint32_t {
  geometry = 1,
  channels = 2,
  warmup = 3,
  agent = 4,
  jammer = 5,
  estimator = 6,
};

inline Rng make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), stream, 0x1a5a17u};
  return Rng(seq);
}

inline Rng make_rng(std::uint64_t seed, Stream stream) {
  return make_rng(seed, static_cast<std::uint32_t>(stream));
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform
// that ships mt19937_64, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Circularly-symmetric complex Gaussian with unit variance (Box-Muller on
// uniform01 so streams are reproducible across standard libraries).
inline Complex complex_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  const double radius = std::sqrt(-std::log(u1));  // E[r^2] = 1
  return std::polar(radius, kTwoPi * u2);
}

// Unbiased integer in [0, n) by rejection.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return static_cast<std::size_t>(x % bound);
}

}  // namespace irsaj
