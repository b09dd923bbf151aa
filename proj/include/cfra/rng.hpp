// cfra — robust resource allocation for user-centric cell-free massive MIMO
// Copyright (C) 2026 cfra developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

#include "common.hpp"

namespace cfra {

// Stateless avalanche mixer (SplitMix64 finalizer).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 1469598103934665603ull; // FNV-1a 64-bit
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

/// Derives an independent seed for a named substream of a master seed.
/// Streams are keyed by (master, tag, index) so that e.g. changing the
/// number of Monte Carlo samples never perturbs the channel draws.
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view tag,
                                    std::uint64_t index = 0) {
    return mix64(mix64(mix64(master) ^ hash_tag(tag)) ^ index);
}

/// Deterministic random stream with portable normal/complex-normal draws.
/// mt19937_64 has a standard-mandated output sequence, and the Gaussian
/// transforms below are written out explicitly because the distributions in
/// <random> are implementation-defined and would break frozen test values.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    Rng(std::uint64_t master, std::string_view tag, std::uint64_t index = 0)
        : eng_(substream_seed(master, tag, index)) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform draw in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Standard real normal N(0, 1) via Box–Muller (pairs cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]; keeps the log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    /// Circularly-symmetric complex normal CN(0, 1): unit total variance,
    /// i.e. real and imaginary parts each N(0, 1/2).
    cxd cnormal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(t), r * std::sin(t)};
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace cfra
