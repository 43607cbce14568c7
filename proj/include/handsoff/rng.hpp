/*
 Copyright 2026 The handsoff authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

#include <cstdint>

namespace handsoff {

/// SplitMix64 finalizer; bijective on 64-bit words.
inline uint64_t mix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Counter-based deterministic generator: the draw at (seed, stream, counter)
/// is a pure function of its arguments, so parallel consumers and re-runs see
/// identical values without shared state.
struct CounterRng {
    uint64_t seed = 0;
    uint64_t stream = 0;

    uint64_t bits(uint64_t counter) const {
        return mix64(mix64(mix64(counter) ^ stream) ^ seed);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double u01(uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(uint64_t counter, double lo, double hi) const {
        return lo + (hi - lo) * u01(counter);
    }
};

}  // namespace handsoff
