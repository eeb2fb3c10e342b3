/*
   Copyright 2026 The stochflow Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/
#pragma once

#include <array>
#include <cstdint>

namespace stochflow {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al. counter-based generator).
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

// Random stream addressed by (seed, path); draws are addressed by
// (step, index, stream) so every draw is a pure function of its address.
struct RngKey {
  std::uint64_t seed = 0;
  std::uint32_t path = 0;
};

enum class Stream : std::uint32_t { Wiener = 0, InitialDensity = 1, InitialVelocity = 2, InitialNorm = 3, Test = 7 };

double uniform01(const RngKey& key, std::uint32_t step, std::uint32_t index, Stream stream);
double standard_normal(const RngKey& key, std::uint32_t step, std::uint32_t index, Stream stream);

}  // namespace stochflow
