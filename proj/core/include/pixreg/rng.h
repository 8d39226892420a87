// Copyright 2026 The pixreg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef PIXREG_RNG_H_
#define PIXREG_RNG_H_

#include <cstdint>
#include <random>

namespace pixreg {

// Independent sub-seed for `stream` under a run seed (splitmix64 finalizer).
constexpr std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 MakeRng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(DeriveSeed(seed, stream));
}

// Named streams so unrelated draws never share a generator.
namespace streams {
inline constexpr std::uint64_t kInit = 0;
inline constexpr std::uint64_t kShuffle = 1;
inline constexpr std::uint64_t kPairs = 2;
inline constexpr std::uint64_t kSelect = 3;
inline constexpr std::uint64_t kEval = 4;
inline constexpr std::uint64_t kAttack = 5;
}  // namespace streams

}  // namespace pixreg

#endif  // PIXREG_RNG_H_
