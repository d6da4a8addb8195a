#pragma once
//------------------------------------------------------------------------------
//
//   Copyright 2026 ddvcg authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ddvcg {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic stream addressing: every (m, profile, cell, replication)
// tuple maps to its own engine so results do not depend on evaluation order
// or worker count.
inline std::mt19937_64 stream_rng(std::uint64_t master, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(master ^ 0x6a09e667f3bcc908ull);
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return std::mt19937_64(h);
}

}  // namespace ddvcg
