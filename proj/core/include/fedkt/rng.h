/*
 * Copyright 2026 The FedKT Simulator Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDKT_RNG_H_
#define FEDKT_RNG_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace fedkt {

// Seeded deterministic random stream.
//
// Only the raw 64-bit engine output is taken from the standard library; every
// distribution (uniform reals, bounded integers, normal, gamma) is computed
// here so the same seed yields bit-identical draws on every toolchain.
//
// Child streams are derived from the construction seed and a path of
// integers, never from the current engine state. Deriving
// {party, partition, role} therefore gives the same stream regardless of how
// many draws the parent has made or which order workers run in.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  Rng derive(std::initializer_list<std::uint64_t> path) const;

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1).
  double uniform();
  // Uniform on the open interval (0, 1).
  double uniform_open();
  // Uniform integer in [0, n); n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();
  // Gamma(shape, 1); shape > 0.
  double gamma(double shape);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }
  // A uniformly random permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Stream identifiers used when deriving child streams. Kept in one place so two
// roles can never collide by accident.
enum class Stream : std::uint64_t {
  kSplit = 1,
  kPartition = 2,
  kParty = 3,
  kLocalSplit = 4,
  kTeacher = 5,
  kStudent = 6,
  kPartyNoise = 7,
  kServerNoise = 8,
  kFinal = 9,
  kQueries = 10,
  kSolo = 11,
  kPate = 12,
  kPublicSubset = 13,
  kSynthetic = 14,
};

constexpr std::uint64_t id(Stream s) { return static_cast<std::uint64_t>(s); }

}  // namespace fedkt

#endif  // FEDKT_RNG_H_
