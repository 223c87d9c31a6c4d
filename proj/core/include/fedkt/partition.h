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

#ifndef FEDKT_PARTITION_H_
#define FEDKT_PARTITION_H_

#include <cstddef>
#include <vector>

#include "fedkt/domain.h"
#include "fedkt/rng.h"

namespace fedkt {

// Assignment of global training-set indices to parties. Lists are pairwise
// disjoint, cover every index and are never empty.
struct PartitionLayout {
  std::vector<std::vector<std::size_t>> party_indices;

  std::size_t num_parties() const { return party_indices.size(); }
};

// s partitions of one party's local index set; each partition is t disjoint
// subsets covering 0..local_size-1. subsets[j][k] is subset k of partition j.
struct LocalSplit {
  std::vector<std::vector<std::vector<std::size_t>>> subsets;
};

// Label-skewed split: for every class k a proportion vector p_k ~ Dir_n(beta)
// is drawn and the class's examples are dealt to parties in those
// proportions using largest-remainder rounding. Parties left empty receive
// one example from the currently largest party.
//
// Draws are independent per class from the one `rng` stream, in class order.
// Throws Error("insufficient data") if the dataset has fewer examples than
// parties, and on n == 0 or beta <= 0.
PartitionLayout dirichlet_partition(const Dataset& data, std::size_t n,
                                    double beta, Rng& rng);

// Uniform random permutation cut into n contiguous near-equal chunks.
PartitionLayout homogeneous_partition(const Dataset& data, std::size_t n,
                                      Rng& rng);

// Throws Error("party too small for t subsets") when local_size < t.
LocalSplit make_local_split(std::size_t local_size, std::size_t s,
                            std::size_t t, Rng& rng);

// Largest-remainder apportionment of `total` items to the given weights.
// Ties in the fractional part go to the smaller index. Weights summing to
// zero put everything on index 0.
std::vector<std::size_t> apportion(std::span<const double> weights,
                                   std::size_t total);

}  // namespace fedkt

#endif  // FEDKT_PARTITION_H_
