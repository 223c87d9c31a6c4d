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

#include "fedkt/partition.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fedkt {
namespace {

// Splits `items` into `parts` contiguous chunks whose sizes differ by <= 1;
// the first (size % parts) chunks get the extra element.
std::vector<std::vector<std::size_t>> chunk(std::span<const std::size_t> items,
                                            std::size_t parts) {
  std::vector<std::vector<std::size_t>> out(parts);
  const std::size_t base = items.size() / parts;
  const std::size_t extra = items.size() % parts;
  std::size_t pos = 0;
  for (std::size_t p = 0; p < parts; ++p) {
    const std::size_t len = base + (p < extra ? 1 : 0);
    out[p].assign(items.begin() + pos, items.begin() + pos + len);
    pos += len;
  }
  return out;
}

}  // namespace

std::vector<std::size_t> apportion(std::span<const double> weights,
                                   std::size_t total) {
  std::vector<std::size_t> counts(weights.size(), 0);
  if (weights.empty()) return counts;
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0)) {
    counts[0] = total;
    return counts;
  }
  std::vector<double> remainder(weights.size());
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double exact = weights[j] / sum * static_cast<double>(total);
    counts[j] = static_cast<std::size_t>(std::floor(exact));
    remainder[j] = exact - std::floor(exact);
    assigned += counts[j];
  }
  // Floating error can in principle push the floor sum past total.
  while (assigned > total) {
    auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % order.size()) {
    ++counts[order[i]];
    ++assigned;
  }
  return counts;
}

PartitionLayout dirichlet_partition(const Dataset& data, std::size_t n,
                                    double beta, Rng& rng) {
  if (n == 0) throw Error("dirichlet_partition: need at least one party");
  if (!(beta > 0.0)) throw Error("dirichlet_partition: beta must be positive");
  if (data.size() < n) throw Error("insufficient data");

  std::vector<std::vector<std::size_t>> by_class(data.num_classes());
  for (std::size_t i = 0; i < data.size(); ++i) {
    by_class[data.label(i)].push_back(i);
  }

  PartitionLayout layout;
  layout.party_indices.resize(n);
  std::vector<double> p(n);
  for (auto& members : by_class) {
    if (members.empty()) continue;
    for (std::size_t j = 0; j < n; ++j) p[j] = rng.gamma(beta);
    // Very small beta can underflow every component; the limit of Dir(beta)
    // as beta -> 0 is a point mass on one uniformly chosen party.
    if (std::accumulate(p.begin(), p.end(), 0.0) <= 0.0) {
      std::fill(p.begin(), p.end(), 0.0);
      p[rng.uniform_index(n)] = 1.0;
    }
    rng.shuffle(std::span<std::size_t>(members));
    const std::vector<std::size_t> counts = apportion(p, members.size());
    std::size_t pos = 0;
    for (std::size_t j = 0; j < n; ++j) {
      auto& dst = layout.party_indices[j];
      dst.insert(dst.end(), members.begin() + pos,
                 members.begin() + pos + counts[j]);
      pos += counts[j];
    }
  }

  for (std::size_t j = 0; j < n; ++j) {
    if (!layout.party_indices[j].empty()) continue;
    auto largest = std::max_element(
        layout.party_indices.begin(), layout.party_indices.end(),
        [](const auto& a, const auto& b) { return a.size() < b.size(); });
    layout.party_indices[j].push_back(largest->back());
    largest->pop_back();
  }
  for (auto& idx : layout.party_indices) std::sort(idx.begin(), idx.end());
  return layout;
}

PartitionLayout homogeneous_partition(const Dataset& data, std::size_t n,
                                      Rng& rng) {
  if (n == 0) throw Error("homogeneous_partition: need at least one party");
  if (n > data.size()) throw Error("insufficient data");
  const std::vector<std::size_t> perm = rng.permutation(data.size());
  return PartitionLayout{chunk(perm, n)};
}

LocalSplit make_local_split(std::size_t local_size, std::size_t s,
                            std::size_t t, Rng& rng) {
  if (s == 0 || t == 0) throw Error("make_local_split: s and t must be >= 1");
  if (local_size < t) {
    throw Error("party too small for t subsets (" + std::to_string(local_size) +
                " examples, t=" + std::to_string(t) + ")");
  }
  LocalSplit split;
  split.subsets.reserve(s);
  for (std::size_t j = 0; j < s; ++j) {
    const std::vector<std::size_t> perm = rng.permutation(local_size);
    split.subsets.push_back(chunk(perm, t));
  }
  return split;
}

}  // namespace fedkt
