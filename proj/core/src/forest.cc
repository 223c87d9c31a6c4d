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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedkt/learners.h"
#include "learner_common.h"

namespace fedkt {

std::shared_ptr<DecisionTreeClassifier> fit_decision_tree(const ModelSpec& spec,
                                                          const Dataset& train,
                                                          Rng& rng) {
  const TrainingData td = TrainingData::from(train);
  GiniTreeOptions opt{spec.max_depth, spec.min_samples_leaf, spec.max_features};
  std::vector<std::size_t> rows(td.x.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return std::make_shared<DecisionTreeClassifier>(
      train.num_classes(), train.dim(),
      grow_gini_tree(td.x, td.y, train.num_classes(), rows, opt, rng));
}

std::shared_ptr<RandomForestClassifier> fit_random_forest(const ModelSpec& spec,
                                                          const Dataset& train,
                                                          Rng& rng) {
  const TrainingData td = TrainingData::from(train);
  const std::size_t n = td.x.rows();
  GiniTreeOptions opt{spec.max_depth, spec.min_samples_leaf, spec.max_features};
  if (opt.max_features == 0) {
    opt.max_features = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(train.dim())))));
  }
  std::vector<Tree> trees;
  trees.reserve(static_cast<std::size_t>(spec.n_trees));
  std::vector<std::size_t> rows(n);
  for (int t = 0; t < spec.n_trees; ++t) {
    Rng tree_rng = rng.derive({static_cast<std::uint64_t>(t)});
    for (auto& r : rows) r = static_cast<std::size_t>(tree_rng.uniform_index(n));
    trees.push_back(grow_gini_tree(td.x, td.y, train.num_classes(), rows, opt, tree_rng));
  }
  return std::make_shared<RandomForestClassifier>(train.num_classes(), train.dim(),
                                                  std::move(trees));
}

void RandomForestClassifier::compute_scores(std::span<const double> x,
                                            std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const Tree& t : trees_) {
    auto v = t.evaluate(x);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += v[k];
  }
  for (double& o : out) o /= static_cast<double>(trees_.size());
}

void RandomForestClassifier::write_payload(ByteWriter& w) const {
  w.u32(static_cast<std::uint32_t>(trees_.size()));
  for (const Tree& t : trees_) t.write(w);
}

std::shared_ptr<RandomForestClassifier> RandomForestClassifier::read(
    ByteReader& r, std::uint32_t u, std::size_t dim) {
  const std::uint32_t count = r.u32();
  if (count == 0) throw Error("random forest encoding has no trees");
  std::vector<Tree> trees;
  for (std::uint32_t i = 0; i < count; ++i) trees.push_back(Tree::read(r));
  return std::make_shared<RandomForestClassifier>(u, dim, std::move(trees));
}

}  // namespace fedkt
