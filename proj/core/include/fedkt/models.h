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

#ifndef FEDKT_MODELS_H_
#define FEDKT_MODELS_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "fedkt/domain.h"
#include "fedkt/rng.h"
#include "fedkt/serialization.h"

namespace fedkt {

enum class ModelKind : std::uint8_t {
  kDecisionTree = 1,
  kRandomForest = 2,
  kGbdt = 3,
  kLogisticRegression = 4,
  kMlp = 5,
};

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

// Learner choice plus hyperparameters. Fields irrelevant to a kind are
// ignored by it; `defaults()` fills in the values used by the experiments.
struct ModelSpec {
  ModelKind kind = ModelKind::kDecisionTree;
  // Trees.
  int max_depth = 6;
  int n_trees = 20;  // forest size, or boosting rounds for gbdt
  std::size_t min_samples_leaf = 1;
  // 0 means sqrt(dim) for forests and all features for single trees/gbdt.
  std::size_t max_features = 0;
  // Gradient-based learners (gbdt uses it as shrinkage).
  double learning_rate = 0.05;
  int epochs = 100;
  std::size_t batch_size = 32;
  double l2 = 1e-6;
  std::vector<std::size_t> hidden = {100, 100};

  static ModelSpec defaults(ModelKind kind);
  // Throws Error on non-positive hyperparameters or empty hidden sizes.
  void validate() const;
};

// A trained classifier. Immutable after construction, so one instance may be
// shared between threads and between the party and server tiers.
class Classifier {
 public:
  static constexpr std::uint16_t kFormatVersion = 1;

  Classifier(std::uint32_t num_classes, std::size_t dim)
      : num_classes_(num_classes), dim_(dim) {}
  virtual ~Classifier() = default;

  virtual ModelKind kind() const = 0;
  std::uint32_t num_classes() const { return num_classes_; }
  std::size_t dim() const { return dim_; }

  // Throws Error if x.size() != dim(). Ties between class scores resolve to
  // the smallest class id.
  ClassId predict(std::span<const double> x) const;
  // Per-class scores whose argmax is the prediction.
  std::vector<double> scores(std::span<const double> x) const;

  // Canonical encoding:
  //   "FKTM" | u16 version | u8 kind | u8 0 | u32 num_classes | u64 dim |
  //   kind-specific payload
  // All integers and doubles little-endian.
  std::vector<std::uint8_t> serialize() const;

 protected:
  virtual void compute_scores(std::span<const double> x,
                              std::span<double> out) const = 0;
  virtual void write_payload(ByteWriter& w) const = 0;

 private:
  std::uint32_t num_classes_;
  std::size_t dim_;
};

using ClassifierPtr = std::shared_ptr<const Classifier>;

// Trains a classifier of spec.kind. Throws Error on an empty or partially
// unlabeled training set. A single-class training set yields a classifier
// that predicts that class everywhere.
ClassifierPtr fit(const ModelSpec& spec, const Dataset& train, Rng& rng);

std::size_t serialized_size(const Classifier& model);
ClassifierPtr deserialize(std::span<const std::uint8_t> bytes);

// Fraction of labeled examples predicted correctly; 0 for an empty set.
double accuracy(const Classifier& model, const Dataset& data);

}  // namespace fedkt

#endif  // FEDKT_MODELS_H_
