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

#ifndef FEDKT_DOMAIN_H_
#define FEDKT_DOMAIN_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fedkt {

// Dense class index in [0, u).
using ClassId = std::uint32_t;

// Every recoverable failure in the library surfaces as this exception. The
// message is meant for humans; callers that need to know where a pipeline
// failed wrap it with a stage name (see harness).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Example {
  std::vector<double> features;
  std::optional<ClassId> label;
};

// An ordered, immutable collection of examples sharing one feature dimension
// and one class count. Public (auxiliary) datasets carry no labels.
class Dataset {
 public:
  Dataset() = default;
  // Throws Error if dimensions disagree or a label is >= num_classes.
  Dataset(std::vector<Example> examples, std::uint32_t num_classes,
          std::size_t dim);

  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  std::size_t dim() const { return dim_; }
  std::uint32_t num_classes() const { return num_classes_; }

  const Example& operator[](std::size_t i) const { return examples_[i]; }
  std::span<const double> features(std::size_t i) const {
    return examples_[i].features;
  }
  const std::vector<Example>& examples() const { return examples_; }

  // Label of example i; throws if the example is unlabeled.
  ClassId label(std::size_t i) const;
  bool fully_labeled() const;

  // Examples at `indices`, in that order.
  Dataset subset(std::span<const std::size_t> indices) const;
  Dataset without_labels() const;
  // Same features, labels replaced by `labels` (one per example).
  Dataset with_labels(std::span<const ClassId> labels) const;

  // Per-class example counts over labeled examples.
  std::vector<std::size_t> class_histogram() const;

  // Human-readable names for class ids, e.g. from a CSV label column.
  const std::vector<std::string>& label_names() const { return label_names_; }
  void set_label_names(std::vector<std::string> names);

 private:
  std::vector<Example> examples_;
  std::uint32_t num_classes_ = 0;
  std::size_t dim_ = 0;
  std::vector<std::string> label_names_;
};

// Per-class vote counts for a single query. Counts are real-valued so noise
// can be added in place; the length always equals the class count.
class VoteHistogram {
 public:
  explicit VoteHistogram(std::uint32_t num_classes);
  // Throws Error if counts.size() != num_classes.
  VoteHistogram(std::vector<double> counts, std::uint32_t num_classes);

  std::uint32_t num_classes() const {
    return static_cast<std::uint32_t>(counts_.size());
  }
  double operator[](ClassId c) const { return counts_[c]; }
  double& operator[](ClassId c) { return counts_[c]; }
  std::span<const double> counts() const { return counts_; }

  double total() const;
  // Largest minus second-largest count; 0 when u == 1.
  double top2_gap() const;
  bool is_integral() const;
  bool all_zero() const;

 private:
  std::vector<double> counts_;
};

// Index of the maximal element; ties go to the smallest index.
ClassId argmax_first(std::span<const double> values);

enum class PrivacyLevel { kL0, kL1, kL2 };

std::string_view to_string(PrivacyLevel level);
// Accepts "L0"/"l0" etc.
PrivacyLevel parse_privacy_level(std::string_view text);

}  // namespace fedkt

#endif  // FEDKT_DOMAIN_H_
