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

#include "fedkt/domain.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace fedkt {

Dataset::Dataset(std::vector<Example> examples, std::uint32_t num_classes,
                 std::size_t dim)
    : examples_(std::move(examples)), num_classes_(num_classes), dim_(dim) {
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const Example& e = examples_[i];
    if (e.features.size() != dim_) {
      throw Error("example " + std::to_string(i) + " has dimension " +
                  std::to_string(e.features.size()) + ", expected " +
                  std::to_string(dim_));
    }
    if (e.label && *e.label >= num_classes_) {
      throw Error("example " + std::to_string(i) + " has label " +
                  std::to_string(*e.label) + " >= num_classes " +
                  std::to_string(num_classes_));
    }
  }
}

ClassId Dataset::label(std::size_t i) const {
  const auto& l = examples_.at(i).label;
  if (!l) throw Error("example " + std::to_string(i) + " is unlabeled");
  return *l;
}

bool Dataset::fully_labeled() const {
  return std::all_of(examples_.begin(), examples_.end(),
                     [](const Example& e) { return e.label.has_value(); });
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Example> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(examples_.at(i));
  Dataset d(std::move(out), num_classes_, dim_);
  d.label_names_ = label_names_;
  return d;
}

Dataset Dataset::without_labels() const {
  std::vector<Example> out = examples_;
  for (Example& e : out) e.label.reset();
  Dataset d(std::move(out), num_classes_, dim_);
  d.label_names_ = label_names_;
  return d;
}

Dataset Dataset::with_labels(std::span<const ClassId> labels) const {
  if (labels.size() != examples_.size()) {
    throw Error("with_labels: label count does not match example count");
  }
  std::vector<Example> out = examples_;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].label = labels[i];
  Dataset d(std::move(out), num_classes_, dim_);
  d.label_names_ = label_names_;
  return d;
}

std::vector<std::size_t> Dataset::class_histogram() const {
  std::vector<std::size_t> h(num_classes_, 0);
  for (const Example& e : examples_) {
    if (e.label) ++h[*e.label];
  }
  return h;
}

void Dataset::set_label_names(std::vector<std::string> names) {
  label_names_ = std::move(names);
}

VoteHistogram::VoteHistogram(std::uint32_t num_classes)
    : counts_(num_classes, 0.0) {
  if (num_classes == 0) throw Error("VoteHistogram needs at least one class");
}

VoteHistogram::VoteHistogram(std::vector<double> counts,
                             std::uint32_t num_classes)
    : counts_(std::move(counts)) {
  if (num_classes == 0) throw Error("VoteHistogram needs at least one class");
  if (counts_.size() != num_classes) {
    throw Error("VoteHistogram length " + std::to_string(counts_.size()) +
                " does not match class count " + std::to_string(num_classes));
  }
}

double VoteHistogram::total() const {
  double t = 0.0;
  for (double c : counts_) t += c;
  return t;
}

double VoteHistogram::top2_gap() const {
  if (counts_.size() < 2) return 0.0;
  double first = -INFINITY, second = -INFINITY;
  for (double c : counts_) {
    if (c > first) {
      second = first;
      first = c;
    } else if (c > second) {
      second = c;
    }
  }
  return first - second;
}

bool VoteHistogram::is_integral() const {
  return std::all_of(counts_.begin(), counts_.end(),
                     [](double c) { return std::floor(c) == c; });
}

bool VoteHistogram::all_zero() const {
  return std::all_of(counts_.begin(), counts_.end(),
                     [](double c) { return c == 0.0; });
}

ClassId argmax_first(std::span<const double> values) {
  if (values.empty()) throw Error("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<ClassId>(best);
}

std::string_view to_string(PrivacyLevel level) {
  switch (level) {
    case PrivacyLevel::kL0:
      return "L0";
    case PrivacyLevel::kL1:
      return "L1";
    case PrivacyLevel::kL2:
      return "L2";
  }
  return "?";
}

PrivacyLevel parse_privacy_level(std::string_view text) {
  if (text == "L0" || text == "l0") return PrivacyLevel::kL0;
  if (text == "L1" || text == "l1") return PrivacyLevel::kL1;
  if (text == "L2" || text == "l2") return PrivacyLevel::kL2;
  throw Error("unknown privacy level '" + std::string(text) + "'");
}

}  // namespace fedkt
