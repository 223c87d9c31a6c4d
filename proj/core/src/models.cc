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

#include "fedkt/models.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "fedkt/learners.h"

namespace fedkt {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'F', 'K', 'T', 'M'};

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kDecisionTree:
      return "decision_tree";
    case ModelKind::kRandomForest:
      return "random_forest";
    case ModelKind::kGbdt:
      return "gbdt";
    case ModelKind::kLogisticRegression:
      return "logistic_regression";
    case ModelKind::kMlp:
      return "mlp";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  for (ModelKind k : {ModelKind::kDecisionTree, ModelKind::kRandomForest,
                      ModelKind::kGbdt, ModelKind::kLogisticRegression,
                      ModelKind::kMlp}) {
    if (text == to_string(k)) return k;
  }
  throw Error("unknown model kind '" + std::string(text) + "'");
}

ModelSpec ModelSpec::defaults(ModelKind kind) {
  ModelSpec s;
  s.kind = kind;
  switch (kind) {
    case ModelKind::kDecisionTree:
      break;
    case ModelKind::kRandomForest:
      s.n_trees = 20;
      break;
    case ModelKind::kGbdt:
      s.n_trees = 100;
      s.learning_rate = 0.05;
      break;
    case ModelKind::kLogisticRegression:
      s.learning_rate = 0.5;
      s.epochs = 200;
      s.l2 = 1e-6;
      break;
    case ModelKind::kMlp:
      s.learning_rate = 0.001;
      s.epochs = 100;
      s.batch_size = 32;
      s.l2 = 1e-6;
      s.hidden = {100, 100};
      break;
  }
  return s;
}

void ModelSpec::validate() const {
  auto fail = [&](const std::string& what) {
    throw Error(std::string(to_string(kind)) + " spec: " + what);
  };
  switch (kind) {
    case ModelKind::kDecisionTree:
    case ModelKind::kRandomForest:
    case ModelKind::kGbdt:
      if (max_depth <= 0) fail("max_depth must be positive");
      if (n_trees <= 0) fail("n_trees must be positive");
      if (min_samples_leaf == 0) fail("min_samples_leaf must be positive");
      if (kind == ModelKind::kGbdt && !(learning_rate > 0)) {
        fail("learning_rate must be positive");
      }
      break;
    case ModelKind::kMlp:
      if (hidden.empty()) fail("hidden sizes must be nonempty");
      if (std::find(hidden.begin(), hidden.end(), 0) != hidden.end()) {
        fail("hidden sizes must be positive");
      }
      if (batch_size == 0) fail("batch_size must be positive");
      [[fallthrough]];
    case ModelKind::kLogisticRegression:
      if (!(learning_rate > 0)) fail("learning_rate must be positive");
      if (epochs <= 0) fail("epochs must be positive");
      if (l2 < 0) fail("l2 must be non-negative");
      break;
  }
}

std::vector<double> Classifier::scores(std::span<const double> x) const {
  if (x.size() != dim_) {
    throw Error("feature dimension " + std::to_string(x.size()) +
                " does not match model dimension " + std::to_string(dim_));
  }
  std::vector<double> out(num_classes_, 0.0);
  compute_scores(x, out);
  return out;
}

ClassId Classifier::predict(std::span<const double> x) const {
  return argmax_first(scores(x));
}

std::vector<std::uint8_t> Classifier::serialize() const {
  ByteWriter w;
  w.raw(kMagic);
  w.u16(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(kind()));
  w.u8(0);
  w.u32(num_classes_);
  w.u64(dim_);
  write_payload(w);
  return w.take();
}

std::size_t serialized_size(const Classifier& model) {
  return model.serialize().size();
}

ClassifierPtr deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.raw(kMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
    throw Error("not a model encoding (bad magic)");
  }
  const std::uint16_t version = r.u16();
  if (version != Classifier::kFormatVersion) {
    throw Error("unsupported model format version " + std::to_string(version));
  }
  const auto kind = static_cast<ModelKind>(r.u8());
  r.u8();
  const std::uint32_t u = r.u32();
  const std::size_t dim = r.u64();
  ClassifierPtr model;
  switch (kind) {
    case ModelKind::kDecisionTree:
      model = DecisionTreeClassifier::read(r, u, dim);
      break;
    case ModelKind::kRandomForest:
      model = RandomForestClassifier::read(r, u, dim);
      break;
    case ModelKind::kGbdt:
      model = GbdtClassifier::read(r, u, dim);
      break;
    case ModelKind::kLogisticRegression:
      model = LogisticRegressionClassifier::read(r, u, dim);
      break;
    case ModelKind::kMlp:
      model = MlpClassifier::read(r, u, dim);
      break;
    default:
      throw Error("unknown model kind tag " + std::to_string(static_cast<int>(kind)));
  }
  if (r.remaining() != 0) throw Error("trailing bytes after model encoding");
  return model;
}

ClassifierPtr fit(const ModelSpec& spec, const Dataset& train, Rng& rng) {
  spec.validate();
  if (train.empty()) throw Error("cannot fit on an empty training set");
  if (!train.fully_labeled()) throw Error("training set has unlabeled examples");
  switch (spec.kind) {
    case ModelKind::kDecisionTree:
      return fit_decision_tree(spec, train, rng);
    case ModelKind::kRandomForest:
      return fit_random_forest(spec, train, rng);
    case ModelKind::kGbdt:
      return fit_gbdt(spec, train, rng);
    case ModelKind::kLogisticRegression:
      return fit_logistic_regression(spec, train, rng);
    case ModelKind::kMlp:
      return fit_mlp(spec, train, rng);
  }
  throw Error("unknown model kind");
}

double accuracy(const Classifier& model, const Dataset& data) {
  std::size_t labeled = 0, correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data[i].label) continue;
    ++labeled;
    if (model.predict(data.features(i)) == *data[i].label) ++correct;
  }
  return labeled == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(labeled);
}

Standardizer Standardizer::fit(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
  if (n == 0) return s;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += x(i, j);
  }
  for (double& m : s.mean) m /= static_cast<double>(n);
  std::vector<double> var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double c = x(i, j) - s.mean[j];
      var[j] += c * c;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / static_cast<double>(n));
    s.inv_std[j] = sd > 1e-12 ? 1.0 / sd : 1.0;
  }
  return s;
}

void Standardizer::apply(std::span<const double> x, std::span<double> out) const {
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) * inv_std[j];
}

void Standardizer::apply_in_place(Matrix& x) const {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    apply(r, r);
  }
}

void Standardizer::write(ByteWriter& w) const {
  w.f64s(mean);
  w.f64s(inv_std);
}

Standardizer Standardizer::read(ByteReader& r) {
  Standardizer s{r.f64s(), r.f64s()};
  if (s.mean.size() != s.inv_std.size()) throw Error("standardizer shape mismatch");
  return s;
}

}  // namespace fedkt
