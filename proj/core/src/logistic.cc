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

#include "fedkt/learners.h"
#include "learner_common.h"

namespace fedkt {

LogisticRegressionClassifier::LogisticRegressionClassifier(
    std::uint32_t num_classes, std::size_t dim, Standardizer standardizer,
    Matrix weights, std::vector<double> bias)
    : Classifier(num_classes, dim),
      standardizer_(std::move(standardizer)),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
  if (weights_.rows() != num_classes || weights_.cols() != dim ||
      bias_.size() != num_classes || standardizer_.mean.size() != dim) {
    throw Error("logistic regression parameter shapes do not match");
  }
}

LogisticRegressionClassifier::LogisticRegressionClassifier(std::uint32_t num_classes,
                                                           std::size_t dim)
    : LogisticRegressionClassifier(
          num_classes, dim,
          Standardizer{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)},
          Matrix(num_classes, dim), std::vector<double>(num_classes, 0.0)) {}

void LogisticRegressionClassifier::compute_scores(std::span<const double> x,
                                                  std::span<double> out) const {
  std::vector<double> z(x.size());
  standardizer_.apply(x, z);
  for (std::size_t k = 0; k < bias_.size(); ++k) {
    double s = bias_[k];
    auto w = weights_.row(k);
    for (std::size_t j = 0; j < z.size(); ++j) s += w[j] * z[j];
    out[k] = s;
  }
}

void LogisticRegressionClassifier::write_payload(ByteWriter& w) const {
  standardizer_.write(w);
  w.f64s(weights_.flat());
  w.f64s(bias_);
}

std::shared_ptr<LogisticRegressionClassifier> LogisticRegressionClassifier::read(
    ByteReader& r, std::uint32_t u, std::size_t dim) {
  Standardizer st = Standardizer::read(r);
  std::vector<double> flat = r.f64s();
  std::vector<double> bias = r.f64s();
  if (flat.size() != static_cast<std::size_t>(u) * dim) {
    throw Error("logistic regression weight block has the wrong size");
  }
  Matrix w(u, dim);
  std::copy(flat.begin(), flat.end(), w.flat().begin());
  return std::make_shared<LogisticRegressionClassifier>(u, dim, std::move(st),
                                                        std::move(w), std::move(bias));
}

// Full-batch gradient descent on the mean softmax cross-entropy plus
// 0.5 * l2 * ||W||^2.
std::shared_ptr<LogisticRegressionClassifier> fit_logistic_regression(
    const ModelSpec& spec, const Dataset& train, Rng& /*rng*/) {
  TrainingData td = TrainingData::from(train);
  const std::uint32_t u = train.num_classes();
  const std::size_t d = train.dim(), n = td.x.rows();
  Standardizer st = Standardizer::fit(td.x);
  Matrix w(u, d);
  std::vector<double> b(u, 0.0);
  if (auto only = td.single_class()) {
    b[*only] = 1.0;
    return std::make_shared<LogisticRegressionClassifier>(u, d, std::move(st),
                                                          std::move(w), std::move(b));
  }
  st.apply_in_place(td.x);

  Matrix gw(u, d);
  std::vector<double> gb(u), z(u);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    std::fill(gw.flat().begin(), gw.flat().end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto xi = td.x.row(i);
      double m = -INFINITY;
      for (std::size_t k = 0; k < u; ++k) {
        double s = b[k];
        auto wk = w.row(k);
        for (std::size_t j = 0; j < d; ++j) s += wk[j] * xi[j];
        z[k] = s;
        m = std::max(m, s);
      }
      double sum = 0.0;
      for (double& v : z) sum += (v = std::exp(v - m));
      for (std::size_t k = 0; k < u; ++k) {
        const double delta = z[k] / sum - (td.y[i] == k ? 1.0 : 0.0);
        gb[k] += delta;
        auto gk = gw.row(k);
        for (std::size_t j = 0; j < d; ++j) gk[j] += delta * xi[j];
      }
    }
    for (std::size_t k = 0; k < u; ++k) {
      b[k] -= spec.learning_rate * gb[k] * inv_n;
      auto wk = w.row(k);
      auto gk = gw.row(k);
      for (std::size_t j = 0; j < d; ++j) {
        wk[j] -= spec.learning_rate * (gk[j] * inv_n + spec.l2 * wk[j]);
      }
    }
  }
  return std::make_shared<LogisticRegressionClassifier>(u, d, std::move(st),
                                                        std::move(w), std::move(b));
}

}  // namespace fedkt
