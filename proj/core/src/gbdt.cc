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
namespace {

constexpr double kMinHessian = 1e-16;
constexpr double kProbClamp = 1e-12;

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

void softmax(std::span<const double> z, std::span<double> p) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) sum += (p[k] = std::exp(z[k] - m));
  for (double& v : p) v /= sum;
}

// Mean log-loss of raw scores F (row-major, `outputs` per row).
double log_loss(std::span<const double> f, std::span<const ClassId> y,
                std::size_t outputs) {
  double total = 0.0;
  std::vector<double> p(outputs);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (outputs == 1) {
      const double z = f[i];
      // log(1 + e^{-z}) for y=1, log(1 + e^{z}) for y=0, computed stably.
      const double s = y[i] == 1 ? -z : z;
      total += s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
    } else {
      softmax(f.subspan(i * outputs, outputs), p);
      total -= std::log(std::max(p[y[i]], kProbClamp));
    }
  }
  return total / static_cast<double>(y.size());
}

}  // namespace

std::shared_ptr<GbdtClassifier> fit_gbdt(const ModelSpec& spec,
                                         const Dataset& train, Rng& /*rng*/,
                                         std::vector<double>* loss_history) {
  const TrainingData td = TrainingData::from(train);
  const std::size_t n = td.x.rows();
  const std::uint32_t u = train.num_classes();
  const std::size_t outputs = u <= 2 ? 1 : u;

  std::vector<double> counts(u, 0.0);
  for (ClassId c : td.y) counts[c] += 1.0;
  std::vector<double> base(outputs);
  if (outputs == 1) {
    const double p = std::clamp(counts.size() > 1 ? counts[1] / n : 0.0, 1e-6, 1 - 1e-6);
    base[0] = std::log(p / (1 - p));
  } else {
    for (std::size_t k = 0; k < outputs; ++k) {
      base[k] = std::log((counts[k] + 1.0) / (static_cast<double>(n) + u));
    }
  }

  std::vector<Tree> trees;
  if (auto only = td.single_class()) {
    // Constant model: the prior already favors the class; make it decisive.
    if (outputs == 1) {
      base[0] = *only == 1 ? 30.0 : -30.0;
    } else {
      std::fill(base.begin(), base.end(), 0.0);
      base[*only] = 1.0;
    }
    if (loss_history) loss_history->assign(1, 0.0);
    return std::make_shared<GbdtClassifier>(u, train.dim(), base, std::move(trees));
  }

  std::vector<double> f(n * outputs);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(base.begin(), base.end(), f.begin() + i * outputs);
  }
  if (loss_history) loss_history->assign(1, log_loss(f, td.y, outputs));

  GradientTreeOptions opt{spec.max_depth, 1.0, 1.0};
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::vector<double> grad(n), hess(n), p(outputs);
  trees.reserve(static_cast<std::size_t>(spec.n_trees) * outputs);

  for (int round = 0; round < spec.n_trees; ++round) {
    for (std::size_t k = 0; k < outputs; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        double pk;
        if (outputs == 1) {
          pk = sigmoid(f[i]);
          grad[i] = pk - (td.y[i] == 1 ? 1.0 : 0.0);
        } else {
          softmax(std::span<const double>(f).subspan(i * outputs, outputs), p);
          pk = p[k];
          grad[i] = pk - (td.y[i] == k ? 1.0 : 0.0);
        }
        hess[i] = std::max(pk * (1.0 - pk), kMinHessian);
      }
      Tree tree = grow_gradient_tree(td.x, grad, hess, rows, opt);
      for (std::size_t node = 0; node < tree.num_nodes(); ++node) {
        tree.mutable_value(node)[0] *= spec.learning_rate;
      }
      trees.push_back(std::move(tree));
    }
    // Scores are updated after all class trees of the round are grown so that
    // each round is a single step from the same starting point.
    const std::size_t first = trees.size() - outputs;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < outputs; ++k) {
        f[i * outputs + k] += trees[first + k].evaluate(td.x.row(i))[0];
      }
    }
    if (loss_history) loss_history->push_back(log_loss(f, td.y, outputs));
  }
  return std::make_shared<GbdtClassifier>(u, train.dim(), std::move(base),
                                          std::move(trees));
}

void GbdtClassifier::raw_scores(std::span<const double> x,
                                std::span<double> out) const {
  const std::size_t k_out = base_score_.size();
  std::copy(base_score_.begin(), base_score_.end(), out.begin());
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    out[t % k_out] += trees_[t].evaluate(x)[0];
  }
}

void GbdtClassifier::compute_scores(std::span<const double> x,
                                    std::span<double> out) const {
  if (base_score_.size() == 1) {
    double z;
    raw_scores(x, std::span<double>(&z, 1));
    const double p1 = sigmoid(z);
    out[0] = 1.0 - p1;
    if (out.size() > 1) out[1] = p1;
    return;
  }
  raw_scores(x, out);
}

void GbdtClassifier::write_payload(ByteWriter& w) const {
  w.f64s(base_score_);
  w.u32(static_cast<std::uint32_t>(trees_.size()));
  for (const Tree& t : trees_) t.write(w);
}

std::shared_ptr<GbdtClassifier> GbdtClassifier::read(ByteReader& r,
                                                     std::uint32_t u,
                                                     std::size_t dim) {
  std::vector<double> base = r.f64s();
  if (base.empty()) throw Error("gbdt encoding has no outputs");
  const std::uint32_t count = r.u32();
  std::vector<Tree> trees;
  for (std::uint32_t i = 0; i < count; ++i) trees.push_back(Tree::read(r));
  return std::make_shared<GbdtClassifier>(u, dim, std::move(base), std::move(trees));
}

}  // namespace fedkt
