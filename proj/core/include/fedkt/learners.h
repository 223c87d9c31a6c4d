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

#ifndef FEDKT_LEARNERS_H_
#define FEDKT_LEARNERS_H_

// Concrete learners behind fedkt::fit. Exposed so tests and benchmarks can
// reach training internals (boosting loss traces, MLP gradients).

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fedkt/matrix.h"
#include "fedkt/models.h"

namespace fedkt {

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
};

// Binary decision tree with a fixed-width value vector at every node: class
// probabilities for CART trees, a single additive weight for boosting trees.
class Tree {
 public:
  explicit Tree(std::size_t value_width = 1) : value_width_(value_width) {}

  std::size_t value_width() const { return value_width_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  const TreeNode& node(std::size_t i) const { return nodes_[i]; }
  std::span<const double> value(std::size_t i) const {
    return {values_.data() + i * value_width_, value_width_};
  }
  std::span<double> mutable_value(std::size_t i) {
    return {values_.data() + i * value_width_, value_width_};
  }

  std::int32_t add_node(std::span<const double> value);
  void set_split(std::int32_t node, std::int32_t feature, double threshold,
                 std::int32_t left, std::int32_t right);

  // Value of the leaf reached by x.
  std::span<const double> evaluate(std::span<const double> x) const;
  int depth() const;
  std::size_t num_leaves() const;

  void write(ByteWriter& w) const;
  static Tree read(ByteReader& r);

 private:
  std::size_t value_width_;
  std::vector<TreeNode> nodes_;
  std::vector<double> values_;
};

struct GiniTreeOptions {
  int max_depth = 6;
  std::size_t min_samples_leaf = 1;
  // Candidate features sampled per node; 0 or >= dim means all features.
  std::size_t max_features = 0;
};

// CART with Gini impurity and exhaustive threshold search over the sorted
// feature values at each node. Leaf values are class frequencies. `rows` may
// contain repeats (bootstrap samples).
Tree grow_gini_tree(const Matrix& x, std::span<const ClassId> y,
                    std::uint32_t num_classes, std::span<const std::size_t> rows,
                    const GiniTreeOptions& options, Rng& rng);

struct GradientTreeOptions {
  int max_depth = 6;
  double lambda = 1.0;            // L2 on leaf weights
  double min_child_weight = 1.0;  // minimum hessian sum per child
};

// Second-order regression tree: split gain
//   G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda),
// leaf weight -G/(H+lambda).
Tree grow_gradient_tree(const Matrix& x, std::span<const double> grad,
                        std::span<const double> hess,
                        std::span<const std::size_t> rows,
                        const GradientTreeOptions& options);

// Per-feature affine map to zero mean and unit variance (constant features
// are only centered).
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> inv_std;

  static Standardizer fit(const Matrix& x);
  void apply(std::span<const double> x, std::span<double> out) const;
  void apply_in_place(Matrix& x) const;
  void write(ByteWriter& w) const;
  static Standardizer read(ByteReader& r);
};

class DecisionTreeClassifier final : public Classifier {
 public:
  DecisionTreeClassifier(std::uint32_t num_classes, std::size_t dim, Tree tree)
      : Classifier(num_classes, dim), tree_(std::move(tree)) {}
  ModelKind kind() const override { return ModelKind::kDecisionTree; }
  const Tree& tree() const { return tree_; }
  static std::shared_ptr<DecisionTreeClassifier> read(ByteReader& r,
                                                      std::uint32_t u,
                                                      std::size_t dim);

 protected:
  void compute_scores(std::span<const double> x, std::span<double> out) const override;
  void write_payload(ByteWriter& w) const override;

 private:
  Tree tree_;
};

class RandomForestClassifier final : public Classifier {
 public:
  RandomForestClassifier(std::uint32_t num_classes, std::size_t dim,
                         std::vector<Tree> trees)
      : Classifier(num_classes, dim), trees_(std::move(trees)) {}
  ModelKind kind() const override { return ModelKind::kRandomForest; }
  std::size_t num_trees() const { return trees_.size(); }
  static std::shared_ptr<RandomForestClassifier> read(ByteReader& r,
                                                      std::uint32_t u,
                                                      std::size_t dim);

 protected:
  void compute_scores(std::span<const double> x, std::span<double> out) const override;
  void write_payload(ByteWriter& w) const override;

 private:
  std::vector<Tree> trees_;
};

// Binary tasks keep one raw score (log-odds of class 1); multiclass tasks
// keep one score per class and use one tree per class per round (softmax).
class GbdtClassifier final : public Classifier {
 public:
  GbdtClassifier(std::uint32_t num_classes, std::size_t dim,
                 std::vector<double> base_score, std::vector<Tree> trees)
      : Classifier(num_classes, dim),
        base_score_(std::move(base_score)),
        trees_(std::move(trees)) {}
  ModelKind kind() const override { return ModelKind::kGbdt; }
  std::size_t outputs() const { return base_score_.size(); }
  std::size_t num_trees() const { return trees_.size(); }
  // Raw additive scores (length outputs()).
  void raw_scores(std::span<const double> x, std::span<double> out) const;
  static std::shared_ptr<GbdtClassifier> read(ByteReader& r, std::uint32_t u,
                                              std::size_t dim);

 protected:
  void compute_scores(std::span<const double> x, std::span<double> out) const override;
  void write_payload(ByteWriter& w) const override;

 private:
  std::vector<double> base_score_;
  std::vector<Tree> trees_;
};

// Multinomial logistic regression on standardized features.
class LogisticRegressionClassifier final : public Classifier {
 public:
  LogisticRegressionClassifier(std::uint32_t num_classes, std::size_t dim,
                               Standardizer standardizer, Matrix weights,
                               std::vector<double> bias);
  // All-zero model with identity standardization.
  LogisticRegressionClassifier(std::uint32_t num_classes, std::size_t dim);
  ModelKind kind() const override { return ModelKind::kLogisticRegression; }
  static std::shared_ptr<LogisticRegressionClassifier> read(ByteReader& r,
                                                            std::uint32_t u,
                                                            std::size_t dim);

 protected:
  void compute_scores(std::span<const double> x, std::span<double> out) const override;
  void write_payload(ByteWriter& w) const override;

 private:
  Standardizer standardizer_;
  Matrix weights_;  // num_classes x dim
  std::vector<double> bias_;
};

// Fully connected ReLU network with a softmax output. Parameters live in one
// flat vector: for each layer, the (out x in) weight matrix row-major, then
// the bias.
class MlpNetwork {
 public:
  MlpNetwork(std::size_t inputs, std::span<const std::size_t> hidden,
             std::size_t outputs);

  // He-uniform weights, zero biases.
  void initialize(Rng& rng);

  std::size_t num_parameters() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }

  void forward(std::span<const double> x, std::span<double> logits) const;

  // Mean softmax cross-entropy over `rows` of (x, y) plus
  // 0.5 * l2 * ||params||^2. Writes d(loss)/d(params) into `grad`.
  double loss_and_gradient(const Matrix& x, std::span<const ClassId> y,
                           std::span<const std::size_t> rows, double l2,
                           std::span<double> grad) const;

  void write(ByteWriter& w) const;
  static MlpNetwork read(ByteReader& r);

 private:
  std::vector<std::size_t> sizes_;    // inputs, hidden..., outputs
  std::vector<std::size_t> offsets_;  // start of each layer's weights
  std::vector<double> params_;
};

class MlpClassifier final : public Classifier {
 public:
  MlpClassifier(std::uint32_t num_classes, std::size_t dim,
                Standardizer standardizer, MlpNetwork network)
      : Classifier(num_classes, dim),
        standardizer_(std::move(standardizer)),
        network_(std::move(network)) {}
  ModelKind kind() const override { return ModelKind::kMlp; }
  const MlpNetwork& network() const { return network_; }
  static std::shared_ptr<MlpClassifier> read(ByteReader& r, std::uint32_t u,
                                             std::size_t dim);

 protected:
  void compute_scores(std::span<const double> x, std::span<double> out) const override;
  void write_payload(ByteWriter& w) const override;

 private:
  Standardizer standardizer_;
  MlpNetwork network_;
};

std::shared_ptr<DecisionTreeClassifier> fit_decision_tree(const ModelSpec& spec,
                                                          const Dataset& train,
                                                          Rng& rng);
std::shared_ptr<RandomForestClassifier> fit_random_forest(const ModelSpec& spec,
                                                          const Dataset& train,
                                                          Rng& rng);
// When `loss_history` is non-null it receives the mean training log-loss
// before the first round followed by the loss after every round.
std::shared_ptr<GbdtClassifier> fit_gbdt(const ModelSpec& spec,
                                         const Dataset& train, Rng& rng,
                                         std::vector<double>* loss_history = nullptr);
std::shared_ptr<LogisticRegressionClassifier> fit_logistic_regression(
    const ModelSpec& spec, const Dataset& train, Rng& rng);
std::shared_ptr<MlpClassifier> fit_mlp(const ModelSpec& spec,
                                       const Dataset& train, Rng& rng);

}  // namespace fedkt

#endif  // FEDKT_LEARNERS_H_
