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

namespace fedkt {

std::int32_t Tree::add_node(std::span<const double> value) {
  if (value.size() != value_width_) throw Error("tree node value width mismatch");
  nodes_.push_back(TreeNode{});
  values_.insert(values_.end(), value.begin(), value.end());
  return static_cast<std::int32_t>(nodes_.size() - 1);
}

void Tree::set_split(std::int32_t node, std::int32_t feature, double threshold,
                     std::int32_t left, std::int32_t right) {
  TreeNode& n = nodes_.at(static_cast<std::size_t>(node));
  n.feature = feature;
  n.threshold = threshold;
  n.left = left;
  n.right = right;
}

std::span<const double> Tree::evaluate(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const TreeNode& n = nodes_[i];
    i = static_cast<std::size_t>(
        x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return value(i);
}

int Tree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  // Children are always appended after their parent.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes_[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return best;
}

std::size_t Tree::num_leaves() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

void Tree::write(ByteWriter& w) const {
  w.u32(static_cast<std::uint32_t>(value_width_));
  w.u32(static_cast<std::uint32_t>(nodes_.size()));
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& n = nodes_[i];
    w.i32(n.feature);
    if (n.feature >= 0) {
      w.f64(n.threshold);
      w.i32(n.left);
      w.i32(n.right);
    } else {
      for (double v : value(i)) w.f64(v);
    }
  }
}

Tree Tree::read(ByteReader& r) {
  Tree t(r.u32());
  const std::uint32_t count = r.u32();
  std::vector<double> zero(t.value_width_, 0.0);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::int32_t node = t.add_node(zero);
    const std::int32_t feature = r.i32();
    if (feature >= 0) {
      const double threshold = r.f64();
      const std::int32_t left = r.i32();
      const std::int32_t right = r.i32();
      if (left <= node || right <= node || left >= static_cast<std::int32_t>(count) ||
          right >= static_cast<std::int32_t>(count)) {
        throw Error("corrupt tree encoding");
      }
      t.set_split(node, feature, threshold, left, right);
    } else {
      for (double& v : t.mutable_value(static_cast<std::size_t>(node))) v = r.f64();
    }
  }
  return t;
}

namespace {

struct Entry {
  double value;
  std::size_t row;
};

// Midpoint strictly inside [lo, hi) so that `x <= threshold` separates them.
double split_point(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

void sort_by_feature(const Matrix& x, std::span<const std::size_t> rows,
                     std::size_t feature, std::vector<Entry>& buf) {
  buf.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) buf[i] = {x(rows[i], feature), rows[i]};
  std::sort(buf.begin(), buf.end(), [](const Entry& a, const Entry& b) {
    return a.value < b.value || (a.value == b.value && a.row < b.row);
  });
}

struct Split {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = -INFINITY;
};

void partition_rows(const Matrix& x, std::span<const std::size_t> rows,
                    const Split& split, std::vector<std::size_t>& left,
                    std::vector<std::size_t>& right) {
  for (std::size_t r : rows) {
    (x(r, split.feature) <= split.threshold ? left : right).push_back(r);
  }
}

class GiniGrower {
 public:
  GiniGrower(const Matrix& x, std::span<const ClassId> y, std::uint32_t u,
             const GiniTreeOptions& opt, Rng& rng)
      : x_(x), y_(y), u_(u), opt_(opt), rng_(rng), tree_(u), features_(x.cols()) {
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  Tree grow(std::span<const std::size_t> rows) {
    std::vector<double> counts = class_counts(rows);
    const std::int32_t root = tree_.add_node(normalized(counts));
    grow_node(root, rows, counts, 0);
    return std::move(tree_);
  }

 private:
  std::vector<double> class_counts(std::span<const std::size_t> rows) const {
    std::vector<double> c(u_, 0.0);
    for (std::size_t r : rows) c[y_[r]] += 1.0;
    return c;
  }

  static std::vector<double> normalized(std::vector<double> c) {
    const double n = std::accumulate(c.begin(), c.end(), 0.0);
    if (n > 0) {
      for (double& v : c) v /= n;
    }
    return c;
  }

  std::span<const std::size_t> candidate_features() {
    const std::size_t d = features_.size();
    const std::size_t m = opt_.max_features;
    if (m == 0 || m >= d) return features_;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_.uniform_index(d - i));
      std::swap(features_[i], features_[j]);
    }
    return std::span<const std::size_t>(features_).first(m);
  }

  void grow_node(std::int32_t node, std::span<const std::size_t> rows,
                 const std::vector<double>& counts, int depth) {
    const std::size_t n = rows.size();
    if (depth >= opt_.max_depth) return;
    if (n < 2 * std::max<std::size_t>(opt_.min_samples_leaf, 1)) return;
    const auto nonzero = std::count_if(counts.begin(), counts.end(),
                                       [](double c) { return c > 0; });
    if (nonzero <= 1) return;

    // Sums of squared class counts are integers, so every score below is
    // computed exactly and does not depend on the order rows are visited in.
    double total_sq = 0.0;
    for (double c : counts) total_sq += c * c;
    const double parent = total_sq / static_cast<double>(n);

    Split best;
    auto consider = [&](std::size_t f, std::size_t nl, double left_sq, double right_sq,
                        double lo, double hi) {
      const std::size_t nr = n - nl;
      if (nl < opt_.min_samples_leaf || nr < opt_.min_samples_leaf) return;
      const double score = left_sq / static_cast<double>(nl) + right_sq / static_cast<double>(nr);
      if (score > best.score) best = {true, f, split_point(lo, hi), score};
    };
    std::vector<double> left(u_);
    for (std::size_t f : candidate_features()) {
      if (scan_few_values(rows, f)) {
        // Few distinct values (one-hot and small ordinal columns): sweep the
        // per-value class counts instead of sorting every row.
        if (levels_.size() < 2) continue;
        std::fill(left.begin(), left.end(), 0.0);
        std::size_t nl = 0;
        for (std::size_t j = 0; j + 1 < levels_.size(); ++j) {
          const Level& lv = levels_[j];
          nl += lv.rows;
          for (std::uint32_t k = 0; k < u_; ++k) left[k] += level_counts_[lv.slot * u_ + k];
          double left_sq = 0.0, right_sq = 0.0;
          for (std::uint32_t k = 0; k < u_; ++k) {
            left_sq += left[k] * left[k];
            const double cr = counts[k] - left[k];
            right_sq += cr * cr;
          }
          consider(f, nl, left_sq, right_sq, lv.value, levels_[j + 1].value);
        }
        continue;
      }
      sort_by_feature(x_, rows, f, buf_);
      if (buf_.front().value == buf_.back().value) continue;
      std::fill(left.begin(), left.end(), 0.0);
      double left_sq = 0.0, right_sq = total_sq;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const ClassId k = y_[buf_[i].row];
        const double cr = counts[k] - left[k];
        left_sq += 2.0 * left[k] + 1.0;
        right_sq -= 2.0 * cr - 1.0;
        left[k] += 1.0;
        if (buf_[i].value == buf_[i + 1].value) continue;
        consider(f, i + 1, left_sq, right_sq, buf_[i].value, buf_[i + 1].value);
      }
    }
    // Zero-gain splits are accepted (as in common CART implementations) so
    // symmetric patterns such as XOR can still be carved at depth > 1.
    if (!best.found || best.score < parent - 1e-9) return;

    std::vector<std::size_t> lrows, rrows;
    partition_rows(x_, rows, best, lrows, rrows);
    const std::vector<double> lc = class_counts(lrows), rc = class_counts(rrows);
    const std::int32_t l = tree_.add_node(normalized(lc));
    const std::int32_t r = tree_.add_node(normalized(rc));
    tree_.set_split(node, static_cast<std::int32_t>(best.feature), best.threshold, l, r);
    grow_node(l, lrows, lc, depth + 1);
    grow_node(r, rrows, rc, depth + 1);
  }

  struct Level {
    double value;
    std::size_t slot;
    std::size_t rows;
  };
  static constexpr std::size_t kMaxLevels = 16;

  // Collects the distinct values of feature f over `rows` with per-class
  // counts, sorted by value. Returns false once more than kMaxLevels appear.
  bool scan_few_values(std::span<const std::size_t> rows, std::size_t f) {
    levels_.clear();
    level_counts_.assign(kMaxLevels * u_, 0.0);
    for (std::size_t r : rows) {
      const double v = x_(r, f);
      std::size_t j = 0;
      while (j < levels_.size() && levels_[j].value != v) ++j;
      if (j == levels_.size()) {
        if (levels_.size() == kMaxLevels) return false;
        levels_.push_back({v, j, 0});
      }
      ++levels_[j].rows;
      level_counts_[j * u_ + y_[r]] += 1.0;
    }
    std::sort(levels_.begin(), levels_.end(),
              [](const Level& a, const Level& b) { return a.value < b.value; });
    return true;
  }

  const Matrix& x_;
  std::span<const ClassId> y_;
  std::uint32_t u_;
  GiniTreeOptions opt_;
  Rng& rng_;
  Tree tree_;
  std::vector<std::size_t> features_;
  std::vector<Entry> buf_;
  std::vector<Level> levels_;
  std::vector<double> level_counts_;
};

class GradientGrower {
 public:
  GradientGrower(const Matrix& x, std::span<const double> g,
                 std::span<const double> h, const GradientTreeOptions& opt)
      : x_(x), g_(g), h_(h), opt_(opt), tree_(1) {}

  Tree grow(std::span<const std::size_t> rows) {
    const auto [g, h] = sums(rows);
    const double w = -g / (h + opt_.lambda);
    const std::int32_t root = tree_.add_node(std::span<const double>(&w, 1));
    grow_node(root, rows, g, h, 0);
    return std::move(tree_);
  }

 private:
  std::pair<double, double> sums(std::span<const std::size_t> rows) const {
    double g = 0.0, h = 0.0;
    for (std::size_t r : rows) {
      g += g_[r];
      h += h_[r];
    }
    return {g, h};
  }

  double score(double g, double h) const { return g * g / (h + opt_.lambda); }

  void grow_node(std::int32_t node, std::span<const std::size_t> rows, double g,
                 double h, int depth) {
    if (depth >= opt_.max_depth || rows.size() < 2) return;
    const double parent = score(g, h);
    Split best;
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      sort_by_feature(x_, rows, f, buf_);
      if (buf_.front().value == buf_.back().value) continue;
      double gl = 0.0, hl = 0.0;
      for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        gl += g_[buf_[i].row];
        hl += h_[buf_[i].row];
        if (buf_[i].value == buf_[i + 1].value) continue;
        const double hr = h - hl;
        if (hl < opt_.min_child_weight || hr < opt_.min_child_weight) continue;
        const double s = score(gl, hl) + score(g - gl, hr);
        if (s > best.score) {
          best = {true, f, split_point(buf_[i].value, buf_[i + 1].value), s};
        }
      }
    }
    if (!best.found || best.score - parent <= 1e-12) return;

    std::vector<std::size_t> lrows, rrows;
    partition_rows(x_, rows, best, lrows, rrows);
    const auto [lg, lh] = sums(lrows);
    const auto [rg, rh] = sums(rrows);
    const double lw = -lg / (lh + opt_.lambda), rw = -rg / (rh + opt_.lambda);
    const std::int32_t l = tree_.add_node(std::span<const double>(&lw, 1));
    const std::int32_t r = tree_.add_node(std::span<const double>(&rw, 1));
    tree_.set_split(node, static_cast<std::int32_t>(best.feature), best.threshold, l, r);
    grow_node(l, lrows, lg, lh, depth + 1);
    grow_node(r, rrows, rg, rh, depth + 1);
  }

  const Matrix& x_;
  std::span<const double> g_, h_;
  GradientTreeOptions opt_;
  Tree tree_;
  std::vector<Entry> buf_;
};

}  // namespace

Tree grow_gini_tree(const Matrix& x, std::span<const ClassId> y,
                    std::uint32_t num_classes, std::span<const std::size_t> rows,
                    const GiniTreeOptions& options, Rng& rng) {
  if (rows.empty()) throw Error("cannot grow a tree on zero rows");
  return GiniGrower(x, y, num_classes, options, rng).grow(rows);
}

Tree grow_gradient_tree(const Matrix& x, std::span<const double> grad,
                        std::span<const double> hess,
                        std::span<const std::size_t> rows,
                        const GradientTreeOptions& options) {
  if (rows.empty()) throw Error("cannot grow a tree on zero rows");
  return GradientGrower(x, grad, hess, options).grow(rows);
}

std::shared_ptr<DecisionTreeClassifier> DecisionTreeClassifier::read(
    ByteReader& r, std::uint32_t u, std::size_t dim) {
  return std::make_shared<DecisionTreeClassifier>(u, dim, Tree::read(r));
}

void DecisionTreeClassifier::compute_scores(std::span<const double> x,
                                            std::span<double> out) const {
  auto v = tree_.evaluate(x);
  std::copy(v.begin(), v.end(), out.begin());
}

void DecisionTreeClassifier::write_payload(ByteWriter& w) const { tree_.write(w); }

}  // namespace fedkt
