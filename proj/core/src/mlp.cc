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

MlpNetwork::MlpNetwork(std::size_t inputs, std::span<const std::size_t> hidden,
                       std::size_t outputs) {
  sizes_.push_back(inputs);
  sizes_.insert(sizes_.end(), hidden.begin(), hidden.end());
  sizes_.push_back(outputs);
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] == 0 || sizes_[l + 1] == 0) throw Error("MLP layer of width zero");
    offsets_.push_back(total);
    total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
  params_.assign(total, 0.0);
}

void MlpNetwork::initialize(Rng& rng) {
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const std::size_t in = sizes_[l], out = sizes_[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    double* w = params_.data() + offsets_[l];
    for (std::size_t i = 0; i < out * in; ++i) w[i] = (2.0 * rng.uniform() - 1.0) * limit;
    std::fill(w + out * in, w + out * in + out, 0.0);
  }
}

void MlpNetwork::forward(std::span<const double> x, std::span<double> logits) const {
  std::vector<double> a(x.begin(), x.end()), z;
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = sizes_[l], out = sizes_[l + 1];
    const double* w = params_.data() + offsets_[l];
    const double* b = w + out * in;
    z.assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      const double* wo = w + o * in;
      for (std::size_t i = 0; i < in; ++i) s += wo[i] * a[i];
      z[o] = (l + 1 < layers) ? std::max(s, 0.0) : s;
    }
    a.swap(z);
  }
  std::copy(a.begin(), a.end(), logits.begin());
}

double MlpNetwork::loss_and_gradient(const Matrix& x, std::span<const ClassId> y,
                                     std::span<const std::size_t> rows, double l2,
                                     std::span<double> grad) const {
  if (grad.size() != params_.size()) throw Error("gradient buffer has the wrong size");
  std::fill(grad.begin(), grad.end(), 0.0);
  const std::size_t layers = sizes_.size() - 1;
  const double scale = 1.0 / static_cast<double>(rows.size());
  // acts[l] is the input to layer l; acts[layers] holds the logits.
  std::vector<std::vector<double>> acts(layers + 1);
  std::vector<double> delta, prev_delta;
  double loss = 0.0;

  for (std::size_t r : rows) {
    acts[0].assign(x.row(r).begin(), x.row(r).end());
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t in = sizes_[l], out = sizes_[l + 1];
      const double* w = params_.data() + offsets_[l];
      const double* b = w + out * in;
      acts[l + 1].assign(out, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        double s = b[o];
        const double* wo = w + o * in;
        for (std::size_t i = 0; i < in; ++i) s += wo[i] * acts[l][i];
        acts[l + 1][o] = (l + 1 < layers) ? std::max(s, 0.0) : s;
      }
    }
    const std::vector<double>& logits = acts[layers];
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - m);
    const double log_sum = m + std::log(sum);
    loss += (log_sum - logits[y[r]]) * scale;

    delta.resize(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) {
      delta[k] = (std::exp(logits[k] - log_sum) - (y[r] == k ? 1.0 : 0.0)) * scale;
    }
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = sizes_[l], out = sizes_[l + 1];
      const double* w = params_.data() + offsets_[l];
      double* gw = grad.data() + offsets_[l];
      double* gb = gw + out * in;
      for (std::size_t o = 0; o < out; ++o) {
        if (delta[o] == 0.0) continue;
        gb[o] += delta[o];
        double* gwo = gw + o * in;
        for (std::size_t i = 0; i < in; ++i) gwo[i] += delta[o] * acts[l][i];
      }
      if (l == 0) break;
      prev_delta.assign(in, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        if (delta[o] == 0.0) continue;
        const double* wo = w + o * in;
        for (std::size_t i = 0; i < in; ++i) prev_delta[i] += wo[i] * delta[o];
      }
      // ReLU derivative: the stored activation is zero where the unit was off.
      for (std::size_t i = 0; i < in; ++i) {
        if (acts[l][i] <= 0.0) prev_delta[i] = 0.0;
      }
      delta.swap(prev_delta);
    }
  }
  if (l2 > 0.0) {
    double sq = 0.0;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      sq += params_[i] * params_[i];
      grad[i] += l2 * params_[i];
    }
    loss += 0.5 * l2 * sq;
  }
  return loss;
}

void MlpNetwork::write(ByteWriter& w) const {
  w.u32(static_cast<std::uint32_t>(sizes_.size()));
  for (std::size_t s : sizes_) w.u64(s);
  w.f64s(params_);
}

MlpNetwork MlpNetwork::read(ByteReader& r) {
  const std::uint32_t count = r.u32();
  if (count < 2) throw Error("MLP encoding needs at least two layer sizes");
  std::vector<std::size_t> sizes(count);
  for (auto& s : sizes) s = r.u64();
  std::vector<std::size_t> hidden(sizes.begin() + 1, sizes.end() - 1);
  MlpNetwork net(sizes.front(), hidden, sizes.back());
  std::vector<double> params = r.f64s();
  if (params.size() != net.params_.size()) throw Error("MLP parameter count mismatch");
  net.params_ = std::move(params);
  return net;
}

void MlpClassifier::compute_scores(std::span<const double> x,
                                   std::span<double> out) const {
  std::vector<double> z(x.size());
  standardizer_.apply(x, z);
  network_.forward(z, out);
}

void MlpClassifier::write_payload(ByteWriter& w) const {
  standardizer_.write(w);
  network_.write(w);
}

std::shared_ptr<MlpClassifier> MlpClassifier::read(ByteReader& r, std::uint32_t u,
                                                   std::size_t dim) {
  Standardizer st = Standardizer::read(r);
  MlpNetwork net = MlpNetwork::read(r);
  if (net.layer_sizes().front() != dim || net.layer_sizes().back() != u) {
    throw Error("MLP encoding does not match the header shape");
  }
  return std::make_shared<MlpClassifier>(u, dim, std::move(st), std::move(net));
}

// Minibatch Adam (beta1 0.9, beta2 0.999, eps 1e-8) with L2 added to the
// gradient, as in common deep-learning frameworks' weight_decay.
std::shared_ptr<MlpClassifier> fit_mlp(const ModelSpec& spec, const Dataset& train,
                                       Rng& rng) {
  TrainingData td = TrainingData::from(train);
  const std::uint32_t u = train.num_classes();
  Standardizer st = Standardizer::fit(td.x);
  MlpNetwork net(train.dim(), spec.hidden, u);
  if (auto only = td.single_class()) {
    // Zero weights and a one-hot output bias: constant prediction.
    auto p = net.parameters();
    p[p.size() - u + *only] = 1.0;
    return std::make_shared<MlpClassifier>(u, train.dim(), std::move(st), std::move(net));
  }
  st.apply_in_place(td.x);
  Rng init_rng = rng.derive({0});
  Rng order_rng = rng.derive({1});
  net.initialize(init_rng);

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  const std::size_t np = net.num_parameters();
  std::vector<double> grad(np), m(np, 0.0), v(np, 0.0);
  std::vector<std::size_t> order(td.x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = std::max<std::size_t>(spec.batch_size, 1);
  double b1t = 1.0, b2t = 1.0;
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t len = std::min(batch, order.size() - start);
      net.loss_and_gradient(td.x, td.y,
                            std::span<const std::size_t>(order).subspan(start, len),
                            spec.l2, grad);
      b1t *= kBeta1;
      b2t *= kBeta2;
      auto p = net.parameters();
      for (std::size_t i = 0; i < np; ++i) {
        m[i] = kBeta1 * m[i] + (1 - kBeta1) * grad[i];
        v[i] = kBeta2 * v[i] + (1 - kBeta2) * grad[i] * grad[i];
        const double mh = m[i] / (1 - b1t), vh = v[i] / (1 - b2t);
        p[i] -= spec.learning_rate * mh / (std::sqrt(vh) + kEps);
      }
    }
  }
  return std::make_shared<MlpClassifier>(u, train.dim(), std::move(st), std::move(net));
}

}  // namespace fedkt
