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

#include "fedkt/synthetic.h"

#include <cmath>
#include <numbers>
#include <vector>

namespace fedkt {

Dataset make_blobs(const BlobsOptions& opt, Rng& rng) {
  if (opt.size == 0) throw Error("blobs: size must be positive");
  if (opt.classes == 0) throw Error("blobs: need at least one class");
  if (opt.dim < 2) throw Error("blobs: dim must be >= 2");
  if (!(opt.stddev >= 0.0)) throw Error("blobs: stddev must be non-negative");
  std::vector<Example> examples;
  examples.reserve(opt.size);
  for (std::size_t i = 0; i < opt.size; ++i) {
    const auto c = static_cast<ClassId>(i % opt.classes);
    const double angle = 2.0 * std::numbers::pi * c / opt.classes;
    std::vector<double> x(opt.dim);
    for (double& v : x) v = opt.stddev * rng.normal();
    x[0] += 0.5 * opt.separation * std::cos(angle);
    x[1] += 0.5 * opt.separation * std::sin(angle);
    examples.push_back({std::move(x), c});
  }
  return Dataset(std::move(examples), opt.classes, opt.dim);
}

Dataset make_xor(const XorOptions& opt, Rng& rng) {
  if (opt.size == 0) throw Error("xor: size must be positive");
  if (!(opt.label_noise >= 0.0 && opt.label_noise <= 1.0)) {
    throw Error("xor: label_noise must lie in [0, 1]");
  }
  std::vector<Example> examples;
  examples.reserve(opt.size);
  for (std::size_t i = 0; i < opt.size; ++i) {
    std::vector<double> x = {2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
    ClassId y = (x[0] > 0.0) != (x[1] > 0.0) ? 1 : 0;
    if (opt.label_noise > 0.0 && rng.uniform() < opt.label_noise) y = 1 - y;
    examples.push_back({std::move(x), y});
  }
  return Dataset(std::move(examples), 2, 2);
}

}  // namespace fedkt
