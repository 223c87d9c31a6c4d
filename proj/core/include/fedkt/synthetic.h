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

#ifndef FEDKT_SYNTHETIC_H_
#define FEDKT_SYNTHETIC_H_

// Small generated classification tasks for smoke runs and tests.

#include <cstddef>
#include <cstdint>

#include "fedkt/domain.h"
#include "fedkt/rng.h"

namespace fedkt {

// Isotropic Gaussian blobs. Class c is centred at radius separation/2 on the
// circle spanned by the first two axes, at angle 2*pi*c/classes. Example i
// has class i % classes.
struct BlobsOptions {
  std::size_t size = 2000;
  std::uint32_t classes = 2;
  std::size_t dim = 2;
  double separation = 4.0;
  double stddev = 1.0;
};
Dataset make_blobs(const BlobsOptions& opt, Rng& rng);

// Points uniform on [-1, 1]^2, label (x0 > 0) xor (x1 > 0). With
// label_noise > 0 that fraction of labels is flipped.
struct XorOptions {
  std::size_t size = 2000;
  double label_noise = 0.0;
};
Dataset make_xor(const XorOptions& opt, Rng& rng);

}  // namespace fedkt

#endif  // FEDKT_SYNTHETIC_H_
