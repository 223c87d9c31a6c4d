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

#ifndef FEDKT_SRC_LEARNER_COMMON_H_
#define FEDKT_SRC_LEARNER_COMMON_H_

#include <optional>
#include <vector>

#include "fedkt/domain.h"
#include "fedkt/matrix.h"

namespace fedkt {

// Features and labels of a fully labeled training set in learner layout.
struct TrainingData {
  Matrix x;
  std::vector<ClassId> y;

  static TrainingData from(const Dataset& train) {
    if (train.empty()) throw Error("cannot fit on an empty training set");
    TrainingData td{Matrix::from_features(train), {}};
    td.y.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) td.y.push_back(train.label(i));
    return td;
  }

  // The class if every label is identical.
  std::optional<ClassId> single_class() const {
    for (ClassId c : y) {
      if (c != y.front()) return std::nullopt;
    }
    return y.front();
  }
};

}  // namespace fedkt

#endif  // FEDKT_SRC_LEARNER_COMMON_H_
