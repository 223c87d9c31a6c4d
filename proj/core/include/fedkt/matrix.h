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

#ifndef FEDKT_MATRIX_H_
#define FEDKT_MATRIX_H_

#include <cstddef>
#include <span>
#include <vector>

#include "fedkt/domain.h"

namespace fedkt {

// Dense row-major matrix of doubles. Learners copy a Dataset into one of
// these once per fit so the inner loops touch contiguous memory.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_features(const Dataset& data) {
    Matrix m(data.size(), data.dim());
    for (std::size_t i = 0; i < data.size(); ++i) {
      auto f = data.features(i);
      std::copy(f.begin(), f.end(), m.data_.begin() + i * m.cols_);
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace fedkt

#endif  // FEDKT_MATRIX_H_
