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

#ifndef FEDKT_DATASET_IO_H_
#define FEDKT_DATASET_IO_H_

// Text dataset readers and writers, and the train/public/test split.
//
// CSV: comma separated, last column is the label, blank lines skipped. The
// first row is a header iff none of its fields parses as a number. A feature
// column holding any non-numeric token is categorical. Categories are
// numbered in order of first appearance and then either one-hot encoded
// (default) or kept as a single column holding the category number.
//
// LIBSVM: "label idx:val idx:val ..." with 1-based increasing indices and
// '#' comments. Missing indices are zero.
//
// Labels, both formats: if every label is a non-negative integer it is used
// as the class id directly (so written files read back unchanged). Otherwise,
// if every label is numeric, distinct values are ranked in ascending order.
// Otherwise labels map to ids by first appearance. label_names() records the
// original tokens.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "fedkt/domain.h"
#include "fedkt/rng.h"

namespace fedkt {

enum class DataFormat { kCsv, kLibsvm };
enum class CategoricalEncoding { kOneHot, kOrdinal };

std::string_view to_string(DataFormat format);
DataFormat parse_data_format(std::string_view text);
std::string_view to_string(CategoricalEncoding encoding);
CategoricalEncoding parse_categorical_encoding(std::string_view text);

struct LoadOptions {
  // Fixes the LIBSVM feature dimension; without it the dimension is the
  // largest index seen.
  std::optional<std::size_t> libsvm_dim;
  CategoricalEncoding categorical = CategoricalEncoding::kOneHot;
};

// Errors name the offending line.
Dataset parse_csv(std::istream& in,
                  CategoricalEncoding categorical = CategoricalEncoding::kOneHot);
Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> dim = std::nullopt);
Dataset load_dataset(const std::filesystem::path& path, DataFormat format,
                     const LoadOptions& options = {});

// Headerless CSV with features printed to 17 significant digits and the
// class id as the last column. Unlabeled examples are rejected.
void write_csv(const Dataset& data, std::ostream& out);
void write_csv(const Dataset& data, const std::filesystem::path& path);

struct SplitFractions {
  double train = 0.75;
  double pub = 0.125;
  double test = 0.125;

  // Throws unless all three are positive and sum to 1.
  void validate() const;
};

struct DataSplit {
  Dataset train;
  Dataset public_unlabeled;
  // The same examples with labels kept, for evaluation only.
  Dataset public_labeled;
  Dataset test;
};

// Seeded shuffle, then contiguous [public | test | train] blocks with
// |public| = floor(pub * N), |test| = floor(test * N) and the remainder
// training. Throws if any block would be empty.
DataSplit split_train_public_test(const Dataset& data, const SplitFractions& fractions,
                                  Rng& rng);

}  // namespace fedkt

#endif  // FEDKT_DATASET_IO_H_
