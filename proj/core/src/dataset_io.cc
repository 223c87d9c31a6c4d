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

#include "fedkt/dataset_io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace fedkt {
namespace {

// Direct integer labels above this are ranked instead, so a stray large id
// cannot blow up the class count.
constexpr std::uint64_t kMaxDirectLabel = 1u << 16;

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<std::uint64_t> parse_uint(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string at_line(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

struct LabelMap {
  std::vector<ClassId> ids;
  std::uint32_t num_classes = 0;
  std::vector<std::string> names;
};

LabelMap map_labels(const std::vector<std::string>& tokens) {
  LabelMap m;
  m.ids.reserve(tokens.size());
  bool direct = true;
  bool numeric = true;
  std::uint64_t max_id = 0;
  for (const std::string& tok : tokens) {
    if (direct) {
      auto v = parse_uint(tok);
      if (v && *v <= kMaxDirectLabel) {
        max_id = std::max(max_id, *v);
      } else {
        direct = false;
      }
    }
    if (numeric && !parse_number(tok)) numeric = false;
  }
  if (direct) {
    m.num_classes = static_cast<std::uint32_t>(max_id + 1);
    for (const std::string& tok : tokens) {
      m.ids.push_back(static_cast<ClassId>(*parse_uint(tok)));
    }
    for (std::uint32_t c = 0; c < m.num_classes; ++c) m.names.push_back(std::to_string(c));
    return m;
  }
  if (numeric) {
    std::map<double, ClassId> rank;
    for (const std::string& tok : tokens) rank.emplace(*parse_number(tok), 0);
    std::unordered_map<double, std::string> first_token;
    for (const std::string& tok : tokens) first_token.emplace(*parse_number(tok), tok);
    ClassId next = 0;
    for (auto& [value, id] : rank) {
      id = next++;
      m.names.push_back(first_token.at(value));
    }
    for (const std::string& tok : tokens) m.ids.push_back(rank.at(*parse_number(tok)));
    m.num_classes = next;
    return m;
  }
  std::unordered_map<std::string, ClassId> seen;
  for (const std::string& tok : tokens) {
    auto [it, inserted] = seen.emplace(tok, static_cast<ClassId>(seen.size()));
    if (inserted) m.names.push_back(tok);
    m.ids.push_back(it->second);
  }
  m.num_classes = static_cast<std::uint32_t>(seen.size());
  return m;
}

Dataset assemble(std::vector<std::vector<double>> rows, const std::vector<std::string>& labels,
                 std::size_t dim) {
  LabelMap lm = map_labels(labels);
  std::vector<Example> examples;
  examples.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    examples.push_back({std::move(rows[i]), lm.ids[i]});
  }
  Dataset d(std::move(examples), std::max<std::uint32_t>(lm.num_classes, 1), dim);
  d.set_label_names(std::move(lm.names));
  return d;
}

}  // namespace

std::string_view to_string(DataFormat format) {
  return format == DataFormat::kCsv ? "csv" : "libsvm";
}

DataFormat parse_data_format(std::string_view text) {
  if (text == "csv") return DataFormat::kCsv;
  if (text == "libsvm") return DataFormat::kLibsvm;
  throw Error("unknown data format '" + std::string(text) + "' (expected csv or libsvm)");
}

std::string_view to_string(CategoricalEncoding encoding) {
  return encoding == CategoricalEncoding::kOneHot ? "onehot" : "ordinal";
}

CategoricalEncoding parse_categorical_encoding(std::string_view text) {
  if (text == "onehot") return CategoricalEncoding::kOneHot;
  if (text == "ordinal") return CategoricalEncoding::kOrdinal;
  throw Error("unknown categorical encoding '" + std::string(text) +
              "' (expected onehot or ordinal)");
}

Dataset parse_csv(std::istream& in, CategoricalEncoding categorical_encoding) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0, width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_commas(line);
    if (first) {
      first = false;
      const bool header = std::none_of(fields.begin(), fields.end(),
                                       [](std::string_view f) { return parse_number(f).has_value(); });
      width = fields.size();
      if (width < 2) throw Error(at_line(line_no, "need at least one feature and a label"));
      if (header) continue;
    }
    if (fields.size() != width) {
      throw Error(at_line(line_no, "expected " + std::to_string(width) + " fields, got " +
                                       std::to_string(fields.size())));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (fields[c].empty()) throw Error(at_line(line_no, "empty field in column " + std::to_string(c + 1)));
    }
    cells.emplace_back(fields.begin(), fields.end());
    line_numbers.push_back(line_no);
  }
  if (cells.empty()) throw Error("empty dataset: no data rows");

  const std::size_t nfeat = width - 1;
  std::vector<bool> categorical(nfeat, false);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < nfeat; ++c) {
      if (!categorical[c] && !parse_number(row[c])) categorical[c] = true;
    }
  }
  std::vector<std::unordered_map<std::string, std::size_t>> categories(nfeat);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < nfeat; ++c) {
      if (categorical[c]) categories[c].emplace(row[c], categories[c].size());
    }
  }
  std::vector<std::size_t> offset(nfeat + 1, 0);
  for (std::size_t c = 0; c < nfeat; ++c) {
    const bool one_hot = categorical[c] && categorical_encoding == CategoricalEncoding::kOneHot;
    offset[c + 1] = offset[c] + (one_hot ? categories[c].size() : 1);
  }
  const std::size_t dim = offset[nfeat];

  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  rows.reserve(cells.size());
  labels.reserve(cells.size());
  for (auto& row : cells) {
    std::vector<double> x(dim, 0.0);
    for (std::size_t c = 0; c < nfeat; ++c) {
      if (categorical[c] && categorical_encoding == CategoricalEncoding::kOrdinal) {
        x[offset[c]] = static_cast<double>(categories[c].at(row[c]));
      } else if (categorical[c]) {
        x[offset[c] + categories[c].at(row[c])] = 1.0;
      } else {
        x[offset[c]] = *parse_number(row[c]);
      }
    }
    rows.push_back(std::move(x));
    labels.push_back(std::move(row.back()));
  }
  return assemble(std::move(rows), labels, dim);
}

Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> dim) {
  struct Sparse {
    std::vector<std::pair<std::size_t, double>> entries;
  };
  std::vector<Sparse> sparse;
  std::vector<std::string> labels;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    std::istringstream tokens{std::string(body)};
    std::string label;
    tokens >> label;
    if (label.find(':') != std::string::npos || !parse_number(label)) {
      throw Error(at_line(line_no, "malformed label '" + label + "'"));
    }
    Sparse row;
    std::size_t last = 0;
    std::string tok;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw Error(at_line(line_no, "expected idx:val, got '" + tok + "'"));
      auto idx = parse_uint(std::string_view(tok).substr(0, colon));
      auto val = parse_number(std::string_view(tok).substr(colon + 1));
      if (!idx || !val) throw Error(at_line(line_no, "malformed pair '" + tok + "'"));
      if (*idx == 0) throw Error(at_line(line_no, "feature indices are 1-based"));
      if (*idx <= last) throw Error(at_line(line_no, "feature indices must increase"));
      if (dim && *idx > *dim) {
        throw Error(at_line(line_no, "index " + std::to_string(*idx) + " exceeds dimension " +
                                         std::to_string(*dim)));
      }
      last = *idx;
      max_index = std::max<std::size_t>(max_index, *idx);
      row.entries.emplace_back(*idx - 1, *val);
    }
    sparse.push_back(std::move(row));
    labels.push_back(std::move(label));
  }
  if (sparse.empty()) throw Error("empty dataset: no data rows");
  const std::size_t d = dim.value_or(max_index);
  if (d == 0) throw Error("dataset has no features");
  std::vector<std::vector<double>> rows;
  rows.reserve(sparse.size());
  for (const Sparse& s : sparse) {
    std::vector<double> x(d, 0.0);
    for (auto [j, v] : s.entries) x[j] = v;
    rows.push_back(std::move(x));
  }
  return assemble(std::move(rows), labels, d);
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format,
                     const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file '" + path.string() + "'");
  try {
    return format == DataFormat::kCsv ? parse_csv(in, options.categorical)
                                      : parse_libsvm(in, options.libsvm_dim);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_csv(const Dataset& data, std::ostream& out) {
  char buf[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.features(i)) {
      std::snprintf(buf, sizeof buf, "%.17g,", v);
      out << buf;
    }
    out << data.label(i) << '\n';
  }
  if (!out) throw Error("failed writing CSV");
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_csv(data, out);
}

void SplitFractions::validate() const {
  if (!(train > 0.0) || !(pub > 0.0) || !(test > 0.0)) {
    throw Error("split fractions must all be positive (train/public/test)");
  }
  if (std::abs(train + pub + test - 1.0) > 1e-9) throw Error("split fractions must sum to 1");
}

DataSplit split_train_public_test(const Dataset& data, const SplitFractions& fractions,
                                  Rng& rng) {
  if (!(fractions.pub > 0.0)) throw Error("public split would be empty");
  if (!(fractions.test > 0.0)) throw Error("test split would be empty");
  if (!(fractions.train > 0.0)) throw Error("train split would be empty");
  fractions.validate();
  const double n = static_cast<double>(data.size());
  const auto n_pub = static_cast<std::size_t>(std::floor(fractions.pub * n + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(fractions.test * n + 1e-9));
  if (n_pub == 0) throw Error("public split would be empty");
  if (n_test == 0) throw Error("test split would be empty");
  if (n_pub + n_test >= data.size()) throw Error("train split would be empty");

  const std::vector<std::size_t> perm = rng.permutation(data.size());
  std::span<const std::size_t> all(perm);
  DataSplit out;
  out.public_labeled = data.subset(all.subspan(0, n_pub));
  out.public_unlabeled = out.public_labeled.without_labels();
  out.test = data.subset(all.subspan(n_pub, n_test));
  out.train = data.subset(all.subspan(n_pub + n_test));
  return out;
}

}  // namespace fedkt
