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

#include "fedkt/experiment.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>

#include "fedkt/partition.h"

namespace fedkt {
namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!j.is_object()) throw Error(where + ": expected a JSON object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw Error(where + ": unknown key '" + item.key() + "'");
    }
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(where + "." + key + ": wrong type");
  }
}

ModelSpec spec_from_json(const json& j, const std::string& where) {
  check_keys(j, {"kind", "max_depth", "n_trees", "min_samples_leaf", "max_features",
                 "learning_rate", "epochs", "batch_size", "l2", "hidden"},
             where);
  if (!j.contains("kind")) throw Error(where + ": missing 'kind'");
  ModelSpec s = ModelSpec::defaults(parse_model_kind(j.at("kind").get<std::string>()));
  read_opt(j, "max_depth", s.max_depth, where);
  read_opt(j, "n_trees", s.n_trees, where);
  read_opt(j, "min_samples_leaf", s.min_samples_leaf, where);
  read_opt(j, "max_features", s.max_features, where);
  read_opt(j, "learning_rate", s.learning_rate, where);
  read_opt(j, "epochs", s.epochs, where);
  read_opt(j, "batch_size", s.batch_size, where);
  read_opt(j, "l2", s.l2, where);
  read_opt(j, "hidden", s.hidden, where);
  return s;
}

json spec_to_json(const ModelSpec& s) {
  return {{"kind", std::string(to_string(s.kind))},
          {"max_depth", s.max_depth},
          {"n_trees", s.n_trees},
          {"min_samples_leaf", s.min_samples_leaf},
          {"max_features", s.max_features},
          {"learning_rate", s.learning_rate},
          {"epochs", s.epochs},
          {"batch_size", s.batch_size},
          {"l2", s.l2},
          {"hidden", s.hidden}};
}

std::size_t to_count(double value, std::string_view name) {
  if (!(value >= 1.0) || value != std::floor(value)) {
    throw Error(std::string(name) + " must be a positive integer");
  }
  return static_cast<std::size_t>(value);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <typename F>
auto in_stage(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::vector<std::map<std::string, double>> expand_sweep(const std::vector<SweepAxis>& axes) {
  std::vector<std::map<std::string, double>> points(1);
  for (const SweepAxis& axis : axes) {
    std::vector<std::map<std::string, double>> next;
    for (const auto& p : points) {
      for (double v : axis.values) {
        auto q = p;
        q[axis.name] = v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

std::vector<std::string> deviation_notes(const ExperimentConfig& cfg, const Dataset& data) {
  std::vector<std::string> notes;
  notes.push_back("all learners are implemented in this library; accuracies are not "
                  "expected to match reference toolkits exactly");
  std::set<int> forest_sizes;
  for (const ModelSpec* s : {&cfg.fedkt.teacher_spec, &cfg.fedkt.student_spec,
                             &cfg.fedkt.final_spec}) {
    if (s->kind == ModelKind::kRandomForest) forest_sizes.insert(s->n_trees);
  }
  for (int n : forest_sizes) {
    if (n != 100) {
      notes.push_back("random forests use " + std::to_string(n) +
                      " trees per model (reference setup: 100)");
    }
  }
  if (cfg.data.synthetic.empty() && cfg.data.format == DataFormat::kCsv) {
    notes.push_back(std::string("categorical CSV columns use ") +
                    (cfg.data.load.categorical == CategoricalEncoding::kOneHot
                         ? "one-hot encoding"
                         : "ordinal category codes") +
                    "; feature dimension " + std::to_string(data.dim()));
  }
  if (cfg.run_pate && cfg.pate_teachers && *cfg.pate_teachers != cfg.fedkt.n) {
    notes.push_back("centralized PATE uses " + std::to_string(*cfg.pate_teachers) +
                    " teachers instead of one per party");
  }
  if (cfg.partition == PartitionScheme::kDirichlet && cfg.min_party_size > 0) {
    notes.push_back("Dirichlet partitions are redrawn until every party holds at least " +
                    std::to_string(cfg.min_party_size) + " examples");
  }
  if (!cfg.fedkt.consistent_voting) {
    notes.push_back("consistent voting disabled at the server (debug mode)");
  }
  return notes;
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

std::string_view to_string(PartitionScheme scheme) {
  return scheme == PartitionScheme::kDirichlet ? "dirichlet" : "homogeneous";
}

PartitionScheme parse_partition_scheme(std::string_view text) {
  if (text == "dirichlet") return PartitionScheme::kDirichlet;
  if (text == "homogeneous") return PartitionScheme::kHomogeneous;
  throw Error("unknown partition scheme '" + std::string(text) + "'");
}

FedKtConfig ExperimentConfig::default_protocol_config() {
  FedKtConfig c;
  c.n = 50;
  c.s = 2;
  c.t = 5;
  c.gamma = 0.04;
  c.level = PrivacyLevel::kL0;
  ModelSpec rf = ModelSpec::defaults(ModelKind::kRandomForest);
  rf.max_depth = 6;
  c.teacher_spec = c.student_spec = c.final_spec = rf;
  return c;
}

void ExperimentConfig::validate() const {
  const bool has_path = !data.path.empty();
  const bool has_synth = !data.synthetic.empty();
  if (has_path == has_synth) throw Error("data: set exactly one of 'path' and 'synthetic'");
  if (has_synth && data.synthetic != "blobs" && data.synthetic != "xor") {
    throw Error("data.synthetic must be 'blobs' or 'xor'");
  }
  split.validate();
  if (partition == PartitionScheme::kDirichlet && !(beta > 0.0)) {
    throw Error("partition.beta must be positive");
  }
  if (!(public_fraction > 0.0 && public_fraction <= 1.0)) {
    throw Error("public_fraction must lie in (0, 1]");
  }
  if (trials == 0) throw Error("trials must be >= 1");
  if (pate_teachers && *pate_teachers == 0) throw Error("pate_teachers must be >= 1");
  for (const SweepAxis& a : sweep) {
    if (a.values.empty()) throw Error("sweep axis '" + a.name + "' has no values");
    ExperimentConfig probe = *this;
    probe.sweep.clear();
    for (double v : a.values) apply_parameter(probe, a.name, v);
  }
  fedkt.validate();
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, {"data", "split", "partition", "fedkt", "public_fraction", "baselines",
                 "fedavg_rounds", "trials", "seed", "sweep", "output"},
             "config");
  ExperimentConfig c;
  if (!j.contains("data")) throw Error("config: missing 'data'");
  const json& d = j.at("data");
  check_keys(d, {"path", "format", "libsvm_dim", "categorical", "synthetic", "size", "classes", "dim",
                 "separation", "stddev", "label_noise"},
             "data");
  read_opt(d, "path", c.data.path, "data");
  if (d.contains("format")) c.data.format = parse_data_format(d.at("format").get<std::string>());
  if (d.contains("libsvm_dim")) c.data.load.libsvm_dim = d.at("libsvm_dim").get<std::size_t>();
  if (d.contains("categorical")) {
    c.data.load.categorical = parse_categorical_encoding(d.at("categorical").get<std::string>());
  }
  read_opt(d, "synthetic", c.data.synthetic, "data");
  read_opt(d, "size", c.data.blobs.size, "data");
  c.data.xor_task.size = c.data.blobs.size;
  read_opt(d, "classes", c.data.blobs.classes, "data");
  read_opt(d, "dim", c.data.blobs.dim, "data");
  read_opt(d, "separation", c.data.blobs.separation, "data");
  read_opt(d, "stddev", c.data.blobs.stddev, "data");
  read_opt(d, "label_noise", c.data.xor_task.label_noise, "data");

  if (j.contains("split")) {
    const json& s = j.at("split");
    check_keys(s, {"train", "public", "test"}, "split");
    read_opt(s, "train", c.split.train, "split");
    read_opt(s, "public", c.split.pub, "split");
    read_opt(s, "test", c.split.test, "split");
  }
  if (j.contains("partition")) {
    const json& p = j.at("partition");
    check_keys(p, {"scheme", "beta", "min_party_size"}, "partition");
    read_opt(p, "min_party_size", c.min_party_size, "partition");
    if (p.contains("scheme")) c.partition = parse_partition_scheme(p.at("scheme").get<std::string>());
    read_opt(p, "beta", c.beta, "partition");
  }
  if (j.contains("fedkt")) {
    const json& f = j.at("fedkt");
    check_keys(f, {"n", "s", "t", "level", "gamma", "query_fraction", "delta",
                   "consistent_voting", "teacher", "student", "final"},
               "fedkt");
    read_opt(f, "n", c.fedkt.n, "fedkt");
    read_opt(f, "s", c.fedkt.s, "fedkt");
    read_opt(f, "t", c.fedkt.t, "fedkt");
    if (f.contains("level")) c.fedkt.level = parse_privacy_level(f.at("level").get<std::string>());
    read_opt(f, "gamma", c.fedkt.gamma, "fedkt");
    read_opt(f, "query_fraction", c.fedkt.query_fraction, "fedkt");
    read_opt(f, "delta", c.fedkt.delta, "fedkt");
    read_opt(f, "consistent_voting", c.fedkt.consistent_voting, "fedkt");
    if (f.contains("teacher")) c.fedkt.teacher_spec = spec_from_json(f.at("teacher"), "fedkt.teacher");
    if (f.contains("student")) c.fedkt.student_spec = spec_from_json(f.at("student"), "fedkt.student");
    if (f.contains("final")) c.fedkt.final_spec = spec_from_json(f.at("final"), "fedkt.final");
  }
  read_opt(j, "public_fraction", c.public_fraction, "config");
  if (j.contains("baselines")) {
    const json& b = j.at("baselines");
    check_keys(b, {"solo", "pate", "pate_teachers"}, "baselines");
    read_opt(b, "solo", c.run_solo, "baselines");
    read_opt(b, "pate", c.run_pate, "baselines");
    if (b.contains("pate_teachers") && !b.at("pate_teachers").is_null()) {
      c.pate_teachers = b.at("pate_teachers").get<std::size_t>();
    }
  }
  read_opt(j, "fedavg_rounds", c.fedavg_rounds, "config");
  read_opt(j, "trials", c.trials, "config");
  read_opt(j, "seed", c.seed, "config");
  read_opt(j, "output", c.output, "config");
  if (j.contains("sweep")) {
    if (!j.at("sweep").is_object()) throw Error("sweep: expected an object of value lists");
    for (const auto& item : j.at("sweep").items()) {
      c.sweep.push_back({item.key(), item.value().get<std::vector<double>>()});
    }
  }
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json data;
  if (!c.data.path.empty()) {
    data = {{"path", c.data.path},
            {"format", std::string(to_string(c.data.format))},
            {"categorical", std::string(to_string(c.data.load.categorical))}};
    if (c.data.load.libsvm_dim) data["libsvm_dim"] = *c.data.load.libsvm_dim;
  } else if (c.data.synthetic == "blobs") {
    data = {{"synthetic", "blobs"},       {"size", c.data.blobs.size},
            {"classes", c.data.blobs.classes}, {"dim", c.data.blobs.dim},
            {"separation", c.data.blobs.separation}, {"stddev", c.data.blobs.stddev}};
  } else {
    data = {{"synthetic", c.data.synthetic},
            {"size", c.data.xor_task.size},
            {"label_noise", c.data.xor_task.label_noise}};
  }
  json sweep = json::object();
  for (const SweepAxis& a : c.sweep) sweep[a.name] = a.values;
  return {
      {"data", data},
      {"split", {{"train", c.split.train}, {"public", c.split.pub}, {"test", c.split.test}}},
      {"partition",
       {{"scheme", std::string(to_string(c.partition))},
        {"beta", c.beta},
        {"min_party_size", c.min_party_size}}},
      {"fedkt",
       {{"n", c.fedkt.n},
        {"s", c.fedkt.s},
        {"t", c.fedkt.t},
        {"level", std::string(to_string(c.fedkt.level))},
        {"gamma", c.fedkt.gamma},
        {"query_fraction", c.fedkt.query_fraction},
        {"delta", c.fedkt.delta},
        {"consistent_voting", c.fedkt.consistent_voting},
        {"teacher", spec_to_json(c.fedkt.teacher_spec)},
        {"student", spec_to_json(c.fedkt.student_spec)},
        {"final", spec_to_json(c.fedkt.final_spec)}}},
      {"public_fraction", c.public_fraction},
      {"baselines",
       {{"solo", c.run_solo},
        {"pate", c.run_pate},
        {"pate_teachers", c.pate_teachers ? json(*c.pate_teachers) : json(nullptr)}}},
      {"fedavg_rounds", c.fedavg_rounds},
      {"trials", c.trials},
      {"seed", c.seed},
      {"sweep", sweep},
      {"output", c.output},
  };
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StageError("config", "cannot open '" + path.string() + "'");
  return in_stage("config", [&] {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(path.string() + ": " + e.what());
    }
    ExperimentConfig c = config_from_json(j);
    // Data paths resolve against the working directory first, then the
    // directory holding the config file.
    if (!c.data.path.empty()) {
      std::filesystem::path p = c.data.path;
      if (p.is_relative() && !std::filesystem::exists(p)) {
        const auto alt = path.parent_path() / p;
        if (std::filesystem::exists(alt)) c.data.path = alt.string();
      }
    }
    return c;
  });
}

SweepAxis parse_sweep_axis(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error("sweep must look like name=v1,v2,... (got '" + std::string(text) + "')");
  }
  SweepAxis axis{std::string(text.substr(0, eq)), {}};
  std::string_view rest = text.substr(eq + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string tok(rest.substr(0, comma));
    try {
      std::size_t used = 0;
      axis.values.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error("sweep value '" + tok + "' is not a number");
    }
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (axis.values.empty()) throw Error("sweep '" + axis.name + "' has no values");
  return axis;
}

void apply_parameter(ExperimentConfig& cfg, std::string_view name, double value) {
  if (name == "query_fraction") {
    cfg.fedkt.query_fraction = value;
  } else if (name == "public_fraction") {
    cfg.public_fraction = value;
  } else if (name == "s") {
    cfg.fedkt.s = to_count(value, name);
  } else if (name == "t") {
    cfg.fedkt.t = to_count(value, name);
  } else if (name == "n") {
    cfg.fedkt.n = to_count(value, name);
  } else if (name == "gamma") {
    cfg.fedkt.gamma = value;
  } else if (name == "beta") {
    cfg.beta = value;
  } else {
    throw Error("unknown sweep parameter '" + std::string(name) +
                "' (expected query_fraction, public_fraction, s, t, n, gamma or beta)");
  }
}

double baseline_solo(std::span<const Dataset> parties, const Dataset& test,
                     const ModelSpec& spec, Rng& rng) {
  if (parties.empty()) throw Error("SOLO needs at least one party");
  std::vector<double> acc;
  for (std::size_t i = 0; i < parties.size(); ++i) {
    if (parties[i].empty()) throw Error("party " + std::to_string(i) + " has no data");
    Rng r = rng.derive({i});
    acc.push_back(accuracy(*fit(spec, parties[i], r), test));
  }
  return mean(acc);
}

double baseline_centralized_pate(const Dataset& train, const Dataset& pub,
                                 const Dataset& test, std::size_t t_total,
                                 const ModelSpec& teacher_spec,
                                 const ModelSpec& student_spec, Rng& rng) {
  if (t_total == 0) throw Error("PATE needs at least one teacher");
  if (train.size() < t_total) throw Error("training set smaller than the teacher count");
  if (pub.empty()) throw Error("public dataset is empty");
  Rng split_rng = rng.derive({0});
  const PartitionLayout chunks = homogeneous_partition(train, t_total, split_rng);
  std::vector<ClassifierPtr> teachers;
  for (std::size_t k = 0; k < t_total; ++k) {
    Rng r = rng.derive({1, k});
    teachers.push_back(fit(teacher_spec, train.subset(chunks.party_indices[k]), r));
  }
  std::vector<ClassId> labels;
  labels.reserve(pub.size());
  for (std::size_t q = 0; q < pub.size(); ++q) {
    labels.push_back(argmax_first(ensemble_votes(teachers, pub.features(q), train.num_classes()).counts()));
  }
  Rng student_rng = rng.derive({2});
  return accuracy(*fit(student_spec, pub.with_labels(labels), student_rng), test);
}

Dataset load_source(const DataSource& source, std::uint64_t seed) {
  Rng rng = Rng(seed).derive({id(Stream::kSynthetic)});
  if (source.synthetic == "blobs") return make_blobs(source.blobs, rng);
  if (source.synthetic == "xor") return make_xor(source.xor_task, rng);
  if (!source.synthetic.empty()) throw Error("unknown synthetic task '" + source.synthetic + "'");
  return load_dataset(source.path, source.format, source.load);
}

TrialResult run_trial(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed) {
  using clock = std::chrono::steady_clock;
  TrialResult out;
  out.seed = seed;
  const Rng root(seed);

  auto t0 = clock::now();
  DataSplit split = in_stage("split", [&] {
    Rng r = root.derive({id(Stream::kSplit)});
    return split_train_public_test(data, cfg.split, r);
  });
  Dataset aux = in_stage("split", [&] {
    if (cfg.public_fraction >= 1.0) return split.public_unlabeled;
    Rng r = root.derive({id(Stream::kPublicSubset)});
    auto idx = select_queries(split.public_unlabeled.size(), cfg.public_fraction, r);
    std::sort(idx.begin(), idx.end());
    return split.public_unlabeled.subset(idx);
  });
  out.public_examples = aux.size();

  std::size_t partition_draws = 1;
  std::vector<Dataset> parties = in_stage("partition", [&] {
    PartitionLayout layout;
    if (cfg.partition == PartitionScheme::kHomogeneous) {
      Rng r = root.derive({id(Stream::kPartition)});
      layout = homogeneous_partition(split.train, cfg.fedkt.n, r);
    } else {
      if (cfg.min_party_size * cfg.fedkt.n > split.train.size()) {
        throw Error("min_party_size * n exceeds the training set");
      }
      auto smallest = [](const PartitionLayout& l) {
        std::size_t m = SIZE_MAX;
        for (const auto& p : l.party_indices) m = std::min(m, p.size());
        return m;
      };
      constexpr std::size_t kMaxDraws = 1000;
      std::size_t draw = 0;
      for (; draw < kMaxDraws; ++draw) {
        Rng r = root.derive({id(Stream::kPartition), draw});
        layout = dirichlet_partition(split.train, cfg.fedkt.n, cfg.beta, r);
        if (smallest(layout) >= cfg.min_party_size) break;
      }
      if (draw == kMaxDraws) {
        throw Error("no Dirichlet draw in " + std::to_string(kMaxDraws) +
                    " gave every party at least " + std::to_string(cfg.min_party_size) +
                    " examples");
      }
      partition_draws = draw + 1;
    }
    std::vector<Dataset> ps;
    for (const auto& idx : layout.party_indices) ps.push_back(split.train.subset(idx));
    return ps;
  });
  out.partition_draws = partition_draws;
  out.smallest_party = std::min_element(parties.begin(), parties.end(),
                                        [](const Dataset& a, const Dataset& b) {
                                          return a.size() < b.size();
                                        })->size();
  out.timings_seconds["prepare"] = seconds_since(t0);

  FedKtConfig fc = cfg.fedkt;
  fc.u = data.num_classes();
  fc.seed = seed;

  t0 = clock::now();
  FedKtResult result = in_stage("fedkt", [&] {
    Rng r = root;
    return run_fedkt(parties, aux, fc, r);
  });
  out.timings_seconds["fedkt"] = seconds_since(t0);
  out.fedkt_accuracy = in_stage("evaluate", [&] { return accuracy(*result.final_model, split.test); });
  out.privacy = result.privacy;
  out.communication = result.communication;
  out.fedavg_bytes = result.communication.fedavg_bytes(fc.n, cfg.fedavg_rounds);
  out.server_queries = result.server_records.size();
  out.party_queries = result.parties.front().records.front().size();
  {
    double sum = 0.0;
    std::size_t count = 0;
    for (const PartyOutcome& p : result.parties) {
      for (const auto& part : p.records) {
        for (const TransferRecord& r : part) {
          sum += r.gap;
          ++count;
        }
      }
    }
    out.mean_party_gap = count ? sum / static_cast<double>(count) : 0.0;
    sum = 0.0;
    for (const TransferRecord& r : result.server_records) {
      sum += r.gap;
      if (r.abstained) ++out.server_abstentions;
    }
    out.mean_server_gap = result.server_records.empty()
                              ? 0.0
                              : sum / static_cast<double>(result.server_records.size());
  }

  if (cfg.run_solo) {
    t0 = clock::now();
    out.solo_accuracy = in_stage("solo", [&] {
      Rng r = root.derive({id(Stream::kSolo)});
      return baseline_solo(parties, split.test, fc.final_spec, r);
    });
    out.timings_seconds["solo"] = seconds_since(t0);
  }
  if (cfg.run_pate) {
    t0 = clock::now();
    out.pate_accuracy = in_stage("pate", [&] {
      Rng r = root.derive({id(Stream::kPate)});
      return baseline_centralized_pate(split.train, aux, split.test,
                                       cfg.pate_teachers.value_or(fc.n), fc.teacher_spec,
                                       fc.final_spec, r);
    });
    out.timings_seconds["pate"] = seconds_since(t0);
  }
  return out;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  in_stage("config", [&] { cfg.validate(); });
  const Dataset data = in_stage("load", [&] { return load_source(cfg.data, cfg.seed); });
  return run_experiment(cfg, data);
}

RunReport run_experiment(const ExperimentConfig& cfg, const Dataset& data) {
  in_stage("config", [&] { cfg.validate(); });
  RunReport report;
  report.config = config_to_json(cfg);
  report.dataset.name = cfg.data.synthetic.empty()
                            ? std::filesystem::path(cfg.data.path).filename().string()
                            : cfg.data.synthetic;
  report.dataset.examples = data.size();
  report.dataset.dim = data.dim();
  report.dataset.classes = data.num_classes();
  const double n = static_cast<double>(data.size());
  report.dataset.pub = static_cast<std::size_t>(std::floor(cfg.split.pub * n + 1e-9));
  report.dataset.test = static_cast<std::size_t>(std::floor(cfg.split.test * n + 1e-9));
  report.dataset.train = data.size() - std::min(data.size(), report.dataset.pub + report.dataset.test);
  report.deviations = deviation_notes(cfg, data);

  for (const auto& params : expand_sweep(cfg.sweep)) {
    ExperimentConfig pc = cfg;
    in_stage("config", [&] {
      for (const auto& [name, value] : params) apply_parameter(pc, name, value);
      pc.validate();
    });
    SweepPoint point;
    point.params = params;
    std::vector<double> fed, solo, pate, eps;
    for (std::size_t k = 0; k < cfg.trials; ++k) {
      TrialResult r = run_trial(data, pc, cfg.seed + k);
      fed.push_back(r.fedkt_accuracy);
      if (r.solo_accuracy) solo.push_back(*r.solo_accuracy);
      if (r.pate_accuracy) pate.push_back(*r.pate_accuracy);
      if (r.privacy) eps.push_back(r.privacy->epsilon);
      point.trials.push_back(std::move(r));
    }
    point.mean_fedkt_accuracy = mean(fed);
    if (!solo.empty()) point.mean_solo_accuracy = mean(solo);
    if (!pate.empty()) point.mean_pate_accuracy = mean(pate);
    if (!eps.empty()) point.mean_epsilon = mean(eps);
    report.points.push_back(std::move(point));
  }

  if (!cfg.output.empty()) {
    in_stage("report", [&] {
      const json j = report_to_json(report);
      validate_report(j);
      write_report_atomic(j, cfg.output);
    });
  }
  return report;
}

}  // namespace fedkt
