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

#ifndef FEDKT_EXPERIMENT_H_
#define FEDKT_EXPERIMENT_H_

// Experiment runner: load data, split, partition across parties, run the
// protocol and the SOLO / centralized-PATE baselines, and collect a report.
// Config and report are JSON; see README.md for both schemas.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedkt/dataset_io.h"
#include "fedkt/domain.h"
#include "fedkt/models.h"
#include "fedkt/privacy.h"
#include "fedkt/synthetic.h"
#include "fedkt/transfer.h"

namespace fedkt {

// An Error raised while running one stage of an experiment. what() reads
// "<stage>: <cause>".
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error(stage + ": " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

enum class PartitionScheme { kDirichlet, kHomogeneous };

std::string_view to_string(PartitionScheme scheme);
PartitionScheme parse_partition_scheme(std::string_view text);

struct DataSource {
  // Exactly one of `path` and `synthetic` is set.
  std::string path;
  DataFormat format = DataFormat::kCsv;
  LoadOptions load;
  std::string synthetic;  // "blobs" or "xor"
  BlobsOptions blobs;
  XorOptions xor_task;
};

// One swept parameter. Names: query_fraction, public_fraction, s, t, n,
// gamma, beta.
struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct ExperimentConfig {
  DataSource data;
  SplitFractions split;
  PartitionScheme partition = PartitionScheme::kDirichlet;
  double beta = 0.5;
  // Dirichlet draws are repeated (on fresh derived streams) until every party
  // holds at least this many examples. 0 accepts the first draw.
  std::size_t min_party_size = 10;
  // fedkt.u is overwritten with the dataset's class count.
  FedKtConfig fedkt = default_protocol_config();
  // Share of the public set made available to the protocol.
  double public_fraction = 1.0;
  bool run_solo = true;
  bool run_pate = true;
  std::optional<std::size_t> pate_teachers;  // defaults to n
  std::size_t fedavg_rounds = 10;             // r in the 2nMr comparison
  std::size_t trials = 1;                     // seeds seed, seed+1, ...
  std::uint64_t seed = 0;
  std::vector<SweepAxis> sweep;               // cartesian product
  std::string output;                         // report path, empty for none

  static FedKtConfig default_protocol_config();
  void validate() const;
};

// Unknown keys are rejected so typos do not silently fall back to defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

// "name=v1,v2,..." as accepted on the command line.
SweepAxis parse_sweep_axis(std::string_view text);
// Sets one sweepable parameter. Throws on an unknown name.
void apply_parameter(ExperimentConfig& cfg, std::string_view name, double value);

struct TrialResult {
  std::uint64_t seed = 0;
  double fedkt_accuracy = 0.0;
  std::optional<double> solo_accuracy;
  std::optional<double> pate_accuracy;
  std::optional<PrivacyReport> privacy;
  CommunicationReport communication;
  double fedavg_bytes = 0.0;
  std::size_t public_examples = 0;
  std::size_t partition_draws = 1;
  std::size_t smallest_party = 0;
  std::size_t party_queries = 0;
  std::size_t server_queries = 0;
  std::size_t server_abstentions = 0;
  double mean_party_gap = 0.0;
  double mean_server_gap = 0.0;
  // Wall clock; the only nondeterministic part of a report.
  std::map<std::string, double> timings_seconds;
};

struct SweepPoint {
  std::map<std::string, double> params;
  std::vector<TrialResult> trials;
  double mean_fedkt_accuracy = 0.0;
  std::optional<double> mean_solo_accuracy;
  std::optional<double> mean_pate_accuracy;
  std::optional<double> mean_epsilon;
};

struct DatasetSummary {
  std::string name;
  std::size_t examples = 0;
  std::size_t dim = 0;
  std::uint32_t classes = 0;
  std::size_t train = 0;
  std::size_t pub = 0;
  std::size_t test = 0;
};

struct RunReport {
  nlohmann::json config;
  DatasetSummary dataset;
  std::vector<SweepPoint> points;
  std::vector<std::string> deviations;
};

inline constexpr const char* kReportSchema = "fedkt-report/1";

// Mean test accuracy of models trained on each party's data alone.
double baseline_solo(std::span<const Dataset> parties, const Dataset& test,
                     const ModelSpec& spec, Rng& rng);

// t_total teachers on disjoint random chunks of the full training set,
// plain-argmax labels on `pub`, one student evaluated on `test`.
double baseline_centralized_pate(const Dataset& train, const Dataset& pub,
                                 const Dataset& test, std::size_t t_total,
                                 const ModelSpec& teacher_spec,
                                 const ModelSpec& student_spec, Rng& rng);

Dataset load_source(const DataSource& source, std::uint64_t seed);

// One seed of one sweep point. `cfg` already carries the point's parameters.
TrialResult run_trial(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed);

// Every sweep point times every trial. Writes the report when cfg.output is
// set. Failures are rethrown as StageError.
RunReport run_experiment(const ExperimentConfig& cfg);
// Same, with the data already loaded.
RunReport run_experiment(const ExperimentConfig& cfg, const Dataset& data);

nlohmann::json privacy_to_json(const PrivacyReport& privacy);
nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);
// Throws Error naming the first offending field.
void validate_report(const nlohmann::json& j);
// Copy of `j` with every "timings_seconds" member removed.
nlohmann::json strip_timings(const nlohmann::json& j);
// Writes to a temporary sibling and renames over `path`.
void write_report_atomic(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace fedkt

#endif  // FEDKT_EXPERIMENT_H_
