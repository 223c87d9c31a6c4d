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

#ifndef FEDKT_TRANSFER_H_
#define FEDKT_TRANSFER_H_

// Two-tier knowledge transfer. Each party splits its data s times into t
// disjoint subsets, trains one teacher per subset, labels the public queries
// by (optionally noisy) teacher vote and distills one student per partition.
// The server treats the n*s students as teachers, counts votes with
// consistent voting (a party contributes s votes only when all its students
// agree), optionally adds noise, and distills the final model.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fedkt/domain.h"
#include "fedkt/models.h"
#include "fedkt/privacy.h"
#include "fedkt/rng.h"

namespace fedkt {

struct FedKtConfig {
  std::size_t n = 1;  // parties
  std::size_t s = 1;  // partitions per party
  std::size_t t = 1;  // subsets (teachers) per partition
  std::uint32_t u = 2;
  double gamma = 0.0;  // Laplace scale is 1/gamma; unused at L0
  PrivacyLevel level = PrivacyLevel::kL0;
  // Fraction of the public set answered by the noisy tier (both tiers at L0).
  double query_fraction = 1.0;
  double delta = 1e-5;
  ModelSpec teacher_spec = ModelSpec::defaults(ModelKind::kRandomForest);
  ModelSpec student_spec = ModelSpec::defaults(ModelKind::kRandomForest);
  ModelSpec final_spec = ModelSpec::defaults(ModelKind::kRandomForest);
  std::uint64_t seed = 0;
  // Debug only: count every student vote at the server instead of requiring
  // per-party agreement. Enables example-level L1 accounting.
  bool consistent_voting = true;

  void validate() const;
};

struct TransferRecord {
  std::size_t query = 0;  // index into the public set
  VoteHistogram votes{1};  // pre-noise
  ClassId label = 0;      // emitted (possibly noisy) label
  double gap = 0.0;       // top-2 gap of `votes`
  bool abstained = false; // server histogram was all zero
};

struct PartyOutcome {
  std::vector<ClassifierPtr> students;                // one per partition
  std::vector<std::vector<TransferRecord>> records;   // [partition][query]
  std::vector<std::vector<std::size_t>> subset_sizes; // [partition][subset]
};

struct CommunicationReport {
  std::size_t total_bytes = 0;  // sum over all n*s students
  std::size_t num_students = 0;
  double mean_student_bytes = 0.0;

  // One-round-trip-per-round model averaging cost 2 n M r, using the mean
  // student size as M.
  double fedavg_bytes(std::size_t n, std::size_t rounds) const {
    return 2.0 * static_cast<double>(n) * mean_student_bytes * static_cast<double>(rounds);
  }
};

struct ServerOutcome {
  ClassifierPtr final_model;
  std::vector<TransferRecord> records;
  std::optional<PrivacyReport> privacy;
};

struct FedKtResult {
  ClassifierPtr final_model;
  std::vector<PartyOutcome> parties;
  std::vector<TransferRecord> server_records;
  std::optional<PrivacyReport> privacy;  // absent at L0
  CommunicationReport communication;
};

// counts[m] = number of models predicting m. Throws on an empty model list.
VoteHistogram ensemble_votes(std::span<const ClassifierPtr> models,
                             std::span<const double> x, std::uint32_t u);

// Plain argmax (smallest-index tie-break) when gamma is absent, otherwise
// argmax after adding i.i.d. Laplace(0, 1/gamma) to every count.
ClassId noisy_argmax(const VoteHistogram& hist, std::optional<double> gamma, Rng& rng);

// predictions[i][k] is student k of party i. Party i adds s votes to class m
// iff all of its s students predict m. Throws if a row is not length s.
VoteHistogram consistent_vote(const std::vector<std::vector<ClassId>>& predictions,
                              std::size_t s, std::uint32_t u);

// Every student of every party votes once.
VoteHistogram plurality_vote(const std::vector<std::vector<ClassId>>& predictions,
                             std::uint32_t u);

// The first ceil(fraction * aux_size) entries of a seeded permutation.
// Throws Error("no queries answered") if that is zero.
std::vector<std::size_t> select_queries(std::size_t aux_size, double fraction, Rng& rng);

// Query sets used by each tier for a configuration.
struct QueryPlan {
  std::vector<std::size_t> party;
  std::vector<std::size_t> server;
};
QueryPlan plan_queries(std::size_t aux_size, const FedKtConfig& cfg, Rng& rng);

// Party tier for one party, answering the given public-set queries.
PartyOutcome train_party_students(const Dataset& local, const Dataset& aux,
                                  const FedKtConfig& cfg,
                                  std::span<const std::size_t> queries, Rng& rng);
// Same, with the query set drawn from `rng` via plan_queries.
PartyOutcome train_party_students(const Dataset& local, const Dataset& aux,
                                  const FedKtConfig& cfg, Rng& rng);

// Server tier over all parties' students.
ServerOutcome run_server_tier(std::span<const PartyOutcome> parties,
                              const Dataset& aux, const FedKtConfig& cfg,
                              std::span<const std::size_t> queries, Rng& rng);

// The full protocol. Party i uses the stream rng.derive({Stream::kParty, i}),
// so results do not depend on the order parties are processed in.
FedKtResult run_fedkt(std::span<const Dataset> parties, const Dataset& aux,
                      const FedKtConfig& cfg, Rng& rng);

CommunicationReport communication_cost(std::span<const PartyOutcome> parties);

}  // namespace fedkt

#endif  // FEDKT_TRANSFER_H_
