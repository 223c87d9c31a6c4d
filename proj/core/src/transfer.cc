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

#include "fedkt/transfer.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedkt/partition.h"

namespace fedkt {

void FedKtConfig::validate() const {
  if (n == 0 || s == 0 || t == 0) throw Error("n, s and t must all be >= 1");
  if (u == 0) throw Error("u must be >= 1");
  if (!(query_fraction > 0.0 && query_fraction <= 1.0)) {
    throw Error("query_fraction must lie in (0, 1]");
  }
  if (level != PrivacyLevel::kL0 && !(gamma > 0.0)) {
    throw Error("gamma must be positive when noise is enabled");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw Error("delta must lie in (0, 1)");
  teacher_spec.validate();
  student_spec.validate();
  final_spec.validate();
}

VoteHistogram ensemble_votes(std::span<const ClassifierPtr> models,
                             std::span<const double> x, std::uint32_t u) {
  if (models.empty()) throw Error("ensemble_votes needs at least one model");
  VoteHistogram h(u);
  for (const ClassifierPtr& m : models) h[m->predict(x)] += 1.0;
  return h;
}

ClassId noisy_argmax(const VoteHistogram& hist, std::optional<double> gamma, Rng& rng) {
  if (!gamma) return argmax_first(hist.counts());
  const double scale = 1.0 / *gamma;
  std::vector<double> noisy(hist.counts().begin(), hist.counts().end());
  for (double& v : noisy) v += sample_laplace(scale, rng);
  return argmax_first(noisy);
}

VoteHistogram consistent_vote(const std::vector<std::vector<ClassId>>& predictions,
                              std::size_t s, std::uint32_t u) {
  VoteHistogram h(u);
  for (const auto& row : predictions) {
    if (row.size() != s) throw Error("prediction row length does not match s");
    if (std::all_of(row.begin(), row.end(), [&](ClassId c) { return c == row.front(); })) {
      h[row.front()] += static_cast<double>(s);
    }
  }
  return h;
}

VoteHistogram plurality_vote(const std::vector<std::vector<ClassId>>& predictions,
                             std::uint32_t u) {
  VoteHistogram h(u);
  for (const auto& row : predictions) {
    for (ClassId c : row) h[c] += 1.0;
  }
  return h;
}

std::vector<std::size_t> select_queries(std::size_t aux_size, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("query fraction must lie in (0, 1]");
  // The small slack keeps e.g. 0.01 * 4070 = 40.7000...01 from rounding to 42.
  const auto count = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(aux_size) - 1e-9));
  if (count == 0) throw Error("no queries answered");
  std::vector<std::size_t> perm = rng.permutation(aux_size);
  perm.resize(std::min(count, aux_size));
  return perm;
}

QueryPlan plan_queries(std::size_t aux_size, const FedKtConfig& cfg, Rng& rng) {
  std::vector<std::size_t> all(aux_size);
  for (std::size_t i = 0; i < aux_size; ++i) all[i] = i;
  if (aux_size == 0) throw Error("no queries answered");
  std::vector<std::size_t> chosen = select_queries(aux_size, cfg.query_fraction, rng);
  switch (cfg.level) {
    case PrivacyLevel::kL0:
      return {chosen, chosen};
    case PrivacyLevel::kL1:
      return {all, chosen};
    case PrivacyLevel::kL2:
      return {chosen, all};
  }
  return {chosen, chosen};
}

PartyOutcome train_party_students(const Dataset& local, const Dataset& aux,
                                  const FedKtConfig& cfg,
                                  std::span<const std::size_t> queries, Rng& rng) {
  if (aux.empty()) throw Error("public dataset is empty");
  if (queries.empty()) throw Error("no queries answered");
  if (local.num_classes() != cfg.u || aux.num_classes() != cfg.u) {
    throw Error("dataset class count does not match configured u");
  }
  Rng split_rng = rng.derive({id(Stream::kLocalSplit)});
  const LocalSplit split = make_local_split(local.size(), cfg.s, cfg.t, split_rng);
  const std::optional<double> noise =
      cfg.level == PrivacyLevel::kL2 ? std::optional<double>(cfg.gamma) : std::nullopt;
  const Dataset query_set = aux.subset(queries);

  PartyOutcome out;
  for (std::size_t j = 0; j < cfg.s; ++j) {
    std::vector<ClassifierPtr> teachers;
    std::vector<std::size_t> sizes;
    for (std::size_t k = 0; k < cfg.t; ++k) {
      const auto& subset = split.subsets[j][k];
      sizes.push_back(subset.size());
      Rng teacher_rng = rng.derive({id(Stream::kTeacher), j, k});
      teachers.push_back(fit(cfg.teacher_spec, local.subset(subset), teacher_rng));
    }
    Rng noise_rng = rng.derive({id(Stream::kPartyNoise), j});
    std::vector<TransferRecord> records;
    std::vector<ClassId> labels;
    records.reserve(queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
      TransferRecord rec;
      rec.query = queries[q];
      rec.votes = ensemble_votes(teachers, query_set.features(q), cfg.u);
      rec.gap = rec.votes.top2_gap();
      rec.label = noisy_argmax(rec.votes, noise, noise_rng);
      labels.push_back(rec.label);
      records.push_back(std::move(rec));
    }
    Rng student_rng = rng.derive({id(Stream::kStudent), j});
    out.students.push_back(fit(cfg.student_spec, query_set.with_labels(labels), student_rng));
    out.records.push_back(std::move(records));
    out.subset_sizes.push_back(std::move(sizes));
  }
  return out;
}

PartyOutcome train_party_students(const Dataset& local, const Dataset& aux,
                                  const FedKtConfig& cfg, Rng& rng) {
  cfg.validate();
  Rng query_rng = rng.derive({id(Stream::kQueries)});
  const QueryPlan plan = plan_queries(aux.size(), cfg, query_rng);
  return train_party_students(local, aux, cfg, plan.party, rng);
}

ServerOutcome run_server_tier(std::span<const PartyOutcome> parties,
                              const Dataset& aux, const FedKtConfig& cfg,
                              std::span<const std::size_t> queries, Rng& rng) {
  if (parties.empty()) throw Error("server tier needs at least one party");
  if (queries.empty()) throw Error("no queries answered");
  const std::optional<double> noise =
      cfg.level == PrivacyLevel::kL1 ? std::optional<double>(cfg.gamma) : std::nullopt;
  Rng noise_rng = rng.derive({id(Stream::kServerNoise)});
  const Dataset query_set = aux.subset(queries);

  ServerOutcome out;
  std::vector<ClassId> labels;
  std::vector<std::vector<ClassId>> preds(parties.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    auto x = query_set.features(q);
    for (std::size_t i = 0; i < parties.size(); ++i) {
      preds[i].clear();
      for (const ClassifierPtr& student : parties[i].students) preds[i].push_back(student->predict(x));
    }
    TransferRecord rec;
    rec.query = queries[q];
    rec.votes = cfg.consistent_voting ? consistent_vote(preds, cfg.s, cfg.u)
                                      : plurality_vote(preds, cfg.u);
    rec.gap = rec.votes.top2_gap();
    rec.abstained = rec.votes.all_zero();
    rec.label = noisy_argmax(rec.votes, noise, noise_rng);
    labels.push_back(rec.label);
    out.records.push_back(std::move(rec));
  }
  Rng final_rng = rng.derive({id(Stream::kFinal)});
  out.final_model = fit(cfg.final_spec, query_set.with_labels(labels), final_rng);

  if (cfg.level == PrivacyLevel::kL1) {
    std::vector<VoteHistogram> hists;
    for (const auto& r : out.records) hists.push_back(r.votes);
    PrivacyReport report = account_server_queries(hists, cfg.s, cfg.gamma, cfg.delta);
    if (!cfg.consistent_voting) {
      std::vector<std::vector<std::vector<double>>> gaps;
      for (const PartyOutcome& p : parties) {
        auto& party = gaps.emplace_back();
        for (const auto& partition : p.records) {
          auto& g = party.emplace_back();
          for (const auto& r : partition) g.push_back(r.gap);
        }
      }
      const std::size_t z = compute_z(gaps);
      PrivacyLedger ledger(static_cast<double>(z), cfg.gamma);
      for (const auto& h : hists) ledger.record(h);
      report.z = z;
      report.example_level_epsilon = ledger.epsilon(cfg.delta).epsilon;
    }
    out.privacy = std::move(report);
  } else if (cfg.level == PrivacyLevel::kL2) {
    std::vector<std::vector<std::vector<VoteHistogram>>> hists;
    for (const PartyOutcome& p : parties) {
      auto& party = hists.emplace_back();
      for (const auto& partition : p.records) {
        auto& h = party.emplace_back();
        for (const auto& r : partition) h.push_back(r.votes);
      }
    }
    out.privacy = account_party_queries(hists, cfg.t, cfg.gamma, cfg.delta);
  }
  return out;
}

CommunicationReport communication_cost(std::span<const PartyOutcome> parties) {
  CommunicationReport c;
  for (const PartyOutcome& p : parties) {
    for (const ClassifierPtr& s : p.students) {
      c.total_bytes += serialized_size(*s);
      ++c.num_students;
    }
  }
  if (c.num_students > 0) {
    c.mean_student_bytes =
        static_cast<double>(c.total_bytes) / static_cast<double>(c.num_students);
  }
  return c;
}

FedKtResult run_fedkt(std::span<const Dataset> parties, const Dataset& aux,
                      const FedKtConfig& cfg, Rng& rng) {
  cfg.validate();
  if (parties.size() != cfg.n) {
    throw Error("expected " + std::to_string(cfg.n) + " parties, got " +
                std::to_string(parties.size()));
  }
  if (aux.empty()) throw Error("public dataset is empty");
  Rng query_rng = rng.derive({id(Stream::kQueries)});
  const QueryPlan plan = plan_queries(aux.size(), cfg, query_rng);

  FedKtResult result;
  result.parties.reserve(parties.size());
  for (std::size_t i = 0; i < parties.size(); ++i) {
    Rng party_rng = rng.derive({id(Stream::kParty), i});
    try {
      result.parties.push_back(
          train_party_students(parties[i], aux, cfg, plan.party, party_rng));
    } catch (const Error& e) {
      throw Error("party " + std::to_string(i) + ": " + e.what());
    }
  }
  ServerOutcome server = run_server_tier(result.parties, aux, cfg, plan.server, rng);
  result.final_model = std::move(server.final_model);
  result.server_records = std::move(server.records);
  result.privacy = std::move(server.privacy);
  result.communication = communication_cost(result.parties);
  return result;
}

}  // namespace fedkt
