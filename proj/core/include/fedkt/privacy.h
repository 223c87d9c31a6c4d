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

#ifndef FEDKT_PRIVACY_H_
#define FEDKT_PRIVACY_H_

// Laplace mechanism and data-dependent moments accounting for noisy-max
// label aggregation.
//
// Every moment bound has the same shape. For a mechanism that is
// (2*m*gamma, 0)-DP, where m is the sensitivity multiplier (s at the server
// under party adjacency, z for example adjacency at the server, t for
// party adjacency at a party, 1 for example adjacency at a party), and a
// per-query failure bound q:
//
//   alpha(lambda) <= min( log((1-q) * ((1-q)/(1-e^{2 m gamma} q))^lambda
//                             + q * e^{2 m gamma lambda}),
//                         2 m^2 gamma^2 lambda (lambda+1) )
//
// The first (data-dependent) term is only valid while
// q < (e^{2 m gamma} - 1)/(e^{4 m gamma} - 1); outside that region only the
// second term is used. The data-dependent term is evaluated in log space.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedkt/domain.h"
#include "fedkt/rng.h"

namespace fedkt {

inline constexpr int kDefaultMaxMomentOrder = 64;

// Accumulated log moments alpha(lambda) for lambda = 1..max_order.
class MomentVector {
 public:
  explicit MomentVector(int max_order = kDefaultMaxMomentOrder);

  int max_order() const { return static_cast<int>(alpha_.size()); }
  // 1-based moment order.
  double at(int lambda) const { return alpha_.at(static_cast<std::size_t>(lambda - 1)); }
  double& at(int lambda) { return alpha_.at(static_cast<std::size_t>(lambda - 1)); }
  std::span<const double> values() const { return alpha_; }

  bool operator==(const MomentVector&) const = default;

 private:
  std::vector<double> alpha_;
};

// One draw from Laplace(0, scale) by inverse CDF. Throws if scale <= 0.
double sample_laplace(double scale, Rng& rng);

// Server-side (L1) party-level pure DP: 2*s*gamma.
double pure_dp_epsilon_l1(std::size_t s, double gamma);
// Party-side (L2) party-level pure DP: 2*t*gamma.
double pure_dp_epsilon_l2_party(std::size_t t, double gamma);

// Upper bound on Pr[noisy argmax != argmax] for Laplace(1/gamma) noise:
//   sum_{o != o*} (2 + gamma*(v_o* - v_o)) / (4 exp(gamma*(v_o* - v_o)))
// clamped to 1. o* is the argmax with smallest-index tie-break.
// Throws if the histogram has fewer than two classes.
double gap_failure_bound(const VoteHistogram& hist, double gamma);

// Threshold (e^{2 m gamma} - 1)/(e^{4 m gamma} - 1) below which the
// data-dependent term applies.
double data_dependent_threshold(double multiplier, double gamma);
bool data_dependent_branch_applies(double q, double multiplier, double gamma);

// The bound described at the top of this header for a general multiplier.
double moments_bound(double q, double multiplier, double gamma, int lambda);

// Server noise, party adjacency: multiplier s.
double moments_bound_l1_party_level(double q, std::size_t s, double gamma, int lambda);
// Party noise, example adjacency: multiplier 1.
double moments_bound_l2_example_level(double q, double gamma, int lambda);
// Server noise, example adjacency without consistent voting: multiplier z.
// z == 0 means no student can change, so alpha is 0.
double moments_bound_l1_example_level(double q, std::size_t z, double gamma, int lambda);
// Party noise, party adjacency: multiplier t.
double moments_bound_l2_party_level(double q, std::size_t t, double gamma, int lambda);

// Per-query moment vector for orders 1..max_order.
MomentVector query_moments(double q, double multiplier, double gamma,
                           int max_order = kDefaultMaxMomentOrder);

// Sequential composition: elementwise sum. Throws on length mismatch.
MomentVector accumulate(const MomentVector& ledger, const MomentVector& per_query);

struct EpsilonBound {
  double epsilon;
  int lambda_star;
};

// epsilon = min over lambda of (alpha(lambda) + ln(1/delta)) / lambda.
// Ties pick the smallest lambda. Throws unless 0 < delta < 1.
EpsilonBound to_epsilon(const MomentVector& ledger, double delta);

struct EpsilonDelta {
  double epsilon;
  double delta;
};

// Parallel composition over disjoint data: (max_i eps_i, delta).
EpsilonDelta parallel_compose(std::span<const double> party_epsilons, double delta);

// Strong composition of k eps0-DP mechanisms (comparator only):
//   sqrt(2 k ln(1/delta')) eps0 + k eps0 (e^{eps0} - 1)
double advanced_composition_reference(double eps_per_query, std::size_t k,
                                      double delta_prime);

// z = max over parties of the number of that party's partitions containing
// at least one answered query whose top-2 vote gap is <= 1.
// gaps[party][partition] lists the gaps of that partition's queries.
std::size_t compute_z(const std::vector<std::vector<std::vector<double>>>& gaps);

// Running sequential ledger over answered queries.
class PrivacyLedger {
 public:
  PrivacyLedger(double multiplier, double gamma,
                int max_order = kDefaultMaxMomentOrder);

  // Adds one query whose pre-noise histogram is `hist`.
  void record(const VoteHistogram& hist);
  // Adds one query with an explicit failure bound q.
  void record_q(double q);

  const MomentVector& moments() const { return moments_; }
  std::size_t queries() const { return queries_; }
  std::size_t data_dependent_queries() const { return data_dependent_; }
  EpsilonBound epsilon(double delta) const { return to_epsilon(moments_, delta); }

 private:
  double multiplier_;
  double gamma_;
  MomentVector moments_;
  std::size_t queries_ = 0;
  std::size_t data_dependent_ = 0;
};

struct PrivacyReport {
  PrivacyLevel level = PrivacyLevel::kL1;
  double gamma = 0.0;
  std::size_t queries_answered = 0;
  // L1: party-level epsilon of the final model. L2: max over parties of the
  // example-level epsilon of their students.
  double epsilon = 0.0;
  double delta = 1e-5;
  int lambda_star = 0;
  double data_dependent_fraction = 0.0;
  // Pure-DP guarantee of a single answered query (2 s gamma or 2 gamma).
  double pure_epsilon_per_query = 0.0;
  // L2 only.
  std::vector<double> party_epsilons;
  std::optional<double> party_level_epsilon;  // L2, sensitivity 2t
  // L1 with consistent voting disabled only.
  std::optional<double> example_level_epsilon;
  std::optional<std::size_t> z;
  // Strong-composition comparator over the same stream.
  double advanced_composition_epsilon = 0.0;
};

// Server-tier (L1) accounting over the pre-noise server histograms.
PrivacyReport account_server_queries(std::span<const VoteHistogram> histograms,
                                     std::size_t s, double gamma, double delta,
                                     int max_order = kDefaultMaxMomentOrder);

// Party-tier (L2) accounting. hists[party][partition] is the list of
// pre-noise teacher histograms for that partition's answered queries.
// Each party composes sequentially over partitions and queries; parties
// compose in parallel.
PrivacyReport account_party_queries(
    const std::vector<std::vector<std::vector<VoteHistogram>>>& hists,
    std::size_t t, double gamma, double delta,
    int max_order = kDefaultMaxMomentOrder);

inline constexpr const char* kDataDependentBanner =
    "data-dependent epsilon: computed from the private vote histograms; "
    "not safe to publish without a sanitization step";

}  // namespace fedkt

#endif  // FEDKT_PRIVACY_H_
