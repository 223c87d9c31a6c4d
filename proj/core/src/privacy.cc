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

#include "fedkt/privacy.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace fedkt {
namespace {

double log_add_exp(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

void check_lambda(int lambda) {
  if (lambda < 1) throw Error("moment order must be >= 1");
}

void check_q(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error("q must lie in [0, 1]");
}

}  // namespace

MomentVector::MomentVector(int max_order) {
  if (max_order < 1) throw Error("max moment order must be >= 1");
  alpha_.assign(static_cast<std::size_t>(max_order), 0.0);
}

double sample_laplace(double scale, Rng& rng) {
  if (!(scale > 0.0)) throw Error("Laplace scale must be positive");
  const double u = rng.uniform_open() - 0.5;
  const double mag = -scale * std::log1p(-2.0 * std::abs(u));
  return u < 0 ? -mag : mag;
}

double pure_dp_epsilon_l1(std::size_t s, double gamma) {
  if (s == 0) throw Error("s must be >= 1");
  if (!(gamma > 0.0)) throw Error("gamma must be positive");
  return 2.0 * static_cast<double>(s) * gamma;
}

double pure_dp_epsilon_l2_party(std::size_t t, double gamma) {
  if (t == 0) throw Error("t must be >= 1");
  if (!(gamma > 0.0)) throw Error("gamma must be positive");
  return 2.0 * static_cast<double>(t) * gamma;
}

double gap_failure_bound(const VoteHistogram& hist, double gamma) {
  if (hist.num_classes() < 2) throw Error("gap_failure_bound needs at least two classes");
  if (!(gamma > 0.0)) throw Error("gamma must be positive");
  const ClassId top = argmax_first(hist.counts());
  double q = 0.0;
  for (ClassId o = 0; o < hist.num_classes(); ++o) {
    if (o == top) continue;
    const double g = gamma * (hist[top] - hist[o]);
    q += (2.0 + g) / (4.0 * std::exp(g));
  }
  return std::min(q, 1.0);
}

double data_dependent_threshold(double multiplier, double gamma) {
  const double a = 2.0 * multiplier * gamma;
  if (!(a > 0.0)) return 0.0;
  return std::expm1(a) / std::expm1(2.0 * a);
}

bool data_dependent_branch_applies(double q, double multiplier, double gamma) {
  return q < data_dependent_threshold(multiplier, gamma);
}

double moments_bound(double q, double multiplier, double gamma, int lambda) {
  check_q(q);
  check_lambda(lambda);
  if (multiplier < 0.0 || gamma < 0.0) throw Error("multiplier and gamma must be >= 0");
  const double a = 2.0 * multiplier * gamma;
  if (a == 0.0) return 0.0;
  const double l = static_cast<double>(lambda);
  const double independent = 0.5 * a * a * l * (l + 1.0);
  if (!data_dependent_branch_applies(q, multiplier, gamma)) return independent;
  double dependent = 0.0;
  if (q > 0.0) {
    // The threshold keeps e^a q < 1, so the log1p argument stays above -1.
    const double log1mq = std::log1p(-q);
    const double log_denom = std::log1p(-std::exp(a) * q);
    const double t1 = log1mq + l * (log1mq - log_denom);
    const double t2 = std::log(q) + a * l;
    dependent = log_add_exp(t1, t2);
  }
  return std::max(0.0, std::min(dependent, independent));
}

double moments_bound_l1_party_level(double q, std::size_t s, double gamma, int lambda) {
  return moments_bound(q, static_cast<double>(s), gamma, lambda);
}

double moments_bound_l2_example_level(double q, double gamma, int lambda) {
  return moments_bound(q, 1.0, gamma, lambda);
}

double moments_bound_l1_example_level(double q, std::size_t z, double gamma, int lambda) {
  return moments_bound(q, static_cast<double>(z), gamma, lambda);
}

double moments_bound_l2_party_level(double q, std::size_t t, double gamma, int lambda) {
  return moments_bound(q, static_cast<double>(t), gamma, lambda);
}

MomentVector query_moments(double q, double multiplier, double gamma, int max_order) {
  MomentVector m(max_order);
  for (int l = 1; l <= max_order; ++l) m.at(l) = moments_bound(q, multiplier, gamma, l);
  return m;
}

MomentVector accumulate(const MomentVector& ledger, const MomentVector& per_query) {
  if (ledger.max_order() != per_query.max_order()) {
    throw Error("moment vectors have different orders");
  }
  MomentVector out(ledger.max_order());
  for (int l = 1; l <= ledger.max_order(); ++l) out.at(l) = ledger.at(l) + per_query.at(l);
  return out;
}

EpsilonBound to_epsilon(const MomentVector& ledger, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("delta must lie in (0, 1)");
  const double log_inv_delta = -std::log(delta);
  EpsilonBound best{INFINITY, 0};
  for (int l = 1; l <= ledger.max_order(); ++l) {
    const double eps = (ledger.at(l) + log_inv_delta) / static_cast<double>(l);
    if (eps < best.epsilon) best = {eps, l};
  }
  return best;
}

EpsilonDelta parallel_compose(std::span<const double> party_epsilons, double delta) {
  if (party_epsilons.empty()) throw Error("parallel_compose needs at least one party");
  return {*std::max_element(party_epsilons.begin(), party_epsilons.end()), delta};
}

double advanced_composition_reference(double eps_per_query, std::size_t k,
                                      double delta_prime) {
  if (!(eps_per_query > 0.0)) throw Error("per-query epsilon must be positive");
  if (k == 0) throw Error("k must be >= 1");
  if (!(delta_prime > 0.0 && delta_prime < 1.0)) throw Error("delta' must lie in (0, 1)");
  const double kd = static_cast<double>(k);
  return std::sqrt(2.0 * kd * std::log(1.0 / delta_prime)) * eps_per_query +
         kd * eps_per_query * std::expm1(eps_per_query);
}

std::size_t compute_z(const std::vector<std::vector<std::vector<double>>>& gaps) {
  std::size_t z = 0;
  for (const auto& party : gaps) {
    std::size_t zi = 0;
    for (const auto& partition : party) {
      if (std::any_of(partition.begin(), partition.end(),
                      [](double g) { return g <= 1.0; })) {
        ++zi;
      }
    }
    z = std::max(z, zi);
  }
  return z;
}

PrivacyLedger::PrivacyLedger(double multiplier, double gamma, int max_order)
    : multiplier_(multiplier), gamma_(gamma), moments_(max_order) {
  if (!(gamma > 0.0)) throw Error("gamma must be positive");
}

void PrivacyLedger::record(const VoteHistogram& hist) {
  if (!hist.is_integral()) throw Error("ledger expects pre-noise integer histograms");
  record_q(gap_failure_bound(hist, gamma_));
}

void PrivacyLedger::record_q(double q) {
  moments_ = accumulate(moments_, query_moments(q, multiplier_, gamma_, moments_.max_order()));
  ++queries_;
  if (data_dependent_branch_applies(q, multiplier_, gamma_)) ++data_dependent_;
}

PrivacyReport account_server_queries(std::span<const VoteHistogram> histograms,
                                     std::size_t s, double gamma, double delta,
                                     int max_order) {
  PrivacyLedger ledger(static_cast<double>(s), gamma, max_order);
  for (const VoteHistogram& h : histograms) ledger.record(h);
  const EpsilonBound eb = ledger.epsilon(delta);
  PrivacyReport r;
  r.level = PrivacyLevel::kL1;
  r.gamma = gamma;
  r.queries_answered = ledger.queries();
  r.epsilon = eb.epsilon;
  r.delta = delta;
  r.lambda_star = eb.lambda_star;
  r.data_dependent_fraction =
      ledger.queries() == 0 ? 0.0
                            : static_cast<double>(ledger.data_dependent_queries()) /
                                  static_cast<double>(ledger.queries());
  r.pure_epsilon_per_query = pure_dp_epsilon_l1(s, gamma);
  if (ledger.queries() > 0) {
    r.advanced_composition_epsilon = advanced_composition_reference(
        r.pure_epsilon_per_query, ledger.queries(), delta);
  }
  return r;
}

PrivacyReport account_party_queries(
    const std::vector<std::vector<std::vector<VoteHistogram>>>& hists,
    std::size_t t, double gamma, double delta, int max_order) {
  if (hists.empty()) throw Error("party accounting needs at least one party");
  PrivacyReport r;
  r.level = PrivacyLevel::kL2;
  r.gamma = gamma;
  r.delta = delta;
  r.pure_epsilon_per_query = 2.0 * gamma;
  std::vector<double> party_level;
  std::size_t total = 0, dependent = 0, worst_queries = 0;
  for (const auto& party : hists) {
    PrivacyLedger example(1.0, gamma, max_order);
    PrivacyLedger whole_party(static_cast<double>(t), gamma, max_order);
    for (const auto& partition : party) {
      for (const VoteHistogram& h : partition) {
        example.record(h);
        whole_party.record(h);
      }
    }
    const EpsilonBound eb = example.epsilon(delta);
    if (r.party_epsilons.empty() || eb.epsilon > *std::max_element(
                                                     r.party_epsilons.begin(),
                                                     r.party_epsilons.end())) {
      r.lambda_star = eb.lambda_star;
    }
    r.party_epsilons.push_back(eb.epsilon);
    party_level.push_back(whole_party.epsilon(delta).epsilon);
    total += example.queries();
    dependent += example.data_dependent_queries();
    worst_queries = std::max(worst_queries, example.queries());
  }
  r.epsilon = parallel_compose(r.party_epsilons, delta).epsilon;
  r.party_level_epsilon = parallel_compose(party_level, delta).epsilon;
  r.queries_answered = worst_queries;
  r.data_dependent_fraction =
      total == 0 ? 0.0 : static_cast<double>(dependent) / static_cast<double>(total);
  if (worst_queries > 0) {
    r.advanced_composition_epsilon =
        advanced_composition_reference(r.pure_epsilon_per_query, worst_queries, delta);
  }
  return r;
}

}  // namespace fedkt
