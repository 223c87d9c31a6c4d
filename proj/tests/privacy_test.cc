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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fedkt/privacy.h"
#include "oracle.h"

namespace fedkt {
namespace {

double rel_err(double got, double want) {
  if (got == want) return 0.0;
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

TEST(PureDp, Substitution) {
  EXPECT_DOUBLE_EQ(pure_dp_epsilon_l1(2, 0.04), 0.16);
  EXPECT_DOUBLE_EQ(pure_dp_epsilon_l1(1, 0.3), 0.6);
  EXPECT_DOUBLE_EQ(pure_dp_epsilon_l2_party(25, 0.04), 2.0);
  EXPECT_THROW(pure_dp_epsilon_l1(2, 0.0), Error);
  EXPECT_THROW(pure_dp_epsilon_l2_party(0, 0.1), Error);
  EXPECT_LT(pure_dp_epsilon_l2_party(3, 0.1), pure_dp_epsilon_l2_party(4, 0.1));
}

TEST(GapFailureBound, KnownValues) {
  EXPECT_NEAR(gap_failure_bound(VoteHistogram({10, 0}, 2), 0.1), 3.0 / (4.0 * std::exp(1.0)),
              1e-15);
  EXPECT_NEAR(gap_failure_bound(VoteHistogram({10, 0}, 2), 0.1), 0.27591, 5e-6);
  EXPECT_DOUBLE_EQ(gap_failure_bound(VoteHistogram({5, 5}, 2), 0.7), 0.5);
  EXPECT_NEAR(gap_failure_bound(VoteHistogram({10, 0, 0}, 3), 0.1), 0.55182, 1e-5);
  EXPECT_DOUBLE_EQ(gap_failure_bound(VoteHistogram({3, 3, 3, 3}, 4), 0.1), 1.0);
  EXPECT_THROW(gap_failure_bound(VoteHistogram({4}, 1), 0.1), Error);
}

TEST(GapFailureBound, MatchesOracle) {
  Rng rng(21);
  for (int i = 0; i < 500; ++i) {
    const std::uint32_t u = 2 + static_cast<std::uint32_t>(rng.uniform_index(4));
    std::vector<double> c(u);
    for (double& x : c) x = static_cast<double>(rng.uniform_index(30));
    const double gamma = 0.01 + 0.5 * rng.uniform();
    EXPECT_LE(rel_err(gap_failure_bound(VoteHistogram(c, u), gamma),
                      oracle::gap_failure_bound(c, gamma)),
              1e-12);
  }
}

TEST(MomentsBound, KnownValues) {
  EXPECT_EQ(moments_bound_l1_party_level(0.0, 3, 0.1, 5), 0.0);
  EXPECT_EQ(moments_bound_l2_example_level(0.0, 0.1, 5), 0.0);
  EXPECT_NEAR(moments_bound_l1_party_level(0.9, 1, 0.05, 1), 0.01, 1e-15);
  EXPECT_NEAR(moments_bound_l2_example_level(0.9, 0.05, 1), 0.01, 1e-15);
  EXPECT_NEAR(moments_bound_l1_example_level(0.9, 1, 0.05, 1), 0.01, 1e-15);
  EXPECT_NEAR(moments_bound_l2_party_level(0.9, 5, 0.05, 1), 0.25, 1e-14);
  EXPECT_EQ(moments_bound_l1_example_level(0.3, 0, 0.05, 7), 0.0);
  EXPECT_EQ(moments_bound_l2_party_level(0.0, 5, 0.05, 3), 0.0);

  // s=2, gamma=0.04, lambda=8, q=0.01: the data-dependent branch is smaller.
  const double dd = std::log(0.99 * std::pow(0.99 / (1 - std::exp(0.16) * 0.01), 8) +
                             0.01 * std::exp(1.28));
  const double di = 2 * 4 * 0.04 * 0.04 * 8 * 9;
  const double got = moments_bound_l1_party_level(0.01, 2, 0.04, 8);
  EXPECT_NEAR(got, std::min(dd, di), 1e-12);
  EXPECT_LE(rel_err(got, oracle::moments_bound(0.01, 2, 0.04, 8)), 1e-10);
}

TEST(MomentsBound, MatchesOracleAndIdentities) {
  Rng rng(99);
  for (int i = 0; i < 2000; ++i) {
    const double q = rng.uniform() < 0.5 ? rng.uniform() : std::pow(10.0, -8.0 * rng.uniform());
    const double gamma = 0.01 + 0.19 * rng.uniform();
    const int lambda = 1 + static_cast<int>(rng.uniform_index(64));
    const std::size_t s = 1 + rng.uniform_index(5);
    const std::size_t t = 1 + rng.uniform_index(25);
    const std::size_t z = rng.uniform_index(6);

    const double l1 = moments_bound_l1_party_level(q, s, gamma, lambda);
    EXPECT_LE(rel_err(l1, oracle::moments_bound(q, s, gamma, lambda)), 1e-10);
    EXPECT_LE(rel_err(moments_bound_l2_example_level(q, gamma, lambda),
                      oracle::moments_bound(q, 1, gamma, lambda)),
              1e-10);
    EXPECT_LE(rel_err(moments_bound_l1_example_level(q, z, gamma, lambda),
                      oracle::moments_bound(q, z, gamma, lambda)),
              1e-10);
    EXPECT_LE(rel_err(moments_bound_l2_party_level(q, t, gamma, lambda),
                      oracle::moments_bound(q, t, gamma, lambda)),
              1e-10);

    const double indep = 2.0 * s * s * gamma * gamma * lambda * (lambda + 1.0);
    EXPECT_GE(l1, 0.0);
    EXPECT_LE(l1, indep * (1 + 1e-15));

    EXPECT_EQ(moments_bound_l2_example_level(q, gamma, lambda),
              moments_bound_l1_party_level(q, 1, gamma, lambda));
    EXPECT_EQ(moments_bound_l2_party_level(q, 1, gamma, lambda),
              moments_bound_l2_example_level(q, gamma, lambda));
    EXPECT_EQ(moments_bound_l1_example_level(q, s, gamma, lambda), l1);
  }
}

TEST(MomentsBound, ThresholdSelectsBranch) {
  const double thr = data_dependent_threshold(2, 0.05);
  EXPECT_NEAR(thr, std::expm1(0.2) / std::expm1(0.4), 1e-15);
  EXPECT_TRUE(data_dependent_branch_applies(thr * 0.99, 2, 0.05));
  EXPECT_FALSE(data_dependent_branch_applies(thr, 2, 0.05));
  EXPECT_THROW(moments_bound(1.5, 1, 0.1, 1), Error);
  EXPECT_THROW(moments_bound(0.1, 1, 0.1, 0), Error);
}

TEST(Composition, AccumulateIsElementwiseSum) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const MomentVector one =
        query_moments(rng.uniform() * 0.3, 1 + rng.uniform_index(3), 0.01 + 0.1 * rng.uniform());
    const std::size_t k = 1 + rng.uniform_index(50);
    MomentVector ledger;
    for (std::size_t i = 0; i < k; ++i) ledger = accumulate(ledger, one);
    for (int l = 1; l <= ledger.max_order(); ++l) {
      EXPECT_NEAR(ledger.at(l), static_cast<double>(k) * one.at(l),
                  1e-12 * std::max(1.0, k * one.at(l)));
    }
    EXPECT_EQ(accumulate(one, MomentVector()), one);
    const MomentVector other = query_moments(0.01, 2, 0.05);
    EXPECT_EQ(accumulate(one, other), accumulate(other, one));
  }
  EXPECT_THROW(accumulate(MomentVector(8), MomentVector(9)), Error);
}

TEST(ToEpsilon, KnownValueAndOracle) {
  MomentVector m;
  std::vector<double> alpha;
  for (int l = 1; l <= m.max_order(); ++l) {
    m.at(l) = 0.005 * l * (l + 1);
    alpha.push_back(m.at(l));
  }
  const EpsilonBound e = to_epsilon(m, 1e-5);
  EXPECT_EQ(e.lambda_star, 48);
  EXPECT_NEAR(e.epsilon, 0.48485, 1e-5);
  const oracle::Eps o = oracle::to_epsilon(alpha, 1e-5);
  EXPECT_EQ(o.lambda_star, e.lambda_star);
  EXPECT_LE(rel_err(e.epsilon, o.epsilon), 1e-12);

  const EpsilonBound zero = to_epsilon(MomentVector(), 1e-5);
  EXPECT_NEAR(zero.epsilon, std::log(1e5) / kDefaultMaxMomentOrder, 1e-15);
  EXPECT_THROW(to_epsilon(m, 0.0), Error);
  EXPECT_THROW(to_epsilon(m, 1.0), Error);
}

TEST(ToEpsilon, NonIncreasingInDelta) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    MomentVector m;
    for (int i = 0; i < 1 + static_cast<int>(rng.uniform_index(200)); ++i) {
      m = accumulate(m, query_moments(0.2 * rng.uniform(), 2, 0.04));
    }
    double prev = INFINITY;
    for (double delta : {1e-9, 1e-7, 1e-5, 1e-3, 1e-1, 0.5}) {
      const double eps = to_epsilon(m, delta).epsilon;
      EXPECT_LE(eps, prev);
      prev = eps;
    }
  }
}

TEST(ParallelCompose, ReturnsMax) {
  const std::vector<double> eps = {1.0, 2.5, 0.3};
  EXPECT_EQ(parallel_compose(eps, 1e-5).epsilon, 2.5);
  EXPECT_EQ(parallel_compose(eps, 1e-5).delta, 1e-5);
  const std::vector<double> perm = {0.3, 1.0, 2.5};
  EXPECT_EQ(parallel_compose(perm, 1e-5).epsilon, 2.5);
  const std::vector<double> single = {0.7};
  EXPECT_EQ(parallel_compose(single, 1e-5).epsilon, 0.7);
  EXPECT_THROW(parallel_compose(std::vector<double>{}, 1e-5), Error);
}

TEST(AdvancedComposition, KnownValueAndShape) {
  EXPECT_NEAR(advanced_composition_reference(0.1, 1, 1e-5), 0.4904, 5e-5);
  EXPECT_LE(rel_err(advanced_composition_reference(0.1, 1, 1e-5),
                    oracle::advanced_composition(0.1, 1, 1e-5)),
            1e-12);
  const double a = advanced_composition_reference(1e-3, 100, 1e-5);
  const double b = advanced_composition_reference(1e-3, 400, 1e-5);
  EXPECT_NEAR(b / a, 2.0, 0.01);
}

TEST(AdvancedComposition, MomentsBeatItOnHighGapStreams) {
  Rng rng(77);
  for (int stream = 0; stream < 100; ++stream) {
    const std::size_t t = 4 + rng.uniform_index(22);
    const double gamma = 0.04 + 0.16 * rng.uniform();
    const std::size_t k = 10 + rng.uniform_index(491);
    std::vector<std::vector<std::vector<VoteHistogram>>> hists(1, {{}});
    for (std::size_t q = 0; q < k; ++q) {
      // Top-2 gap at least t/2: the runner-up gets at most (t - ceil(t/2)) / 2 votes.
      const std::size_t max_second = (t - (t + 1) / 2) / 2;
      const std::size_t second = rng.uniform_index(max_second + 1);
      hists[0][0].push_back(VoteHistogram({double(t - second), double(second)}, 2));
      ASSERT_GE(hists[0][0].back().top2_gap(), t / 2.0);
    }
    const PrivacyReport r = account_party_queries(hists, t, gamma, 1e-5);
    EXPECT_LT(r.epsilon, r.advanced_composition_epsilon)
        << "t=" << t << " gamma=" << gamma << " k=" << k;
  }
}

TEST(ComputeZ, CountsPartitionsWithSmallGaps) {
  EXPECT_EQ(compute_z({{{2, 3}, {4}}, {{5}, {2}}}), 0u);
  EXPECT_EQ(compute_z({{{1, 3}, {0, 4}}, {{5}, {2}}}), 2u);
  EXPECT_EQ(compute_z({{{2, 1}, {3, 3}}}), 1u);
}

TEST(Laplace, SampleStatistics) {
  Rng rng(31);
  const double b = 2.5;
  constexpr int kDraws = 200000;
  int within = 0;
  double sum = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double x = sample_laplace(b, rng);
    sum += x;
    if (std::abs(x) <= b * std::log(2.0)) ++within;
  }
  EXPECT_NEAR(static_cast<double>(within) / kDraws, 0.5, 0.01);
  EXPECT_NEAR(sum / kDraws, 0.0, 5.0 * b * std::sqrt(2.0 / kDraws));
  EXPECT_THROW(sample_laplace(0.0, rng), Error);
}

TEST(Ledger, RecordsQueries) {
  PrivacyLedger ledger(2, 0.04);
  ledger.record(VoteHistogram({100, 0}, 2));
  ledger.record(VoteHistogram({2, 2}, 2));
  EXPECT_EQ(ledger.queries(), 2u);
  EXPECT_EQ(ledger.data_dependent_queries(), 1u);
  const double q1 = gap_failure_bound(VoteHistogram({100, 0}, 2), 0.04);
  for (int l = 1; l <= 64; ++l) {
    EXPECT_NEAR(ledger.moments().at(l),
                moments_bound(q1, 2, 0.04, l) + moments_bound(0.5, 2, 0.04, l), 1e-15);
  }
}

TEST(Accounting, ServerReportUsesMultiplierS) {
  std::vector<VoteHistogram> hists(30, VoteHistogram({90, 10}, 2));
  const PrivacyReport r = account_server_queries(hists, 2, 0.04, 1e-5);
  EXPECT_EQ(r.level, PrivacyLevel::kL1);
  EXPECT_EQ(r.queries_answered, 30u);
  EXPECT_DOUBLE_EQ(r.pure_epsilon_per_query, 0.16);
  MomentVector m;
  const double q = gap_failure_bound(hists[0], 0.04);
  for (int i = 0; i < 30; ++i) m = accumulate(m, query_moments(q, 2, 0.04));
  EXPECT_NEAR(r.epsilon, to_epsilon(m, 1e-5).epsilon, 1e-12);
  EXPECT_NEAR(r.advanced_composition_epsilon, advanced_composition_reference(0.16, 30, 1e-5),
              1e-12);
}

TEST(Accounting, PartyReportComposesInParallel) {
  // Party 1 answers more queries, so it dominates.
  std::vector<std::vector<std::vector<VoteHistogram>>> hists(2);
  hists[0] = {std::vector<VoteHistogram>(5, VoteHistogram({4, 1}, 2))};
  hists[1] = {std::vector<VoteHistogram>(20, VoteHistogram({4, 1}, 2)),
              std::vector<VoteHistogram>(20, VoteHistogram({3, 2}, 2))};
  const PrivacyReport r = account_party_queries(hists, 5, 0.1, 1e-5);
  EXPECT_EQ(r.level, PrivacyLevel::kL2);
  ASSERT_EQ(r.party_epsilons.size(), 2u);
  EXPECT_LT(r.party_epsilons[0], r.party_epsilons[1]);
  EXPECT_EQ(r.epsilon, r.party_epsilons[1]);
  ASSERT_TRUE(r.party_level_epsilon.has_value());
  EXPECT_GE(*r.party_level_epsilon, r.epsilon);
}

}  // namespace
}  // namespace fedkt
