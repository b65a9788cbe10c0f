#include "fixtures.hpp"
#include "oracles.hpp"

#include "semeq/allocator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace semeq;

TEST(CpuFreq, Examples) {
  EXPECT_EQ(ue_cpu_freq(0.0, 1e7, 1e-28, 1.0, 1e8, 3e9), 1e8);
  // Z C / (3 kappa V) = 16 -> 2.
  EXPECT_NEAR(ue_cpu_freq(16.0, 3.0, 1.0, 1.0, 1.0, 3.0), 2.0, 1e-15);
  EXPECT_EQ(meh_cpu_freq(0.0, 1e7, 1e-28, 1.0, 1e8, 4e9), 1e8);
  EXPECT_NEAR(meh_cpu_freq(81.0, 3.0, 1.0, 1.0, 1.0, 10.0), 3.0, 1e-15);
  EXPECT_EQ(ue_cpu_freq(1.0, 1e7, 1e-28, 0.0, 1e8, 3e9), 3e9);
  EXPECT_THROW(ue_cpu_freq(1.0, 1.0, 0.0, 1.0, 1.0, 2.0), InvalidInput);
}

TEST(CpuFreq, MatchesGoldenSection) {
  Rng rng = make_rng(1, Stream::test);
  for (int i = 0; i < 300; ++i) {
    const double Z = oracle::log_uniform(rng, 1e-4, 1e2);
    const double C = oracle::log_uniform(rng, 1e6, 1e8);
    const double V = oracle::log_uniform(rng, 1e-4, 1.0);
    const double kappa = 1e-28;
    auto f = [&](double x) { return Z * C / x + V * kappa * x * x * x; };
    const double ref = oracle::golden_section(f, 1e8, 3.5e9);
    const double got = ue_cpu_freq(Z, C, kappa, V, 1e8, 3.5e9);
    EXPECT_NEAR(got, ref, 1e-6 * ref);
  }
}

TEST(Bandwidth, Examples) {
  const std::vector<Index> same_n{64, 64};
  const std::vector<int> same_q{8, 8};
  const auto half = bandwidth_split(same_n, same_q, 1.0, 1.0, 100.0, 0.0);
  EXPECT_DOUBLE_EQ(half[0], 50.0);
  EXPECT_DOUBLE_EQ(half[1], 50.0);

  const std::vector<Index> n{100, 300};
  const std::vector<int> q{7, 7};
  const auto prop = bandwidth_split(n, q, 1.0, 0.0, 100.0, 0.0);
  EXPECT_NEAR(prop[0], 25.0, 1e-12);
  EXPECT_NEAR(prop[1], 75.0, 1e-12);

  const std::vector<Index> w{1, 99};
  const std::vector<int> one{1, 1};
  const auto clamped = bandwidth_split(w, one, 1.0, 1.0, 100.0, 10.0);
  EXPECT_NEAR(clamped[0], 10.0, 1e-12);
  EXPECT_NEAR(clamped[1], 90.0, 1e-12);

  EXPECT_THROW(bandwidth_split(w, one, 1.0, 1.0, 15.0, 10.0), Infeasible);
}

TEST(Bandwidth, SumsAndFloorsOnRandomInputs) {
  Rng rng = make_rng(2, Stream::test);
  std::uniform_int_distribution<int> pick(1, 512);
  std::uniform_int_distribution<int> bits(1, 32);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 1 + static_cast<std::size_t>(trial % 6);
    std::vector<Index> n(k);
    std::vector<int> q(k);
    for (std::size_t i = 0; i < k; ++i) {
      n[i] = pick(rng);
      q[i] = bits(rng);
    }
    const double total = 5e5;
    const double floor = total / (static_cast<double>(k) * (1.5 + trial % 10));
    const auto b = bandwidth_split(n, q, 1.0, 1.0, total, floor);
    EXPECT_NEAR(std::accumulate(b.begin(), b.end(), 0.0), total, 1e-6 * total);
    for (std::size_t i = 0; i < k; ++i) EXPECT_GE(b[i], floor * (1 - 1e-12));
    // Unfloored users keep proportional shares among themselves.
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        if (b[i] > floor * (1 + 1e-9) && b[j] > floor * (1 + 1e-9)) {
          const double wi = static_cast<double>(n[i]) * q[i];
          const double wj = static_cast<double>(n[j]) * q[j];
          EXPECT_NEAR(b[i] / b[j], wi / wj, 1e-9 * wi / wj);
        }
      }
  }
}

TEST(LambertW, ValuesAndResidual) {
  EXPECT_EQ(lambert_w0(0.0), 0.0);
  EXPECT_NEAR(lambert_w0(std::numbers::e), 1.0, 1e-15);
  EXPECT_NEAR(lambert_w0(1.0), 0.5671432904097838, 1e-15);
  EXPECT_THROW(lambert_w0(-0.1), DomainError);
  Rng rng = make_rng(3, Stream::test);
  for (int i = 0; i < 1000; ++i) {
    const double x = oracle::log_uniform(rng, 1e-12, 1e15);
    const double w = lambert_w0(x);
    EXPECT_LE(std::abs(w * std::exp(w) - x), 1e-12 * x);
    EXPECT_NEAR(w, oracle::lambert_w0_bisect(x), 1e-12 * std::max(1.0, w));
  }
}

TEST(OptimalRate, Examples) {
  EXPECT_EQ(optimal_rate(0.0, 64, 8, 1e-9, 1e5, 1.0, 4e-21, 1e4, 1e6), 1e4);
  EXPECT_FALSE(optimal_rate(1.0, 64, 8, 1e-9, 1e5, 1.0, 4e-21, 1e4, 1e3).has_value());
  EXPECT_EQ(optimal_rate(1.0, 64, 8, 1e-9, 1e5, 0.0, 4e-21, 1e4, 1e6), 1e6);
}

TEST(OptimalRate, MatchesBisectionAndFirstOrder) {
  Rng rng = make_rng(4, Stream::test);
  const double n0 = kBoltzmann * 290.0;
  int interior = 0;
  for (int i = 0; i < 300; ++i) {
    const double Z = oracle::log_uniform(rng, 1e-3, 10.0);
    const double V = oracle::log_uniform(rng, 1e-4, 1.0);
    const double gain = oracle::log_uniform(rng, 1e-11, 1e-8);
    const double B = oracle::log_uniform(rng, 2e4, 5e5);
    const Index N = 32 << (i % 5);
    const int q = 2 << (i % 4);
    const double r_max = max_rate(B, 0.15, gain, n0);
    const double r_min = std::min(1e4, 0.5 * r_max);
    const double load = Z * static_cast<double>(N) * q;
    auto deriv = [&](double R) {
      return -load / (R * R) + V * n0 / gain * std::numbers::ln2 * std::exp2(R / B);
    };
    const double ref = oracle::bisect_increasing(deriv, r_min, r_max);
    const auto got = optimal_rate(Z, N, q, gain, B, V, n0, r_min, r_max);
    ASSERT_TRUE(got.has_value());
    EXPECT_NEAR(*got, ref, 1e-6 * ref);
    if (*got > r_min && *got < r_max) {
      ++interior;
      EXPECT_LE(std::abs(deriv(*got)) / (load / (*got * *got)), 1e-6);
    }
  }
  EXPECT_GT(interior, 30);
}

TEST(Greedy, SingleUserEqualsExhaustive) {
  const SmallProblem sp = make_small_problem(1, {32, 64, 128, 256}, {2, 4, 8, 16}, 5);
  const SlotProblem p = sp.problem();
  Rng rng = make_rng(5, Stream::test);
  for (int i = 0; i < 50; ++i) {
    const auto [state, channel] = random_state(sp, rng);
    const std::vector<Choice> start{{0, 0}};
    const Selection g = greedy_select(p, state, channel, start);
    const Selection e = exhaustive_select(p, state, channel);
    EXPECT_EQ(g.best.cost, e.best.cost);
  }
}

TEST(Greedy, NeverWorseThanExhaustiveAndMonotoneWithinPass) {
  const SmallProblem sp = make_small_problem(3, {32, 96, 256}, {2, 8, 32}, 6);
  const SlotProblem p = sp.problem();
  Rng rng = make_rng(6, Stream::test);
  for (int i = 0; i < 50; ++i) {
    const auto [state, channel] = random_state(sp, rng);
    const std::vector<Choice> start(3, Choice{1, 1});
    const double start_cost = evaluate_assignment(p, state, channel, start).cost;
    const Selection g = greedy_select(p, state, channel, start);
    const Selection e = exhaustive_select(p, state, channel);
    EXPECT_GE(g.best.cost, e.best.cost - 1e-12 * std::abs(e.best.cost));
    double prev = start_cost;
    for (double c : g.cost_after_user) {
      EXPECT_LE(c, prev + 1e-12 * std::abs(prev));
      prev = c;
    }
    EXPECT_EQ(g.best.cost, g.cost_after_user.back());
  }
}

TEST(Greedy, DecisionInvariants) {
  const SmallProblem sp = make_small_problem(3, {32, 96, 256}, {2, 8, 32}, 7);
  const SlotProblem p = sp.problem();
  Rng rng = make_rng(7, Stream::test);
  for (int i = 0; i < 50; ++i) {
    const auto [state, channel] = random_state(sp, rng);
    const Selection g = greedy_select(p, state, channel, std::vector<Choice>(3));
    const SlotDecision& d = g.best.decision;
    double band = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const UserDecision& u = d.users[k];
      band += u.bandwidth;
      EXPECT_GE(u.bandwidth, p.effective_min_bandwidth() * (1 - 1e-12));
      EXPECT_GE(u.cpu_freq, sp.compute.users[k].f_min);
      EXPECT_LE(u.cpu_freq, sp.compute.users[k].f_max);
      const double r_max = max_rate(u.bandwidth, sp.radio.users[k].max_power, channel.gain[k], sp.radio.n0());
      if (g.best.feasible) {
        EXPECT_GE(u.rate, sp.radio.users[k].min_rate * (1 - 1e-12));
        EXPECT_LE(u.rate, r_max * (1 + 1e-12));
      }
      EXPECT_TRUE(std::find(sp.table.coeffs().begin(), sp.table.coeffs().end(), u.coeffs) != sp.table.coeffs().end());
      EXPECT_TRUE(std::find(sp.table.bits().begin(), sp.table.bits().end(), u.bits) != sp.table.bits().end());
    }
    EXPECT_NEAR(band, sp.radio.bandwidth, 1e-6 * sp.radio.bandwidth);
    // Realized metrics recompute from decision and channel.
    const SlotMetrics m = realize(d, channel, sp.radio, sp.compute);
    EXPECT_NEAR(m.latency, g.best.metrics.latency, 1e-9 * m.latency);
    EXPECT_NEAR(m.power, g.best.metrics.power, 1e-9 * m.power);
  }
}

TEST(Exhaustive, SymmetricUsersSwap) {
  SmallProblem sp = make_small_problem(2, {32, 128}, {4, 16}, 8);
  sp.radio.users[1] = sp.radio.users[0];
  sp.compute.users[1] = sp.compute.users[0];
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) sp.table.at_index(1, i, j) = sp.table.at_index(0, i, j);
  const SlotProblem p = sp.problem();
  QueueState s = initial_queues(0.04, {0.7, 0.7});
  s.Z = 0.5;
  s.Q = {1.0, 1.0};
  const ChannelState a{{1e-9, 3e-9}};
  const ChannelState b{{3e-9, 1e-9}};
  EXPECT_NEAR(exhaustive_select(p, s, a).best.cost, exhaustive_select(p, s, b).best.cost, 1e-12);
}

TEST(Exhaustive, SearchSpaceGuard) {
  std::vector<Index> n(10);
  std::iota(n.begin(), n.end(), 1);
  const std::vector<int> q{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const SmallProblem sp = make_small_problem(4, n, q, 9);  // 100^4 = 1e8
  const SlotProblem p = sp.problem();
  const QueueState s = initial_queues(0.04, std::vector<double>(4, 0.7));
  Rng rng = make_rng(9, Stream::test);
  EXPECT_THROW(exhaustive_select(p, s, sample_channel(sp.radio, rng)), InvalidInput);
}

TEST(Greedy, InfeasibleUserKeepsIncumbent) {
  SmallProblem sp = make_small_problem(2, {32, 64}, {2, 4}, 10);
  sp.radio.users[1].min_rate = 1e12;  // unreachable on any band
  const SlotProblem p = sp.problem();
  QueueState s = initial_queues(0.04, {0.7, 0.7});
  s.Z = 0.1;
  const std::vector<Choice> start{{0, 0}, {1, 1}};
  const Selection g = greedy_select(p, s, ChannelState{{1e-9, 1e-9}}, start);
  ASSERT_EQ(g.fallback_users.size(), 2u);  // user 0 is infeasible too while user 1 is
  EXPECT_EQ(g.best.choice[1], (Choice{1, 1}));
  EXPECT_FALSE(g.best.feasible);
  EXPECT_THROW(exhaustive_select(p, s, ChannelState{{1e-9, 1e-9}}), Infeasible);
}
