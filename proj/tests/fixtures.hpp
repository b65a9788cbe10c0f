#pragma once

#include "semeq/allocator.hpp"
#include "semeq/rng.hpp"

#include <algorithm>
#include <random>
#include <vector>

// A small self-contained slot problem with a random (monotone) accuracy table.
struct SmallProblem {
  semeq::RadioConfig radio;
  semeq::ComputeConfig compute;
  semeq::AccuracyTable table;
  double V = 4e-3;

  semeq::SlotProblem problem() const { return semeq::SlotProblem{radio, compute, table, V, 1.0, 1.0, 0.0}; }
};

inline SmallProblem make_small_problem(std::size_t users, std::vector<semeq::Index> coeffs,
                                       std::vector<int> bits, std::uint64_t seed) {
  using namespace semeq;
  Rng rng = make_rng(seed, Stream::test, 1000 + users);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SmallProblem p;
  for (std::size_t k = 0; k < users; ++k) {
    p.radio.users.push_back(UserRadio{0.05 + 0.1 * u(rng), 0.15, 1e4});
    p.compute.users.push_back(UserCompute{1e-28, 1e8, 3.5e9, 1e7 + 2e7 * u(rng), 2e4});
  }
  p.table = AccuracyTable(users, coeffs, bits);
  for (std::size_t k = 0; k < users; ++k) {
    // Accuracy rises with both N and q.
    const double base = 0.2 + 0.2 * u(rng);
    for (std::size_t i = 0; i < coeffs.size(); ++i)
      for (std::size_t j = 0; j < bits.size(); ++j) {
        const double x = (static_cast<double>(i) + 1) / coeffs.size() * (static_cast<double>(j) + 1) / bits.size();
        p.table.at_index(k, i, j) = std::min(1.0, base + (0.95 - base) * x + 0.02 * u(rng));
      }
  }
  return p;
}

// Random queue state and channel for stress trials.
inline std::pair<semeq::QueueState, semeq::ChannelState> random_state(const SmallProblem& p, semeq::Rng& rng) {
  using namespace semeq;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  QueueState s = initial_queues(0.04, std::vector<double>(p.radio.users.size(), 0.7));
  s.Z = std::exp(std::log(1e-4) + u(rng) * (std::log(10.0) - std::log(1e-4)));
  for (double& q : s.Q) q = u(rng) < 0.2 ? 0.0 : 2.0 * u(rng);
  return {s, sample_channel(p.radio, rng)};
}
