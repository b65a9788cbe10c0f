#include "semeq/allocator.hpp"
#include "semeq/equalize.hpp"
#include "semeq/frame.hpp"
#include "semeq/rng.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

namespace {

semeq::Matrix random_matrix(semeq::Index rows, semeq::Index cols, std::uint64_t seed) {
  semeq::Rng rng = semeq::make_rng(seed, semeq::Stream::world);
  std::normal_distribution<double> g(0.0, 1.0);
  semeq::Matrix m(rows, cols);
  for (semeq::Index j = 0; j < cols; ++j)
    for (semeq::Index i = 0; i < rows; ++i) m(i, j) = g(rng);
  return m;
}

void BM_WhitenToParseval(benchmark::State& state) {
  const auto n = static_cast<semeq::Index>(state.range(0));
  const semeq::AnalysisOperator frame(random_matrix(n, 256, 1));
  for (auto _ : state) benchmark::DoNotOptimize(semeq::whiten_to_parseval(frame));
}
BENCHMARK(BM_WhitenToParseval)->Arg(32)->Arg(128)->Arg(512);

void BM_Quantize(benchmark::State& state) {
  const semeq::Matrix src = random_matrix(1000, 128, 2).cwiseMax(-1.0).cwiseMin(1.0);
  const int bits = static_cast<int>(state.range(0));
  semeq::Matrix work;
  for (auto _ : state) {
    work = src;
    benchmark::DoNotOptimize(semeq::quantize_in_place(work, bits));
  }
  state.SetItemsProcessed(state.iterations() * src.size());
}
BENCHMARK(BM_Quantize)->Arg(2)->Arg(8)->Arg(32);

void BM_BuildPfe(benchmark::State& state) {
  const auto n = static_cast<semeq::Index>(state.range(0));
  const semeq::Matrix tx = random_matrix(n, 192, 3);
  const semeq::Matrix rx = random_matrix(n, 256, 4);
  for (auto _ : state) benchmark::DoNotOptimize(semeq::build_pfe(tx, rx));
}
BENCHMARK(BM_BuildPfe)->Arg(64)->Arg(512);

void BM_LambertW0(benchmark::State& state) {
  std::vector<double> xs;
  for (int i = 0; i < 1024; ++i) xs.push_back(std::exp(-10.0 + 20.0 * i / 1023.0));
  for (auto _ : state)
    for (double x : xs) benchmark::DoNotOptimize(semeq::lambert_w0(x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}
BENCHMARK(BM_LambertW0);

void BM_OptimalRate(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(semeq::optimal_rate(0.5, 128, 8, 1e-9, 1e5, 4e-3, 4e-21, 1e3, 1e7));
}
BENCHMARK(BM_OptimalRate);

semeq::SlotProblem make_problem(std::size_t users, semeq::RadioConfig& radio, semeq::ComputeConfig& compute,
                                semeq::AccuracyTable& table) {
  const std::vector<semeq::Index> coeffs{32, 64, 96, 128, 192, 384, 512};
  const std::vector<int> bits{2, 4, 6, 8, 12, 16, 32};
  for (std::size_t k = 0; k < users; ++k) {
    radio.users.push_back(semeq::UserRadio{0.1, 0.15, 1e4});
    compute.users.push_back(semeq::UserCompute{1e-28, 1e8, 3.5e9, 2e7, 2e4});
  }
  table = semeq::AccuracyTable(users, coeffs, bits);
  for (std::size_t k = 0; k < users; ++k)
    for (std::size_t i = 0; i < coeffs.size(); ++i)
      for (std::size_t j = 0; j < bits.size(); ++j)
        table.at_index(k, i, j) = 0.3 + 0.6 * (i + 1.0) * (j + 1.0) / (coeffs.size() * bits.size());
  return semeq::SlotProblem{radio, compute, table, 4e-3, 1.0, 1.0, 0.0};
}

void BM_GreedySelect(benchmark::State& state) {
  const auto users = static_cast<std::size_t>(state.range(0));
  semeq::RadioConfig radio;
  semeq::ComputeConfig compute;
  semeq::AccuracyTable table;
  const semeq::SlotProblem problem = make_problem(users, radio, compute, table);
  semeq::QueueState queues = semeq::initial_queues(0.04, std::vector<double>(users, 0.7));
  queues.Z = 0.5;
  for (double& q : queues.Q) q = 0.3;
  semeq::Rng rng = semeq::make_rng(9, semeq::Stream::channel);
  const semeq::ChannelState channel = semeq::sample_channel(radio, rng);
  const std::vector<semeq::Choice> start(users);
  for (auto _ : state) benchmark::DoNotOptimize(semeq::greedy_select(problem, queues, channel, start));
}
BENCHMARK(BM_GreedySelect)->Arg(3)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
