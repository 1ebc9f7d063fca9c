#include <benchmark/benchmark.h>

#include "stot/block_measure.hpp"
#include "stot/joining.hpp"
#include "stot/markov.hpp"

namespace {

using namespace stot;

void BM_EmpiricalBlockMeasure(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const int k = static_cast<int>(state.range(1));
  Alphabet binary({"0", "1"});
  Eigen::VectorXd p(2);
  p << 0.5, 0.5;
  const SymbolSequence seq = sample(MarkovModel::iid(binary, p), n, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(empirical_block_measure(seq, k).support_size());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EmpiricalBlockMeasure)->Args({100000, 8})->Args({1000000, 10})
    ->Unit(benchmark::kMillisecond);

void BM_FiniteMarginal(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  Alphabet binary({"0", "1"});
  Eigen::MatrixXd t(2, 2);
  t << 0.7, 0.3, 0.3, 0.7;
  const MarkovModel chain(binary, t);
  const BlockJoining joining = BlockJoining::diagonal(exact_block_law(chain, 4));
  for (auto _ : state) {
    benchmark::DoNotOptimize(finite_marginal(joining, m).support_size());
  }
}
BENCHMARK(BM_FiniteMarginal)->Arg(2)->Arg(4)->Arg(6);

}  // namespace
