#include <benchmark/benchmark.h>

#include "stot/curves.hpp"
#include "stot/markov.hpp"
#include "stot/ot_entropic.hpp"
#include "stot/ot_exact.hpp"

namespace {

using namespace stot;

MarkovModel symmetric_chain(double q) {
  Alphabet binary({"0", "1"});
  Eigen::MatrixXd p(2, 2);
  p << 1 - q, q, q, 1 - q;
  return MarkovModel(std::move(binary), std::move(p));
}

void BM_SolveOtExact(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const MarkovModel mx = symmetric_chain(0.3);
  const MarkovModel my = symmetric_chain(0.45);
  const BlockMeasure mu = exact_block_law(mx, k);
  const BlockMeasure nu = exact_block_law(my, k);
  const BlockCost oracle = k_step_oracle(hamming_cost(mx.alphabet()));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_ot(mu, nu, oracle).cost_value);
  }
  state.SetLabel(std::to_string(mu.support_size()) + "x" + std::to_string(nu.support_size()));
}
BENCHMARK(BM_SolveOtExact)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Sinkhorn(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const double eta = state.range(1) / 100.0;
  const MarkovModel mx = symmetric_chain(0.3);
  const MarkovModel my = symmetric_chain(0.45);
  const BlockMeasure mu = exact_block_law(mx, k);
  const BlockMeasure nu = exact_block_law(my, k);
  const BlockCost oracle = k_step_oracle(hamming_cost(mx.alphabet()));
  SinkhornOptions options;
  options.tol = 1e-9;
  options.want_plan = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_entropic_ot(mu, nu, oracle, eta, options).regularized_value);
  }
}
BENCHMARK(BM_Sinkhorn)->Args({6, 100})->Args({6, 10})->Args({8, 100})->Args({8, 10})
    ->Unit(benchmark::kMillisecond);

void BM_CurvePoint(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const MarkovModel mx = symmetric_chain(0.3);
  const MarkovModel my = symmetric_chain(0.45);
  const CostSpec cost = hamming_cost(mx.alphabet());
  for (auto _ : state) {
    benchmark::DoNotOptimize(k_step_cost_curve(mx, my, cost, k, 0.0).back().value);
  }
}
BENCHMARK(BM_CurvePoint)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
