#include <doctest.h>

#include <cmath>

#include "stot/io.hpp"
#include "stot/joining.hpp"
#include "stot/ot_exact.hpp"
#include "test_support.hpp"

using namespace stot;
using test_support::binary;
using test_support::block_of;

namespace {

// A coupling with sparse support built from two random marginals.
TransportPlan random_plan(Rng& rng, int k, std::size_t sa, std::size_t sb) {
  const auto a = test_support::random_measure(rng, binary(), k, sa);
  const auto b = test_support::random_measure(rng, binary(), k, sb);
  return solve_ot(a, b, k_step_oracle(hamming_cost(binary())));
}

}  // namespace

TEST_CASE("block joining construction basics") {
  Rng rng(51);
  const TransportPlan plan = random_plan(rng, 3, 5, 4);
  const BlockJoining plain = BlockJoining::from_plan(plan);
  CHECK(plain.k() == 3);
  CHECK(plain.gap() == 0);
  CHECK(plain.period() == 3);

  const GapSpec gap{block_of({0}), block_of({0})};
  const BlockJoining gapped = BlockJoining::from_plan(plan, gap);
  CHECK(gapped.period() == 4);
  CHECK(gapped.gap() == 1);

  // Point-mass plan: a deterministic periodic process.
  const auto pm = point_mass(binary(), block_of({0, 1}));
  const TransportPlan unit = solve_ot(pm, pm, k_step_oracle(hamming_cost(binary())));
  const BlockJoining deterministic = BlockJoining::from_plan(unit);
  CHECK(deterministic.block_law().support_size() == 1);
  CHECK(block_entropy_rate(deterministic) == 0.0);
}

TEST_CASE("stationary block marginal of the two-block diagonal law") {
  // gamma = {(0,0): 1/2, (1,1): 1/2} on X^2.
  const BlockMeasure gamma(binary(), 2,
                           {{block_of({0, 0}), 0.5}, {block_of({1, 1}), 0.5}});

  const BlockMeasure one = stationary_block_marginal(gamma, 1);
  CHECK(one.mass(block_of({0})) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(one.mass(block_of({1})) == doctest::Approx(0.5).epsilon(1e-15));

  // Phase average: 1/2 gamma + 1/2 (boundary product).
  const BlockMeasure two = stationary_block_marginal(gamma, 2);
  CHECK(two.mass(block_of({0, 0})) == doctest::Approx(3.0 / 8).epsilon(1e-15));
  CHECK(two.mass(block_of({1, 1})) == doctest::Approx(3.0 / 8).epsilon(1e-15));
  CHECK(two.mass(block_of({0, 1})) == doctest::Approx(1.0 / 8).epsilon(1e-15));
  CHECK(two.mass(block_of({1, 0})) == doctest::Approx(1.0 / 8).epsilon(1e-15));

  // The same numbers through the diagonal joining and an X projection.
  const BlockJoining diag = BlockJoining::diagonal(gamma);
  const BlockMeasure pair2 = finite_marginal(diag, 2);
  const BlockMeasure side = project_pair_measure(pair2, binary(), binary(), Side::x);
  CHECK(l1_distance(side, two) <= 1e-14);
}

TEST_CASE("m = k marginal contains the block law with weight 1/k") {
  Rng rng(52);
  const TransportPlan plan = random_plan(rng, 2, 4, 4);
  const BlockJoining joining = BlockJoining::from_plan(plan);
  const BlockMeasure marginal = finite_marginal(joining, 2);
  for (const auto& atom : joining.block_law().atoms()) {
    CHECK(marginal.mass(atom.block) >= atom.mass / 2 - 1e-12);
  }
}

TEST_CASE("expected cost identities") {
  const CostSpec hamming = hamming_cost(binary());

  // Diagonal block law under Hamming cost: zero.
  Rng rng(53);
  const auto gamma = test_support::random_measure(rng, binary(), 3, 6);
  CHECK(expected_cost(BlockJoining::diagonal(gamma), hamming) == 0.0);

  // Gap-free: equals (1/k) * expected c_k cost of the block law.
  const TransportPlan plan = random_plan(rng, 3, 5, 6);
  const BlockJoining joining = BlockJoining::from_plan(plan);
  CHECK(expected_cost(joining, hamming) ==
        doctest::Approx(plan.cost_value / 3).epsilon(1e-12));

  // With a gap block: (sum c_k dpi + c_g(gap)) / (k + g).
  const GapSpec gap{block_of({0, 1}), block_of({1, 1})};  // gap cost 1 + 0
  const BlockJoining gapped = BlockJoining::from_plan(plan, gap);
  CHECK(expected_cost(gapped, hamming) ==
        doctest::Approx((plan.cost_value + 1.0) / 5).epsilon(1e-12));
}

TEST_CASE("block entropy rate on the named cases") {
  // Point-mass law.
  const BlockMeasure pm(binary(), 2, {{block_of({0, 1}), 1.0}});
  CHECK(block_entropy_rate(BlockJoining::diagonal(pm)) == 0.0);

  // k = 2 law uniform over 4 pairs of (X^2, Y^2) diagonal blocks.
  std::vector<BlockMeasure::Atom> atoms;
  for (SymbolId i = 0; i < 2; ++i) {
    for (SymbolId j = 0; j < 2; ++j) atoms.push_back({block_of({i, j}), 0.25});
  }
  const BlockMeasure uniform4(binary(), 2, atoms);
  CHECK(block_entropy_rate(BlockJoining::diagonal(uniform4)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // Product of uniform k-marginals on both sides: log|X| + log|Y|.
  std::vector<BlockMeasure::Atom> u1{{block_of({0}), 0.5}, {block_of({1}), 0.5}};
  const BlockMeasure u(binary(), 1, u1);
  const TransportPlan product{
      u, u, {{0, 0, 0.25}, {0, 1, 0.25}, {1, 0, 0.25}, {1, 1, 0.25}}, 0.5,
      std::nullopt, std::nullopt};
  CHECK(block_entropy_rate(BlockJoining::from_plan(product)) ==
        doctest::Approx(std::log(2.0) + std::log(2.0)).epsilon(1e-12));

  // A point-mass gap adds period but no entropy.
  const GapSpec gap{block_of({0}), block_of({0})};
  CHECK(block_entropy_rate(BlockJoining::from_plan(product, gap)) ==
        doctest::Approx(2.0 * std::log(2.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("stationarity witness: marginals are shift-consistent") {
  Rng rng(55);
  for (int trial = 0; trial < 12; ++trial) {
    const int k = 1 + static_cast<int>(rng.next_index(3));
    const TransportPlan plan = random_plan(rng, k, 1 + rng.next_index(4), 1 + rng.next_index(4));
    const BlockJoining joining = BlockJoining::from_plan(plan);
    for (int m = 1; m <= 4; ++m) {
      const BlockMeasure shorter = finite_marginal(joining, m);
      const BlockMeasure longer = finite_marginal(joining, m + 1);
      CHECK(l1_distance(shorter, range_marginal(longer, 0, m)) <= 1e-12);
      CHECK(l1_distance(shorter, range_marginal(longer, 1, m)) <= 1e-12);
    }
  }
}

TEST_CASE("marginal projection matches the single-sided block process") {
  Rng rng(56);
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 1 + static_cast<int>(rng.next_index(3));
    const auto a = test_support::random_measure(rng, binary(), k, 1 + rng.next_index(5));
    const auto b = test_support::random_measure(rng, binary(), k, 1 + rng.next_index(5));
    const TransportPlan plan = solve_ot(a, b, k_step_oracle(hamming_cost(binary())));
    const BlockJoining joining = BlockJoining::from_plan(plan);
    for (int m = 1; m <= 3; ++m) {
      const BlockMeasure pair_marginal = finite_marginal(joining, m);
      const BlockMeasure x_view =
          project_pair_measure(pair_marginal, binary(), binary(), Side::x);
      const BlockMeasure y_view =
          project_pair_measure(pair_marginal, binary(), binary(), Side::y);
      CHECK(l1_distance(x_view, stationary_block_marginal(a, m)) <= 1e-12);
      CHECK(l1_distance(y_view, stationary_block_marginal(b, m)) <= 1e-12);
    }
  }
}

TEST_CASE("per-symbol block entropies decrease toward the entropy rate") {
  // Product block law: the block process is iid, so the per-symbol block
  // entropies hit the rate exactly at every multiple of k.
  const BlockMeasure u1(binary(), 1, {{block_of({0}), 0.5}, {block_of({1}), 0.5}});
  const BlockMeasure product = concat_product(u1, u1, 16);
  const BlockJoining iid_like = BlockJoining::diagonal(product);
  const double iid_rate = block_entropy_rate(iid_like);
  for (int m = 2; m <= 8; m += 2) {
    CHECK(entropy(finite_marginal(iid_like, m)) / m ==
          doctest::Approx(iid_rate).epsilon(1e-10));
  }

  // Coupled law: the per-symbol entropies decrease monotonically toward the
  // rate inside the (H(law) + log k)/m envelope of the phase argument.
  Rng rng(57);
  const int k = 2;
  const TransportPlan plan = random_plan(rng, k, 3, 3);
  const BlockJoining joining = BlockJoining::from_plan(plan);
  const double rate = block_entropy_rate(joining);
  const double law_entropy = entropy(joining.block_law());
  double previous = std::numeric_limits<double>::infinity();
  for (int m = k; m <= 4 * k; m += k) {
    const double per_symbol = entropy(finite_marginal(joining, m)) / m;
    CHECK(per_symbol <= previous + 1e-12);
    CHECK(per_symbol >= rate - 1e-9);
    CHECK(per_symbol - rate <= (law_entropy + std::log(k)) / m + 1e-9);
    previous = per_symbol;
  }
}

TEST_CASE("sample trajectories are deterministic and respect the block law") {
  // Point-mass law k=1: constant paired sequence.
  const BlockMeasure px = point_mass(binary(), block_of({0}));
  const BlockMeasure py = point_mass(binary(), block_of({1}));
  const TransportPlan unit = solve_ot(px, py, k_step_oracle(hamming_cost(binary())));
  const BlockJoining deterministic = BlockJoining::from_plan(unit);
  const auto [xs, ys] = sample_trajectory(deterministic, 32, 5);
  for (SymbolId v : xs.data) CHECK(v == 0);
  for (SymbolId v : ys.data) CHECK(v == 1);

  Rng rng(58);
  const TransportPlan plan = random_plan(rng, 2, 4, 4);
  const BlockJoining joining = BlockJoining::from_plan(plan);
  const auto [x1, y1] = sample_trajectory(joining, 1000, 99);
  const auto [x2, y2] = sample_trajectory(joining, 1000, 99);
  CHECK(x1.data == x2.data);
  CHECK(y1.data == y2.data);
}

TEST_CASE("monte carlo marginals match the exact one-dimensional law") {
  Rng rng(59);
  const TransportPlan plan = random_plan(rng, 2, 4, 3);
  const BlockJoining joining = BlockJoining::from_plan(plan);
  const BlockMeasure exact = finite_marginal(joining, 1);

  const std::int64_t n = 1000000;
  const auto [xs, ys] = sample_trajectory(joining, n, 1234);
  const SymbolId y_size = 2;
  std::vector<double> counts(4, 0.0);
  for (std::int64_t t = 0; t < n; ++t) {
    counts[static_cast<std::size_t>(xs.data[static_cast<std::size_t>(t)] * y_size +
                                    ys.data[static_cast<std::size_t>(t)])] += 1.0;
  }
  for (const auto& atom : exact.atoms()) {
    const auto ids = decode_block(atom.block, exact.width());
    const double freq = counts[static_cast<std::size_t>(ids[0])] / static_cast<double>(n);
    const double se = std::sqrt(atom.mass * (1 - atom.mass) / static_cast<double>(n));
    CHECK(std::abs(freq - atom.mass) <= 3.0 * se + 1e-4);
  }
}

TEST_CASE("joining JSON round trip reconstructs identical behavior") {
  Rng rng(60);
  const TransportPlan plan = random_plan(rng, 2, 4, 4);
  const GapSpec gap{block_of({1}), block_of({0})};
  const BlockJoining joining = BlockJoining::from_plan(plan, gap, 0.25);
  const nlohmann::json j = joining_to_json(joining);
  const BlockJoining restored = joining_from_json(j);
  CHECK(joining == restored);
  const auto [xs, ys] = sample_trajectory(joining, 64, 3);
  const auto [rx, ry] = sample_trajectory(restored, 64, 3);
  CHECK(xs.data == rx.data);
  CHECK(ys.data == ry.data);
}

TEST_CASE("joinings over wide product alphabets use two-byte pair encoding") {
  // 17 x 16 = 272 pair symbols pushes the product alphabet past one byte.
  Rng rng(62);
  const Alphabet x17 = test_support::letters(17);
  std::vector<std::string> y_tokens;
  for (int i = 0; i < 16; ++i) y_tokens.push_back("y" + std::to_string(i));
  const Alphabet y16(y_tokens);
  CHECK(pair_alphabet(x17, y16).encoded_width() == 2);

  const auto a = test_support::random_measure(rng, x17, 2, 6);
  const auto b = test_support::random_measure(rng, y16, 2, 5);
  Eigen::MatrixXd letter_costs = test_support::random_cost_matrix(rng, 17, 16, 1.0);
  const CostSpec cost(x17, y16, letter_costs);
  const TransportPlan plan = solve_ot(a, b, k_step_oracle(cost));
  const BlockJoining joining = BlockJoining::from_plan(plan);

  CHECK(expected_cost(joining, cost) == doctest::Approx(plan.cost_value / 2).epsilon(1e-12));
  const BlockMeasure one = finite_marginal(joining, 1);
  const BlockMeasure x_view = project_pair_measure(one, x17, y16, Side::x);
  CHECK(l1_distance(x_view, stationary_block_marginal(a, 1)) <= 1e-12);
  const auto [xs, ys] = sample_trajectory(joining, 64, 7);
  CHECK(xs.alphabet == x17);
  CHECK(ys.alphabet == y16);
}

TEST_CASE("finite marginal respects the atom budget") {
  Rng rng(61);
  const TransportPlan plan = random_plan(rng, 4, 12, 12);
  const BlockJoining joining = BlockJoining::from_plan(plan);
  CHECK_THROWS_AS(finite_marginal(joining, 12, 64), std::runtime_error);
}
