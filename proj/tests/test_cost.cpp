#include <doctest.h>

#include <cmath>

#include "stot/cost.hpp"
#include "test_support.hpp"

using namespace stot;
using test_support::binary;
using test_support::block_of;

TEST_CASE("k-step cost sums single-letter costs coordinatewise") {
  const CostSpec hamming = hamming_cost(binary());
  CHECK(k_step_cost(hamming, block_of({0, 1}), block_of({0, 1})) == 0.0);
  CHECK(k_step_cost(hamming, block_of({0, 1}), block_of({1, 0})) == 2.0);

  Eigen::MatrixXd m(2, 2);
  m << 0, 1, 2, 0;
  const CostSpec c(binary(), binary(), m);
  CHECK(k_step_cost(c, block_of({0, 1, 1}), block_of({1, 0, 1})) == 3.0);
  CHECK_THROWS_AS(k_step_cost(c, block_of({0, 1}), block_of({1})), std::invalid_argument);
}

TEST_CASE("adapted cost on the named examples") {
  const CostSpec hamming = hamming_cost(binary());
  const CostSpec hx = adapted_cost(hamming, Side::x);
  CHECK(hx(0, 1) == 1.0);
  CHECK(hx(0, 0) == 0.0);

  Eigen::MatrixXd m(2, 2);
  m << 0, 1, 2, 0;
  const CostSpec cx = adapted_cost(CostSpec(binary(), binary(), m), Side::x);
  CHECK(cx(0, 1) == 2.0);
}

TEST_CASE("adapted cost is a pseudometric, exhaustively on small alphabets") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int nx = 2 + static_cast<int>(rng.next_index(5));
    const int ny = 2 + static_cast<int>(rng.next_index(5));
    const CostSpec c(test_support::letters(nx), test_support::letters(ny),
                     test_support::random_cost_matrix(rng, nx, ny, 3.0));
    for (Side side : {Side::x, Side::y}) {
      const CostSpec adapted = adapted_cost(c, side);
      const auto& a = adapted.matrix();
      const Eigen::Index n = a.rows();
      for (Eigen::Index i = 0; i < n; ++i) {
        CHECK(a(i, i) == 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
          CHECK(a(i, j) == a(j, i));
          CHECK(a(i, j) <= c.sup_norm() + 1e-12);
          for (Eigen::Index l = 0; l < n; ++l) {
            CHECK(a(i, j) <= a(i, l) + a(l, j) + 1e-12);
          }
        }
      }
    }
  }
}

// |c(u,v) - c(u',v')| <= c_X(u,u') + c_Y(v,v'), the inequality feeding the
// transform Lipschitz property.
TEST_CASE("adapted costs dominate cost increments") {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int nx = 2 + static_cast<int>(rng.next_index(4));
    const int ny = 2 + static_cast<int>(rng.next_index(4));
    const CostSpec c(test_support::letters(nx), test_support::letters(ny),
                     test_support::random_cost_matrix(rng, nx, ny, 2.0));
    const CostSpec cx = adapted_cost(c, Side::x);
    const CostSpec cy = adapted_cost(c, Side::y);
    for (SymbolId u = 0; u < static_cast<SymbolId>(nx); ++u) {
      for (SymbolId u2 = 0; u2 < static_cast<SymbolId>(nx); ++u2) {
        for (SymbolId v = 0; v < static_cast<SymbolId>(ny); ++v) {
          for (SymbolId v2 = 0; v2 < static_cast<SymbolId>(ny); ++v2) {
            CHECK(std::abs(c(u, v) - c(u2, v2)) <= cx(u, u2) + cy(v, v2) + 1e-12);
          }
        }
      }
    }
  }
}

// c_X <= ||c||_inf * delta pointwise, the comparison used to move from
// adapted-cost transport to the Hamming one.
TEST_CASE("adapted cost is dominated by the scaled Hamming cost") {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const int nx = 2 + static_cast<int>(rng.next_index(5));
    const CostSpec c(test_support::letters(nx), test_support::letters(3),
                     test_support::random_cost_matrix(rng, nx, 3, 4.0));
    const CostSpec cx = adapted_cost(c, Side::x);
    for (SymbolId u = 0; u < static_cast<SymbolId>(nx); ++u) {
      for (SymbolId u2 = 0; u2 < static_cast<SymbolId>(nx); ++u2) {
        const double delta = u == u2 ? 0.0 : 1.0;
        CHECK(cx(u, u2) <= c.sup_norm() * delta + 1e-12);
      }
    }
  }
}

TEST_CASE("hamming cost matrix") {
  const CostSpec h2 = hamming_cost(binary());
  CHECK(h2.matrix()(0, 0) == 0.0);
  CHECK(h2.matrix()(0, 1) == 1.0);
  CHECK(h2.matrix()(1, 0) == 1.0);
  CHECK(h2.sup_norm() == 1.0);

  const CostSpec h3 = hamming_cost(test_support::letters(3));
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      CHECK(h3.matrix()(i, j) == (i == j ? 0.0 : 1.0));
    }
  }
  // k-step Hamming counts mismatches.
  CHECK(k_step_cost(h2, block_of({0, 1}), block_of({0, 0})) == 1.0);
}

TEST_CASE("cost spec rejects negative entries") {
  Eigen::MatrixXd m(1, 2);
  m << 0.5, -0.1;
  CHECK_THROWS_AS(CostSpec(test_support::letters(1), binary(), m), std::invalid_argument);
}
