#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "stot/ot_entropic.hpp"
#include "stot/transport_plan.hpp"

namespace stot {

/// Fixed (x, y) gap block appended after each k-block; a point mass, so it
/// contributes no entropy.
struct GapSpec {
  Block x_block;  // encoded over the X alphabet
  Block y_block;  // encoded over the Y alphabet
};

/// Stationary pair process induced by a k-block coupling: iid concatenation
/// of blocks from the coupling (followed by the optional gap block), with
/// the start randomized uniformly over the period. Stored lazily as the
/// block law over the product alphabet; marginals, costs, entropies and
/// samples are derived views.
class BlockJoining {
 public:
  static BlockJoining from_plan(const TransportPlan& plan, std::optional<GapSpec> gap = {},
                                double eta = 0.0);
  static BlockJoining from_plan(const EntropicPlan& plan, std::optional<GapSpec> gap = {});
  /// Diagonal self-coupling of a single block measure; the X (or Y) view of
  /// the result is the stationary block process of that measure.
  static BlockJoining diagonal(const BlockMeasure& gamma, std::optional<Block> gap = {});

  int k() const noexcept { return k_; }
  int gap() const noexcept { return gap_; }
  int period() const noexcept { return k_ + gap_; }
  double eta() const noexcept { return eta_; }
  const Alphabet& x_alphabet() const noexcept { return x_; }
  const Alphabet& y_alphabet() const noexcept { return y_; }
  /// Block law over the product alphabet, length = period().
  const BlockMeasure& block_law() const noexcept { return law_; }
  const std::optional<GapSpec>& gap_spec() const noexcept { return gap_spec_; }

  /// Coupling over the k-block coordinates (the gap coordinates dropped).
  BlockMeasure plan_marginal() const;

  bool operator==(const BlockJoining& other) const;

 private:
  BlockJoining(Alphabet x, Alphabet y, int k, int gap, double eta, BlockMeasure law,
               std::optional<GapSpec> gap_spec)
      : x_(std::move(x)), y_(std::move(y)), k_(k), gap_(gap), eta_(eta),
        law_(std::move(law)), gap_spec_(std::move(gap_spec)) {}

  Alphabet x_, y_;
  int k_, gap_;
  double eta_;
  BlockMeasure law_;
  std::optional<GapSpec> gap_spec_;
};

/// Exact m-dimensional marginal of the stationary block process of `law`
/// (period = law.k()): the phase average of products of range marginals cut
/// at block boundaries.
BlockMeasure stationary_block_marginal(const BlockMeasure& law, int m,
                                       std::int64_t atom_budget = std::int64_t(1) << 22);

/// Exact m-dimensional distribution of the joining over (X x Y)^m.
BlockMeasure finite_marginal(const BlockJoining& joining, int m,
                             std::int64_t atom_budget = std::int64_t(1) << 22);

/// Projects a product-alphabet measure to its X or Y side.
BlockMeasure project_pair_measure(const BlockMeasure& pair_measure, const Alphabet& x,
                                  const Alphabet& y, Side side);

/// Expected single-letter cost under the one-dimensional marginal. For
/// gap-free joinings this equals (1/k) * the block law's expected c_k cost.
double expected_cost(const BlockJoining& joining, const CostSpec& cost);

/// Entropy rate of the joining in nats per symbol: H(block law) / period.
double block_entropy_rate(const BlockJoining& joining);

/// Draws a uniform phase and then iid blocks, emitting `length` paired
/// symbols. Deterministic for a fixed seed.
std::pair<SymbolSequence, SymbolSequence> sample_trajectory(const BlockJoining& joining,
                                                            std::int64_t length,
                                                            std::uint64_t rng_seed);

}  // namespace stot
