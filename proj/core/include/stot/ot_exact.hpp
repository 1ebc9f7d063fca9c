#pragma once

#include <cstdint>

#include "stot/transport_plan.hpp"

namespace stot {

struct ExactOtOptions {
  /// Hard cap on support(a) x support(b) cells.
  std::int64_t max_cells = static_cast<std::int64_t>(20000) * 20000;
  /// Cost matrices up to this many cells are materialized for pricing;
  /// larger instances fall back to oracle evaluation per candidate arc.
  std::int64_t dense_cells = std::int64_t(1) << 25;
};

/// Exact optimal transport between two sparse block measures under a
/// block-level cost oracle.
///
/// Transportation simplex on the bipartite support graph. Masses are scaled
/// to integers (exactly, when both measures carry rational weights) and the
/// classic (K, +1) supply perturbation rules out degenerate pivots, so the
/// run is deterministic and terminates without anti-cycling bookkeeping.
/// Includes optimal dual potentials.
TransportPlan solve_ot(const BlockMeasure& a, const BlockMeasure& b,
                       const BlockCost& cost, const ExactOtOptions& options = {});

struct CycleViolation {
  std::vector<std::int32_t> entries;  // indices into plan.entries
  double closed_cost;                 // sum c(u_l, v_l)
  double rotated_cost;                // sum c(u_l, v_{l+1})
};

struct MonotonicityReport {
  std::int64_t cycles_checked = 0;
  bool exhaustive = false;
  std::vector<CycleViolation> violations;
};

/// Checks c-cyclical monotonicity of the plan support: for every sampled
/// cycle, sum c(u_l, v_l) <= sum c(u_l, v_{l+1}) + 1e-9. Supports with at
/// most 8 points are checked by exhaustive cycle enumeration up to
/// `max_cycle`; larger supports are probed with `trials` random cycles.
MonotonicityReport check_cyclical_monotonicity(const TransportPlan& plan,
                                               const BlockCost& cost, int max_cycle,
                                               std::int64_t trials,
                                               std::uint64_t rng_seed);

}  // namespace stot
