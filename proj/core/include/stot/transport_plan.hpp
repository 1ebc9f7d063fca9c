#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stot/block_measure.hpp"
#include "stot/cost.hpp"

namespace stot {

/// Sparse coupling of two block measures. Entry indices refer to the sorted
/// atom order of the marginals. When dual potentials are present they
/// certify optimality: f(u) + g(v) <= cost(u, v) on support pairs, with
/// equality on the plan's support.
struct TransportPlan {
  struct Entry {
    std::int32_t row;
    std::int32_t col;
    double mass;
  };

  BlockMeasure row_measure;
  BlockMeasure col_measure;
  std::vector<Entry> entries;  // sorted by (row, col)
  double cost_value = 0.0;
  std::optional<std::vector<double>> dual_row;  // f, aligned with row atoms
  std::optional<std::vector<double>> dual_col;  // g, aligned with col atoms

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
  double recompute_cost(const BlockCost& cost) const;
};

/// Primal value minus dual value; solver outputs satisfy gap <= 1e-7.
double dual_gap(const TransportPlan& plan);

/// Throws when the coupling property fails beyond `tol` per atom.
void validate_coupling(const TransportPlan& plan, double tol = 1e-9);

}  // namespace stot
