#pragma once

#include <vector>

#include "stot/cost.hpp"
#include "stot/markov.hpp"
#include "stot/ot_entropic.hpp"
#include "stot/ot_exact.hpp"

namespace stot {

struct CurvePoint {
  int k;
  double value;  // (1/k) T^eta_{c_k}(mu_k, nu_k)
};

struct CurveOptions {
  std::int64_t atom_budget = std::int64_t(1) << 24;
  std::int64_t max_cells = static_cast<std::int64_t>(20000) * 20000;
  double sinkhorn_tol = 1e-9;
  int sinkhorn_max_iter = 50000;
};

/// Exact average k-step (entropic) transport cost curve between the two
/// models' k-block laws, k = 1..k_max. With eta = 0 the exact solver runs;
/// otherwise Sinkhorn, warm-started from the exact dual potentials when eta
/// is small relative to the k-step cost scale. The last entry is the best
/// computable lower proxy for the optimal joining cost.
std::vector<CurvePoint> k_step_cost_curve(const MarkovModel& mx, const MarkovModel& my,
                                          const CostSpec& cost, int k_max, double eta,
                                          const CurveOptions& options = {});

}  // namespace stot
