#include "stot/curves.hpp"

#include <stdexcept>

namespace stot {

std::vector<CurvePoint> k_step_cost_curve(const MarkovModel& mx, const MarkovModel& my,
                                          const CostSpec& cost, int k_max, double eta,
                                          const CurveOptions& options) {
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  if (eta < 0.0) throw std::invalid_argument("eta must be nonnegative");
  if (cost.x_alphabet() != mx.alphabet() || cost.y_alphabet() != my.alphabet()) {
    throw std::invalid_argument("cost alphabets do not match the models");
  }

  std::vector<CurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(k_max));
  const BlockCost oracle = k_step_oracle(cost);
  for (int k = 1; k <= k_max; ++k) {
    const BlockMeasure mu = exact_block_law(mx, k, options.atom_budget);
    const BlockMeasure nu = exact_block_law(my, k, options.atom_budget);
    double value = 0.0;
    if (eta == 0.0) {
      ExactOtOptions exact;
      exact.max_cells = options.max_cells;
      value = solve_ot(mu, nu, oracle, exact).cost_value;
    } else {
      SinkhornOptions sk;
      sk.tol = options.sinkhorn_tol;
      sk.max_iter = options.sinkhorn_max_iter;
      sk.max_cells = options.max_cells;
      sk.want_plan = false;
      // At small eta the LP duals are an excellent starting point and save
      // most of the annealing iterations.
      if (eta < 0.05 * k * cost.sup_norm()) {
        ExactOtOptions exact;
        exact.max_cells = options.max_cells;
        TransportPlan lp = solve_ot(mu, nu, oracle, exact);
        sk.warm_start = std::make_pair(std::move(*lp.dual_row), std::move(*lp.dual_col));
      }
      const EntropicPlan plan = solve_entropic_ot(mu, nu, oracle, eta, sk);
      if (plan.status != SinkhornStatus::converged) {
        throw std::runtime_error("k_step_cost_curve: Sinkhorn did not converge at k=" +
                                 std::to_string(k));
      }
      value = plan.regularized_value;
    }
    curve.push_back({k, value / k});
  }
  return curve;
}

}  // namespace stot
