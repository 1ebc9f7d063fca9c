#include "stot/transport_plan.hpp"

#include <cmath>
#include <stdexcept>

namespace stot {

std::vector<double> TransportPlan::row_sums() const {
  std::vector<double> sums(row_measure.support_size(), 0.0);
  for (const auto& e : entries) sums[static_cast<std::size_t>(e.row)] += e.mass;
  return sums;
}

std::vector<double> TransportPlan::col_sums() const {
  std::vector<double> sums(col_measure.support_size(), 0.0);
  for (const auto& e : entries) sums[static_cast<std::size_t>(e.col)] += e.mass;
  return sums;
}

double TransportPlan::recompute_cost(const BlockCost& cost) const {
  double sum = 0.0;
  for (const auto& e : entries) {
    sum += e.mass * cost(row_measure.atoms()[static_cast<std::size_t>(e.row)].block,
                         col_measure.atoms()[static_cast<std::size_t>(e.col)].block);
  }
  return sum;
}

double dual_gap(const TransportPlan& plan) {
  if (!plan.dual_row || !plan.dual_col) {
    throw std::invalid_argument("dual_gap: plan has no dual potentials");
  }
  double dual = 0.0;
  for (std::size_t i = 0; i < plan.row_measure.support_size(); ++i) {
    dual += (*plan.dual_row)[i] * plan.row_measure.atoms()[i].mass;
  }
  for (std::size_t j = 0; j < plan.col_measure.support_size(); ++j) {
    dual += (*plan.dual_col)[j] * plan.col_measure.atoms()[j].mass;
  }
  return plan.cost_value - dual;
}

void validate_coupling(const TransportPlan& plan, double tol) {
  for (const auto& e : plan.entries) {
    if (!(e.mass >= 0.0)) throw std::invalid_argument("plan entry with negative mass");
  }
  const auto rows = plan.row_sums();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (std::abs(rows[i] - plan.row_measure.atoms()[i].mass) > tol) {
      throw std::invalid_argument("row marginal violated beyond tolerance");
    }
  }
  const auto cols = plan.col_sums();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (std::abs(cols[j] - plan.col_measure.atoms()[j].mass) > tol) {
      throw std::invalid_argument("column marginal violated beyond tolerance");
    }
  }
}

}  // namespace stot
