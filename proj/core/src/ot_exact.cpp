#include "stot/ot_exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "stot/rng.hpp"

namespace stot {

namespace {

// Transportation simplex on the bipartite support graph.
//
// Marginal masses are scaled to int64 units and supplies get the classic
// (K, +1) perturbation: A_i = K w_i + 1, B_j = K v_j (+ m on the last
// column), K = m + n + 1. Every basic flow of the perturbed problem is
// nonzero, so pivots strictly decrease the objective and the run terminates
// without anti-cycling machinery. Arc order is row-major over canonically
// sorted atoms, which fixes the solution among degenerate optima.
class TransportSimplex {
 public:
  TransportSimplex(const BlockMeasure& a, const BlockMeasure& b, const BlockCost& cost,
                   const ExactOtOptions& options)
      : a_(a), b_(b), cost_(cost), m_(static_cast<std::int64_t>(a.support_size())),
        n_(static_cast<std::int64_t>(b.support_size())) {
    const std::int64_t cells = m_ * n_;
    if (cells > options.max_cells) {
      throw std::runtime_error("solve_ot: support budget exceeded");
    }
    dense_ = cells <= options.dense_cells;
    if (dense_) {
      costs_.resize(static_cast<std::size_t>(cells));
      double max_abs = 0.0;
      for (std::int64_t i = 0; i < m_; ++i) {
        const Block& x = a_.atoms()[static_cast<std::size_t>(i)].block;
        for (std::int64_t j = 0; j < n_; ++j) {
          const double v = cost_(x, b_.atoms()[static_cast<std::size_t>(j)].block);
          if (!std::isfinite(v)) {
            throw std::invalid_argument("solve_ot: cost oracle returned non-finite value");
          }
          costs_[static_cast<std::size_t>(i * n_ + j)] = v;
          max_abs = std::max(max_abs, std::abs(v));
        }
      }
      max_cost_ = max_abs;
    } else {
      // Sample the diagonal-ish cells for a tolerance scale.
      double max_abs = 0.0;
      for (std::int64_t i = 0; i < m_; ++i) {
        max_abs = std::max(max_abs, std::abs(arc_cost(i, i % n_)));
      }
      max_cost_ = max_abs;
    }
    eps_ = 1e-11 * (1.0 + max_cost_);
  }

  TransportPlan solve() {
    scale_masses();
    build_initial_tree();
    const std::int64_t arc_count = m_ * n_;
    block_size_ = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::sqrt(static_cast<double>(arc_count))), 64, 1 << 16);
    for (;;) {
      while (true) {
        const std::int64_t arc = find_entering();
        if (arc < 0) break;
        pivot(arc);
      }
      // Refresh potentials and re-verify; incremental updates drift by ulps.
      compute_potentials();
      if (find_entering() < 0) break;
    }
    return extract();
  }

 private:
  double arc_cost(std::int64_t i, std::int64_t j) const {
    if (dense_) return costs_[static_cast<std::size_t>(i * n_ + j)];
    const double v = cost_(a_.atoms()[static_cast<std::size_t>(i)].block,
                           b_.atoms()[static_cast<std::size_t>(j)].block);
    if (!std::isfinite(v)) {
      throw std::invalid_argument("solve_ot: cost oracle returned non-finite value");
    }
    return v;
  }

  void scale_masses() {
    const std::int64_t k_pert = m_ + n_ + 1;
    const std::int64_t limit = std::int64_t(1) << 62;
    std::int64_t scale_cap = limit / k_pert;

    std::vector<std::int64_t> wa, wb;
    std::int64_t total = 0;
    bool exact = false;
    if (a_.has_exact_weights() && b_.has_exact_weights()) {
      const std::int64_t da = a_.denominator();
      const std::int64_t db = b_.denominator();
      const std::int64_t g = std::gcd(da, db);
      const double lcm_estimate = static_cast<double>(da) / g * static_cast<double>(db);
      if (lcm_estimate <= static_cast<double>(scale_cap)) {
        const std::int64_t lcm = da / g * db;
        // Boost so the +1 supply perturbation carries negligible mass even
        // when the common denominator is small.
        std::int64_t boost = 1;
        while (boost * 2 <= scale_cap / lcm) boost *= 2;
        wa.resize(static_cast<std::size_t>(m_));
        wb.resize(static_cast<std::size_t>(n_));
        for (std::int64_t i = 0; i < m_; ++i) {
          wa[static_cast<std::size_t>(i)] =
              a_.weights()[static_cast<std::size_t>(i)] * (lcm / da) * boost;
        }
        for (std::int64_t j = 0; j < n_; ++j) {
          wb[static_cast<std::size_t>(j)] =
              b_.weights()[static_cast<std::size_t>(j)] * (lcm / db) * boost;
        }
        total = lcm * boost;
        exact = true;
      }
    }
    if (!exact) {
      std::int64_t grid = std::int64_t(1) << 48;
      while (grid > scale_cap) grid >>= 1;
      wa = grid_round(a_, grid);
      wb = grid_round(b_, grid);
      total = grid;
    }

    supply_.assign(static_cast<std::size_t>(m_ + n_), 0);
    for (std::int64_t i = 0; i < m_; ++i) {
      supply_[static_cast<std::size_t>(i)] = k_pert * wa[static_cast<std::size_t>(i)] + 1;
    }
    for (std::int64_t j = 0; j < n_; ++j) {
      supply_[static_cast<std::size_t>(m_ + j)] = k_pert * wb[static_cast<std::size_t>(j)];
    }
    supply_[static_cast<std::size_t>(m_ + n_ - 1)] += m_;
    unit_ = 1.0 / static_cast<double>(total);
  }

  static std::vector<std::int64_t> grid_round(const BlockMeasure& m, std::int64_t grid) {
    std::vector<std::int64_t> w(m.support_size());
    std::int64_t sum = 0;
    std::size_t argmax = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = std::max<std::int64_t>(
          1, std::llround(m.atoms()[i].mass * static_cast<double>(grid)));
      sum += w[i];
      if (w[i] > w[argmax]) argmax = i;
    }
    w[argmax] += grid - sum;
    if (w[argmax] < 1) {
      throw std::runtime_error("solve_ot: mass grid rounding failed");
    }
    return w;
  }

  // Northwest-corner start. With the perturbed supplies there are no interior
  // ties, so the staircase has exactly m + n - 1 arcs, all strictly positive.
  void build_initial_tree() {
    const std::int64_t nodes = m_ + n_;
    parent_.assign(static_cast<std::size_t>(nodes), -1);
    flow_.assign(static_cast<std::size_t>(nodes), 0);
    depth_.assign(static_cast<std::size_t>(nodes), 0);
    pot_.assign(static_cast<std::size_t>(nodes), 0.0);
    children_.assign(static_cast<std::size_t>(nodes), {});

    std::int64_t i = 0, j = 0;
    std::int64_t rem_a = supply_[0];
    std::int64_t rem_b = supply_[static_cast<std::size_t>(m_)];
    std::int64_t prev = 0;  // current attachment point, starting at row 0 (root)
    while (true) {
      const std::int64_t q = std::min(rem_a, rem_b);
      rem_a -= q;
      rem_b -= q;
      const std::int64_t row_node = i;
      const std::int64_t col_node = m_ + j;
      // Attach whichever endpoint is new to the tree.
      const std::int64_t child = (prev == row_node) ? col_node : row_node;
      parent_[static_cast<std::size_t>(child)] = prev;
      flow_[static_cast<std::size_t>(child)] = q;
      children_[static_cast<std::size_t>(prev)].push_back(static_cast<std::int32_t>(child));
      prev = child;
      if (rem_a == 0 && i < m_ - 1) {
        ++i;
        rem_a = supply_[static_cast<std::size_t>(i)];
        prev = col_node;
      } else if (j < n_ - 1) {
        ++j;
        rem_b = supply_[static_cast<std::size_t>(m_ + j)];
        prev = row_node;
      } else {
        break;
      }
    }
    compute_potentials();
  }

  void compute_potentials() {
    // Iterative DFS from the root; pot on a basic arc satisfies u + v = c.
    std::vector<std::int32_t> stack{0};
    pot_[0] = 0.0;
    depth_[0] = 0;
    while (!stack.empty()) {
      const std::int32_t u = stack.back();
      stack.pop_back();
      for (std::int32_t v : children_[static_cast<std::size_t>(u)]) {
        const bool child_is_col = v >= m_;
        const std::int64_t row = child_is_col ? u : v;
        const std::int64_t col = child_is_col ? v - m_ : u - m_;
        pot_[static_cast<std::size_t>(v)] = arc_cost(row, col) - pot_[static_cast<std::size_t>(u)];
        depth_[static_cast<std::size_t>(v)] = depth_[static_cast<std::size_t>(u)] + 1;
        stack.push_back(v);
      }
    }
  }

  std::int64_t find_entering() {
    const std::int64_t arc_count = m_ * n_;
    std::int64_t scanned = 0;
    while (scanned < arc_count) {
      const std::int64_t span = std::min(block_size_, arc_count - scanned);
      double best_red = -eps_;
      std::int64_t best_arc = -1;
      for (std::int64_t t = 0; t < span; ++t) {
        const std::int64_t arc = cursor_;
        cursor_ = cursor_ + 1 == arc_count ? 0 : cursor_ + 1;
        const std::int64_t i = arc / n_;
        const std::int64_t j = arc % n_;
        const double red =
            arc_cost(i, j) - pot_[static_cast<std::size_t>(i)] - pot_[static_cast<std::size_t>(m_ + j)];
        if (red < best_red) {
          best_red = red;
          best_arc = arc;
        }
      }
      scanned += span;
      if (best_arc >= 0) return best_arc;
    }
    return -1;
  }

  void pivot(std::int64_t arc) {
    const std::int64_t ei = arc / n_;
    const std::int64_t ej = m_ + arc % n_;
    const double red = arc_cost(ei, ej - m_) - pot_[static_cast<std::size_t>(ei)] -
                       pot_[static_cast<std::size_t>(ej)];

    // Cycle = entering arc + tree path between its endpoints. Walking the
    // cycle from ei through ej back to ei, arcs traversed col->row lose
    // theta, arcs traversed row->col gain theta.
    std::vector<std::int32_t> up_j, up_i;
    {
      std::int64_t x = ej, y = ei;
      while (depth_[static_cast<std::size_t>(x)] > depth_[static_cast<std::size_t>(y)]) {
        up_j.push_back(static_cast<std::int32_t>(x));
        x = parent_[static_cast<std::size_t>(x)];
      }
      while (depth_[static_cast<std::size_t>(y)] > depth_[static_cast<std::size_t>(x)]) {
        up_i.push_back(static_cast<std::int32_t>(y));
        y = parent_[static_cast<std::size_t>(y)];
      }
      while (x != y) {
        up_j.push_back(static_cast<std::int32_t>(x));
        up_i.push_back(static_cast<std::int32_t>(y));
        x = parent_[static_cast<std::size_t>(x)];
        y = parent_[static_cast<std::size_t>(y)];
      }
    }

    // Tree arcs are keyed by their child node. Moving away from ej along
    // up_j: arc (node -> parent). The walk direction over the arc with child
    // c going upward is col->row when c is a column, row->col when c is a
    // row. Along up_i the walk runs downward, so directions flip.
    std::int64_t theta = std::numeric_limits<std::int64_t>::max();
    std::int32_t leaving = -1;
    bool leaving_on_j_side = false;
    for (std::int32_t c : up_j) {
      if (c >= m_) {  // column child, traversed col->row: flow decreases
        if (flow_[static_cast<std::size_t>(c)] < theta) {
          theta = flow_[static_cast<std::size_t>(c)];
          leaving = c;
          leaving_on_j_side = true;
        }
      }
    }
    for (std::int32_t c : up_i) {
      if (c < m_) {  // row child, traversed col->row downward: flow decreases
        if (flow_[static_cast<std::size_t>(c)] < theta) {
          theta = flow_[static_cast<std::size_t>(c)];
          leaving = c;
          leaving_on_j_side = false;
        }
      }
    }
    if (leaving < 0) {
      // All path arcs gain flow; only possible if the path alternates so no
      // column child appears, which cannot happen on a bipartite cycle.
      throw std::logic_error("solve_ot: malformed pivot cycle");
    }

    for (std::int32_t c : up_j) {
      flow_[static_cast<std::size_t>(c)] += (c >= m_) ? -theta : theta;
    }
    for (std::int32_t c : up_i) {
      flow_[static_cast<std::size_t>(c)] += (c >= m_) ? theta : -theta;
    }

    // Re-hang the subtree that was cut off below the leaving arc: reverse
    // parent pointers from the entering endpoint up to the leaving child.
    const std::int64_t e_sub = leaving_on_j_side ? ej : ei;
    std::vector<std::int32_t> path;
    for (std::int64_t x = e_sub;; x = parent_[static_cast<std::size_t>(x)]) {
      path.push_back(static_cast<std::int32_t>(x));
      if (x == leaving) break;
    }
    std::vector<std::int64_t> path_flow(path.size());
    for (std::size_t s = 0; s < path.size(); ++s) {
      path_flow[s] = flow_[static_cast<std::size_t>(path[s])];
    }
    // Detach the leaving child from its old parent.
    detach(path.back());
    for (std::size_t s = path.size(); s-- > 1;) {
      const std::int32_t node = path[s];
      const std::int32_t new_parent = path[s - 1];
      if (s != path.size() - 1) detach(node);
      parent_[static_cast<std::size_t>(node)] = new_parent;
      flow_[static_cast<std::size_t>(node)] = path_flow[s - 1];
      children_[static_cast<std::size_t>(new_parent)].push_back(node);
    }
    if (path.size() > 1) detach(path.front());
    const std::int64_t e_main = leaving_on_j_side ? ei : ej;
    parent_[static_cast<std::size_t>(e_sub)] = static_cast<std::int32_t>(e_main);
    flow_[static_cast<std::size_t>(e_sub)] = theta;
    children_[static_cast<std::size_t>(e_main)].push_back(static_cast<std::int32_t>(e_sub));

    // Shift potentials across the re-hung subtree so the entering arc
    // satisfies u + v = c; node kinds matching e_sub move by +red.
    const bool sub_is_col = e_sub >= m_;
    std::vector<std::int32_t> stack{static_cast<std::int32_t>(e_sub)};
    while (!stack.empty()) {
      const std::int32_t u = stack.back();
      stack.pop_back();
      const bool is_col = u >= m_;
      pot_[static_cast<std::size_t>(u)] += (is_col == sub_is_col) ? red : -red;
      depth_[static_cast<std::size_t>(u)] =
          depth_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(u)])] + 1;
      for (std::int32_t v : children_[static_cast<std::size_t>(u)]) stack.push_back(v);
    }
  }

  void detach(std::int32_t node) {
    auto& sib = children_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(node)])];
    sib.erase(std::find(sib.begin(), sib.end(), node));
  }

  TransportPlan extract() {
    // The final basis is optimal regardless of supplies (reduced costs do
    // not involve them), so recompute its flows for the unperturbed
    // supplies: K * flow_true = flow_pert - (#rows in subtree) + m * (the
    // special column is in the subtree). The right side is divisible by K
    // and nonnegative by construction.
    const std::int64_t nodes = m_ + n_;
    const std::int32_t special = static_cast<std::int32_t>(nodes - 1);
    std::vector<std::int64_t> rows_below(static_cast<std::size_t>(nodes), 0);
    std::vector<std::int8_t> special_below(static_cast<std::size_t>(nodes), 0);
    std::vector<std::int32_t> order;
    order.reserve(static_cast<std::size_t>(nodes));
    order.push_back(0);
    for (std::size_t head = 0; head < order.size(); ++head) {
      for (std::int32_t c : children_[static_cast<std::size_t>(order[head])]) {
        order.push_back(c);
      }
    }
    for (std::size_t i = order.size(); i-- > 0;) {
      const std::int32_t v = order[i];
      rows_below[static_cast<std::size_t>(v)] += v < m_ ? 1 : 0;
      special_below[static_cast<std::size_t>(v)] |= v == special ? 1 : 0;
      const std::int32_t p = parent_[static_cast<std::size_t>(v)];
      if (p >= 0) {
        rows_below[static_cast<std::size_t>(p)] += rows_below[static_cast<std::size_t>(v)];
        special_below[static_cast<std::size_t>(p)] |= special_below[static_cast<std::size_t>(v)];
      }
    }
    const std::int64_t k_pert = m_ + n_ + 1;

    TransportPlan plan{a_, b_, {}, 0.0, std::nullopt, std::nullopt};
    plan.entries.reserve(static_cast<std::size_t>(m_ + n_ - 1));
    for (std::int64_t v = 0; v < m_ + n_; ++v) {
      const std::int32_t p = parent_[static_cast<std::size_t>(v)];
      if (p < 0) continue;
      const bool v_is_col = v >= m_;
      const std::int64_t row = v_is_col ? p : v;
      const std::int64_t col = v_is_col ? v - m_ : p - m_;
      // Sign of the subtree net supply seen by the cut arc flips between
      // row and column children.
      const std::int64_t skew = rows_below[static_cast<std::size_t>(v)] -
                                m_ * special_below[static_cast<std::size_t>(v)];
      const std::int64_t numerator =
          flow_[static_cast<std::size_t>(v)] + (v_is_col ? skew : -skew);
      if (numerator % k_pert != 0 || numerator < 0) {
        throw std::logic_error("solve_ot: perturbation bookkeeping failed");
      }
      const double mass = static_cast<double>(numerator / k_pert) * unit_;
      if (mass > 0.0) {
        plan.entries.push_back({static_cast<std::int32_t>(row),
                                static_cast<std::int32_t>(col), mass});
      }
    }
    std::sort(plan.entries.begin(), plan.entries.end(),
              [](const TransportPlan::Entry& x, const TransportPlan::Entry& y) {
                return x.row != y.row ? x.row < y.row : x.col < y.col;
              });
    double cost_sum = 0.0, comp = 0.0;
    for (const auto& e : plan.entries) {
      const double term = e.mass * arc_cost(e.row, e.col);
      const double y = term - comp;
      const double t = cost_sum + y;
      comp = (t - cost_sum) - y;
      cost_sum = t;
    }
    plan.cost_value = cost_sum;
    std::vector<double> f(static_cast<std::size_t>(m_)), g(static_cast<std::size_t>(n_));
    for (std::int64_t i = 0; i < m_; ++i) f[static_cast<std::size_t>(i)] = pot_[static_cast<std::size_t>(i)];
    for (std::int64_t j = 0; j < n_; ++j) g[static_cast<std::size_t>(j)] = pot_[static_cast<std::size_t>(m_ + j)];
    plan.dual_row = std::move(f);
    plan.dual_col = std::move(g);
    return plan;
  }

  const BlockMeasure& a_;
  const BlockMeasure& b_;
  const BlockCost& cost_;
  std::int64_t m_, n_;
  bool dense_ = true;
  std::vector<double> costs_;
  double max_cost_ = 0.0;
  double eps_ = 1e-11;
  double unit_ = 1.0;
  std::int64_t block_size_ = 64;
  std::int64_t cursor_ = 0;

  std::vector<std::int64_t> supply_;
  std::vector<std::int32_t> parent_;
  std::vector<std::int64_t> flow_;  // flow on the arc to the parent
  std::vector<std::int32_t> depth_;
  std::vector<double> pot_;
  std::vector<std::vector<std::int32_t>> children_;
};

TransportPlan product_plan_single_atom(const BlockMeasure& a, const BlockMeasure& b,
                                       const BlockCost& cost) {
  TransportPlan plan{a, b, {}, 0.0, std::nullopt, std::nullopt};
  const bool a_single = a.support_size() == 1;
  std::vector<double> f(a.support_size(), 0.0), g(b.support_size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < a.support_size(); ++i) {
    for (std::size_t j = 0; j < b.support_size(); ++j) {
      const double mass = a.atoms()[i].mass * b.atoms()[j].mass;
      const double c = cost(a.atoms()[i].block, b.atoms()[j].block);
      if (!std::isfinite(c)) {
        throw std::invalid_argument("solve_ot: cost oracle returned non-finite value");
      }
      plan.entries.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j), mass});
      total += mass * c;
      if (a_single) {
        g[j] = c;
      } else {
        f[i] = c;
      }
    }
  }
  plan.cost_value = total;
  plan.dual_row = std::move(f);
  plan.dual_col = std::move(g);
  return plan;
}

}  // namespace

TransportPlan solve_ot(const BlockMeasure& a, const BlockMeasure& b, const BlockCost& cost,
                       const ExactOtOptions& options) {
  if (a.support_size() == 1 || b.support_size() == 1) {
    // The unique coupling is the product plan.
    return product_plan_single_atom(a, b, cost);
  }
  TransportSimplex simplex(a, b, cost, options);
  return simplex.solve();
}

MonotonicityReport check_cyclical_monotonicity(const TransportPlan& plan,
                                               const BlockCost& cost, int max_cycle,
                                               std::int64_t trials, std::uint64_t rng_seed) {
  if (max_cycle < 2) throw std::invalid_argument("max_cycle must be >= 2");
  if (plan.entries.empty()) throw std::invalid_argument("empty plan");

  const auto& entries = plan.entries;
  const std::size_t s = entries.size();
  // For the exhaustive regime cache the s x s pair costs once.
  std::vector<double> table;
  if (s <= 8) {
    table.resize(s * s);
    for (std::size_t u = 0; u < s; ++u) {
      for (std::size_t v = 0; v < s; ++v) {
        table[u * s + v] =
            cost(plan.row_measure.atoms()[static_cast<std::size_t>(entries[u].row)].block,
                 plan.col_measure.atoms()[static_cast<std::size_t>(entries[v].col)].block);
      }
    }
  }
  const auto pair_cost = [&](std::size_t e_u, std::size_t e_v) {
    if (!table.empty()) return table[e_u * s + e_v];
    return cost(plan.row_measure.atoms()[static_cast<std::size_t>(entries[e_u].row)].block,
                plan.col_measure.atoms()[static_cast<std::size_t>(entries[e_v].col)].block);
  };

  MonotonicityReport report;
  const auto check_cycle = [&](std::span<const std::int32_t> cycle) {
    double closed = 0.0, rotated = 0.0;
    for (std::size_t t = 0; t < cycle.size(); ++t) {
      const std::size_t u = static_cast<std::size_t>(cycle[t]);
      const std::size_t v = static_cast<std::size_t>(cycle[(t + 1) % cycle.size()]);
      closed += pair_cost(u, u);
      rotated += pair_cost(u, v);
    }
    ++report.cycles_checked;
    if (closed > rotated + 1e-9) {
      report.violations.push_back(
          {std::vector<std::int32_t>(cycle.begin(), cycle.end()), closed, rotated});
    }
  };

  if (s <= 8) {
    report.exhaustive = true;
    const int top = std::min<int>(max_cycle, static_cast<int>(s));
    std::vector<std::int32_t> cycle;
    std::vector<bool> used(s, false);
    // All ordered tuples of distinct entries, lengths 2..top.
    auto recurse = [&](auto&& self, int want) -> void {
      if (static_cast<int>(cycle.size()) >= 2) check_cycle(cycle);
      if (static_cast<int>(cycle.size()) == want) return;
      for (std::size_t e = 0; e < s; ++e) {
        if (used[e]) continue;
        used[e] = true;
        cycle.push_back(static_cast<std::int32_t>(e));
        self(self, want);
        cycle.pop_back();
        used[e] = false;
      }
    };
    recurse(recurse, top);
    return report;
  }

  Rng rng(rng_seed);
  const int top = std::min<int>(max_cycle, static_cast<int>(s));
  std::vector<std::int32_t> cycle;
  for (std::int64_t t = 0; t < trials; ++t) {
    const int len = 2 + static_cast<int>(rng.next_index(static_cast<std::size_t>(top - 1)));
    cycle.clear();
    while (static_cast<int>(cycle.size()) < len) {
      const auto e = static_cast<std::int32_t>(rng.next_index(s));
      if (std::find(cycle.begin(), cycle.end(), e) == cycle.end()) cycle.push_back(e);
    }
    check_cycle(cycle);
  }
  return report;
}

}  // namespace stot
