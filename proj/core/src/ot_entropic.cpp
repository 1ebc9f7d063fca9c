#include "stot/ot_entropic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stot {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct KahanAcc {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

// One Sinkhorn instance at fixed supports; eta varies across the
// epsilon-scaling stages.
class Sinkhorn {
 public:
  Sinkhorn(const BlockMeasure& a, const BlockMeasure& b, const BlockCost& cost,
           std::int64_t max_cells)
      : m_(static_cast<Eigen::Index>(a.support_size())),
        n_(static_cast<Eigen::Index>(b.support_size())) {
    if (static_cast<std::int64_t>(m_) * n_ > max_cells) {
      throw std::runtime_error("solve_entropic_ot: support budget exceeded");
    }
    cost_.resize(m_, n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Block& x = a.atoms()[static_cast<std::size_t>(i)].block;
      for (Eigen::Index j = 0; j < n_; ++j) {
        const double v = cost(x, b.atoms()[static_cast<std::size_t>(j)].block);
        if (!std::isfinite(v) || v < 0.0) {
          throw std::invalid_argument("cost oracle must be finite and nonnegative");
        }
        cost_(i, j) = v;
      }
    }
    a_.resize(m_);
    b_.resize(n_);
    for (Eigen::Index i = 0; i < m_; ++i) a_(i) = a.atoms()[static_cast<std::size_t>(i)].mass;
    for (Eigen::Index j = 0; j < n_; ++j) b_(j) = b.atoms()[static_cast<std::size_t>(j)].mass;
    log_a_ = a_.log();
    log_b_ = b_.log();
    f_ = Eigen::ArrayXd::Zero(m_);
    g_ = Eigen::ArrayXd::Zero(n_);
  }

  // Row marginal L1 error of the plan exp((f + g - C)/eta); also returns the
  // per-row log-sum-exp terms that the f-update needs.
  double row_violation(double eta, Eigen::ArrayXd& lse_out) const {
    lse_out.resize(m_);
    double viol = 0.0;
    Eigen::ArrayXd row(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      row = (g_ - cost_.row(i).transpose().array()) / eta;
      const double mx = row.maxCoeff();
      const double s = (row - mx).exp().sum();
      lse_out(i) = mx + std::log(s);
      viol += std::abs(std::exp(f_(i) / eta + lse_out(i)) - a_(i));
    }
    return viol;
  }

  double col_violation(double eta) const {
    Eigen::ArrayXd lse = col_lse(eta);
    return ((g_ / eta + lse).exp() - b_).abs().sum();
  }

  void update_f(double eta, const Eigen::ArrayXd& lse) { f_ = eta * (log_a_ - lse); }

  void update_g(double eta) { g_ = eta * (log_b_ - col_lse(eta)); }

  void log_domain_pair(double eta) {
    Eigen::ArrayXd lse;
    row_violation(eta, lse);
    update_f(eta, lse);
    update_g(eta);
  }

  // Stabilized scaling at fixed eta: u <- a./(Kv), v <- b./(K'u) on the
  // absorbed kernel K = exp((f + g - C)/eta), folding u, v back into (f, g)
  // whenever the scalings drift. Identical to the log-domain updates in
  // exact arithmetic, but each pass is exp-free.
  int absorbed_loop(double eta, double tol, int iter_budget, double& viol_out) {
    RowMajor kern(m_, n_);
    Eigen::ArrayXd u = Eigen::ArrayXd::Ones(m_), v = Eigen::ArrayXd::Ones(n_);
    Eigen::ArrayXd r(m_), s(n_);
    const auto rebuild = [&]() {
      Eigen::ArrayXd row(n_);
      for (Eigen::Index i = 0; i < m_; ++i) {
        row = ((f_(i) + g_ - cost_.row(i).transpose().array()) / eta).exp();
        kern.row(i) = row.matrix().transpose();
      }
      u.setOnes();
      v.setOnes();
    };
    const auto fold = [&]() {
      f_ += eta * u.log();
      g_ += eta * v.log();
    };
    rebuild();
    int used = 0;
    viol_out = std::numeric_limits<double>::infinity();
    while (used < iter_budget) {
      r = (kern * v.matrix()).array();
      // Row sums of the current plan are u .* r; check before updating u.
      viol_out = (u * r - a_).abs().sum();
      if (viol_out <= tol) break;
      if ((r <= 0.0).any() || !r.allFinite()) {
        fold();
        log_domain_pair(eta);
        ++used;
        rebuild();
        continue;
      }
      u = a_ / r;
      s = (kern.transpose() * u.matrix()).array();
      if ((s <= 0.0).any() || !s.allFinite()) {
        fold();
        log_domain_pair(eta);
        ++used;
        rebuild();
        continue;
      }
      v = b_ / s;
      ++used;
      if (std::max(u.log().abs().maxCoeff(), v.log().abs().maxCoeff()) > 25.0) {
        fold();
        rebuild();
      }
    }
    fold();
    return used;
  }

  Eigen::Index m_, n_;
  RowMajor cost_;
  Eigen::ArrayXd a_, b_, log_a_, log_b_, f_, g_;

 private:
  Eigen::ArrayXd col_lse(double eta) const {
    Eigen::ArrayXd colmax =
        Eigen::ArrayXd::Constant(n_, -std::numeric_limits<double>::infinity());
    Eigen::ArrayXd colsum = Eigen::ArrayXd::Zero(n_);
    Eigen::ArrayXd row(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      row = (f_(i) - cost_.row(i).transpose().array()) / eta;
      colmax = colmax.max(row);
    }
    for (Eigen::Index i = 0; i < m_; ++i) {
      row = (f_(i) - cost_.row(i).transpose().array()) / eta;
      colsum += (row - colmax).exp();
    }
    return colmax + colsum.log();
  }
};

}  // namespace

EntropicPlan solve_entropic_ot(const BlockMeasure& a, const BlockMeasure& b,
                               const BlockCost& cost, double eta,
                               const SinkhornOptions& options) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (!(options.tol > 0.0)) throw std::invalid_argument("tol must be positive");

  Sinkhorn solver(a, b, cost, options.max_cells);
  const Eigen::Index m = solver.m_, n = solver.n_;
  // Stop the inner loops a little below tol; convergence is judged on a
  // fresh measurement at the end.
  const double inner_tol = 0.5 * options.tol;

  int iterations = 0;
  if (options.warm_start) {
    const auto& [f0, g0] = *options.warm_start;
    if (f0.size() != static_cast<std::size_t>(m) || g0.size() != static_cast<std::size_t>(n)) {
      throw std::invalid_argument("warm start potentials have wrong size");
    }
    solver.f_ = Eigen::Map<const Eigen::ArrayXd>(f0.data(), m);
    solver.g_ = Eigen::Map<const Eigen::ArrayXd>(g0.data(), n);
  } else if (options.epsilon_scaling) {
    const double range = solver.cost_.maxCoeff() - solver.cost_.minCoeff();
    double stage = range / 4.0;
    Eigen::ArrayXd lse;
    while (stage > eta && iterations < options.max_iter) {
      for (int it = 0; it < 40 && iterations < options.max_iter; ++it) {
        const double viol = solver.row_violation(stage, lse);
        if (viol <= std::max(inner_tol, 1e-4)) break;
        solver.update_f(stage, lse);
        solver.update_g(stage);
        ++iterations;
      }
      stage /= 2.0;
    }
  }

  // A few log-domain pairs at the target eta, then the stabilized loop.
  double inner_viol = std::numeric_limits<double>::infinity();
  {
    Eigen::ArrayXd lse;
    for (int it = 0; it < 3 && iterations < options.max_iter; ++it) {
      inner_viol = solver.row_violation(eta, lse);
      if (inner_viol <= inner_tol) break;
      solver.update_f(eta, lse);
      solver.update_g(eta);
      ++iterations;
    }
  }
  if (inner_viol > inner_tol && iterations < options.max_iter) {
    iterations +=
        solver.absorbed_loop(eta, inner_tol, options.max_iter - iterations, inner_viol);
  }

  EntropicPlan out{a,  b,  std::nullopt, eta, 0.0, 0.0, 0.0, {}, {},
                   iterations, 0.0, SinkhornStatus::iteration_limit};
  out.potential_row.assign(solver.f_.data(), solver.f_.data() + m);
  out.potential_col.assign(solver.g_.data(), solver.g_.data() + n);

  // Value and entropy from pi = exp((f + g - C)/eta); log pi equals the
  // exponent, so no log calls are needed.
  KahanAcc cost_acc, ent_acc;
  Eigen::ArrayXd row(n);
  if (options.want_plan) out.plan = Eigen::MatrixXd(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    row = (solver.f_(i) + solver.g_ - solver.cost_.row(i).transpose().array()) / eta;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double p = std::exp(row(j));
      cost_acc.add(p * solver.cost_(i, j));
      ent_acc.add(-p * row(j));
      if (out.plan) (*out.plan)(i, j) = p;
    }
  }
  out.transport_cost = cost_acc.sum;
  out.plan_entropy = ent_acc.sum;
  out.regularized_value = out.transport_cost - eta * out.plan_entropy;

  Eigen::ArrayXd lse;
  out.marginal_violation =
      std::max(solver.row_violation(eta, lse), solver.col_violation(eta));
  out.status = out.marginal_violation <= options.tol ? SinkhornStatus::converged
                                                     : SinkhornStatus::iteration_limit;
  return out;
}

TransportPlan EntropicPlan::as_transport_plan() const {
  if (!plan) {
    throw std::invalid_argument("EntropicPlan has no dense plan (want_plan was off)");
  }
  TransportPlan out{row_measure, col_measure, {}, transport_cost, std::nullopt, std::nullopt};
  const Eigen::Index m = plan->rows(), n = plan->cols();
  out.entries.reserve(static_cast<std::size_t>(m * n));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double p = (*plan)(i, j);
      if (p > 0.0) {
        out.entries.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j), p});
      }
    }
  }
  return out;
}

std::vector<double> c_eta_transform(std::span<const double> g, const Eigen::MatrixXd& cost,
                                    double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (g.size() != static_cast<std::size_t>(cost.cols())) {
    throw std::invalid_argument("potential size does not match cost columns");
  }
  const Eigen::Map<const Eigen::ArrayXd> gv(g.data(), static_cast<Eigen::Index>(g.size()));
  std::vector<double> out(static_cast<std::size_t>(cost.rows()));
  Eigen::ArrayXd row(cost.cols());
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    row = (gv - cost.row(i).transpose().array()) / eta;
    const double mx = row.maxCoeff();
    out[static_cast<std::size_t>(i)] = -eta * (mx + std::log((row - mx).exp().sum()));
  }
  return out;
}

double semidual_value(const BlockMeasure& a, const BlockMeasure& b,
                      std::span<const double> g, const BlockCost& cost, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  const Eigen::MatrixXd c = cost_matrix(a, b, cost);
  const auto g_tilde = c_eta_transform(g, c, eta);
  double value = 0.0;
  for (std::size_t i = 0; i < a.support_size(); ++i) {
    const double mass = a.atoms()[i].mass;
    value += mass * (eta * std::log(mass) + g_tilde[i]);
  }
  for (std::size_t j = 0; j < b.support_size(); ++j) {
    value += b.atoms()[j].mass * g[j];
  }
  return value;
}

}  // namespace stot
