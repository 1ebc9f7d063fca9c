#include "stot/markov.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "stot/rng.hpp"

namespace stot {

namespace {

Eigen::VectorXd solve_stationary(const Eigen::MatrixXd& p) {
  // p' pi = pi with sum(pi) = 1: replace one balance equation by the
  // normalization row.
  const Eigen::Index n = p.rows();
  Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (pi(i) < 0.0 && pi(i) > -1e-12) pi(i) = 0.0;
  }
  return pi;
}

bool check_irreducible(const Eigen::MatrixXd& p) {
  const Eigen::Index n = p.rows();
  // Reachability closure over the support graph, from state 0 and to state 0.
  auto reach_from = [&](Eigen::Index s, bool forward) {
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::vector<Eigen::Index> stack{s};
    seen[static_cast<std::size_t>(s)] = true;
    while (!stack.empty()) {
      const Eigen::Index u = stack.back();
      stack.pop_back();
      for (Eigen::Index v = 0; v < n; ++v) {
        const double w = forward ? p(u, v) : p(v, u);
        if (w > 0.0 && !seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = true;
          stack.push_back(v);
        }
      }
    }
    return seen;
  };
  const auto fwd = reach_from(0, true);
  const auto bwd = reach_from(0, false);
  for (Eigen::Index v = 0; v < n; ++v) {
    if (!fwd[static_cast<std::size_t>(v)] || !bwd[static_cast<std::size_t>(v)]) return false;
  }
  return true;
}

bool check_aperiodic(const Eigen::MatrixXd& p, bool irreducible) {
  if (!irreducible) return false;
  const Eigen::Index n = p.rows();
  // gcd of cycle lengths through state 0 via BFS levels.
  std::vector<int> level(static_cast<std::size_t>(n), -1);
  std::vector<Eigen::Index> queue{0};
  level[0] = 0;
  int g = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Eigen::Index u = queue[head];
    for (Eigen::Index v = 0; v < n; ++v) {
      if (p(u, v) <= 0.0) continue;
      if (level[static_cast<std::size_t>(v)] < 0) {
        level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
        queue.push_back(v);
      } else {
        const int d = level[static_cast<std::size_t>(u)] + 1 - level[static_cast<std::size_t>(v)];
        g = std::gcd(g, std::abs(d));
      }
    }
  }
  return g == 1;
}

}  // namespace

MarkovModel::MarkovModel(Alphabet alphabet, Eigen::MatrixXd transition,
                         std::optional<Eigen::VectorXd> stationary)
    : alphabet_(std::move(alphabet)), transition_(std::move(transition)) {
  const Eigen::Index n = static_cast<Eigen::Index>(alphabet_.size());
  if (transition_.rows() != n || transition_.cols() != n) {
    throw std::invalid_argument("transition matrix shape does not match alphabet");
  }
  if ((transition_.array() < 0.0).any() || !transition_.allFinite()) {
    throw std::invalid_argument("transition matrix entries must be nonnegative and finite");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(transition_.row(i).sum() - 1.0) > 1e-12) {
      throw std::invalid_argument("transition matrix rows must sum to 1 within 1e-12");
    }
  }
  stationary_ = stationary ? std::move(*stationary) : solve_stationary(transition_);
  if (stationary_.size() != n) {
    throw std::invalid_argument("stationary distribution size does not match alphabet");
  }
  if ((stationary_.array() < 0.0).any() || std::abs(stationary_.sum() - 1.0) > 1e-10) {
    throw std::invalid_argument("stationary distribution must be a probability vector");
  }
  if (((stationary_.transpose() * transition_).transpose() - stationary_).cwiseAbs().maxCoeff() >
      1e-10) {
    throw std::invalid_argument("stationary distribution is not a fixed point of P");
  }
  irreducible_ = check_irreducible(transition_);
  aperiodic_ = check_aperiodic(transition_, irreducible_);
}

MarkovModel MarkovModel::iid(Alphabet alphabet, Eigen::VectorXd distribution) {
  const Eigen::Index n = static_cast<Eigen::Index>(alphabet.size());
  if (distribution.size() != n) {
    throw std::invalid_argument("distribution size does not match alphabet");
  }
  Eigen::MatrixXd p(n, n);
  for (Eigen::Index i = 0; i < n; ++i) p.row(i) = distribution.transpose();
  return MarkovModel(std::move(alphabet), std::move(p), std::move(distribution));
}

double MarkovModel::second_eigenvalue_modulus() const {
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(transition_, false).eigenvalues();
  std::vector<double> mags(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(ev(i));
  std::sort(mags.begin(), mags.end(), std::greater<>());
  return mags.size() > 1 ? mags[1] : 0.0;
}

SymbolSequence sample(const MarkovModel& model, std::int64_t n, std::uint64_t rng_seed) {
  if (n < 1) throw std::invalid_argument("sample length must be >= 1");
  const Eigen::Index size = static_cast<Eigen::Index>(model.alphabet().size());

  // Cumulative rows for inverse-CDF draws.
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(size));
  for (Eigen::Index i = 0; i < size; ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    row.resize(static_cast<std::size_t>(size));
    double run = 0.0;
    for (Eigen::Index j = 0; j < size; ++j) {
      run += model.transition()(i, j);
      row[static_cast<std::size_t>(j)] = run;
    }
  }
  std::vector<double> init(static_cast<std::size_t>(size));
  {
    double run = 0.0;
    for (Eigen::Index i = 0; i < size; ++i) {
      run += model.stationary()(i);
      init[static_cast<std::size_t>(i)] = run;
    }
  }

  Rng rng(rng_seed);
  std::vector<SymbolId> data(static_cast<std::size_t>(n));
  SymbolId state = static_cast<SymbolId>(rng.next_from_cumulative(init));
  data[0] = state;
  for (std::int64_t t = 1; t < n; ++t) {
    state = static_cast<SymbolId>(rng.next_from_cumulative(rows[state]));
    data[static_cast<std::size_t>(t)] = state;
  }
  return SymbolSequence{model.alphabet(), std::move(data)};
}

BlockMeasure exact_block_law(const MarkovModel& model, int k, std::int64_t atom_budget) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const auto size = static_cast<SymbolId>(model.alphabet().size());
  double budget_probe = 1.0;
  for (int i = 0; i < k; ++i) {
    budget_probe *= static_cast<double>(size);
    if (budget_probe > static_cast<double>(atom_budget)) {
      throw std::runtime_error("exact_block_law: atom budget exceeded");
    }
  }

  // Depth-first extension of positive-probability prefixes.
  struct Partial {
    std::vector<SymbolId> prefix;
    double mass;
  };
  std::vector<BlockMeasure::Atom> atoms;
  std::vector<Partial> stack;
  for (SymbolId s = 0; s < size; ++s) {
    const double p0 = model.stationary()(static_cast<Eigen::Index>(s));
    if (p0 > 0.0) stack.push_back({{s}, p0});
  }
  const int width = model.alphabet().encoded_width();
  double norm = 0.0;
  while (!stack.empty()) {
    Partial cur = std::move(stack.back());
    stack.pop_back();
    if (static_cast<int>(cur.prefix.size()) == k) {
      norm += cur.mass;
      atoms.push_back({encode_block(cur.prefix, width), cur.mass});
      continue;
    }
    const SymbolId last = cur.prefix.back();
    for (SymbolId s = 0; s < size; ++s) {
      const double p = model.transition()(static_cast<Eigen::Index>(last),
                                          static_cast<Eigen::Index>(s));
      if (p <= 0.0) continue;
      Partial next = cur;
      next.prefix.push_back(s);
      next.mass *= p;
      stack.push_back(std::move(next));
    }
  }
  // Products of doubles drift from summing to one; renormalize before the
  // measure invariant is checked.
  for (auto& a : atoms) a.mass /= norm;
  return BlockMeasure(model.alphabet(), k, std::move(atoms));
}

double entropy_rate(const MarkovModel& model) {
  const auto& p = model.transition();
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double pi = model.stationary()(i);
    if (pi <= 0.0) continue;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (p(i, j) > 0.0) h -= pi * p(i, j) * std::log(p(i, j));
    }
  }
  return h;
}

double phi_mixing(const MarkovModel& model, int g) {
  if (g < 0) throw std::invalid_argument("gap must be >= 0");
  if (g == 0) return 1.0;
  Eigen::MatrixXd power = model.transition();
  for (int t = 1; t < g; ++t) power = power * model.transition();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < power.rows(); ++i) {
    const double tv =
        0.5 * (power.row(i).transpose() - model.stationary()).cwiseAbs().sum();
    worst = std::max(worst, tv);
  }
  return worst;
}

}  // namespace stot
