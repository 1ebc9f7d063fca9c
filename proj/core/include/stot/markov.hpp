#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

#include "stot/alphabet.hpp"
#include "stot/block_measure.hpp"

namespace stot {

/// Stationary finite-state Markov chain: row-stochastic transition matrix
/// plus its stationary distribution. An iid process is the special case of
/// identical rows.
class MarkovModel {
 public:
  MarkovModel(Alphabet alphabet, Eigen::MatrixXd transition,
              std::optional<Eigen::VectorXd> stationary = {});

  static MarkovModel iid(Alphabet alphabet, Eigen::VectorXd distribution);

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  const Eigen::MatrixXd& transition() const noexcept { return transition_; }
  const Eigen::VectorXd& stationary() const noexcept { return stationary_; }
  bool irreducible() const noexcept { return irreducible_; }
  bool aperiodic() const noexcept { return aperiodic_; }

  /// Second-largest eigenvalue modulus of the transition matrix; the default
  /// geometric-ergodicity rate used for gap schedules.
  double second_eigenvalue_modulus() const;

 private:
  Alphabet alphabet_;
  Eigen::MatrixXd transition_;
  Eigen::VectorXd stationary_;
  bool irreducible_ = false;
  bool aperiodic_ = false;
};

/// X_1 ~ stationary, X_{t+1} ~ P(X_t, .); deterministic per seed.
SymbolSequence sample(const MarkovModel& model, std::int64_t n, std::uint64_t rng_seed);

/// Exact k-block law: mu_k(x_1^k) = p(x_1) prod P(x_i, x_{i+1}), zero-mass
/// blocks omitted.
BlockMeasure exact_block_law(const MarkovModel& model, int k,
                             std::int64_t atom_budget = std::int64_t(1) << 24);

/// Entropy rate in nats: -sum_ij p_i P_ij log P_ij.
double entropy_rate(const MarkovModel& model);

/// phi-mixing coefficient: 1 at g = 0, else max_i TV(P^g(i, .), p).
double phi_mixing(const MarkovModel& model, int g);

}  // namespace stot
