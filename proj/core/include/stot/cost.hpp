#pragma once

#include <Eigen/Core>
#include <functional>

#include "stot/alphabet.hpp"
#include "stot/block_measure.hpp"

namespace stot {

enum class Side { x, y };

/// Single-letter nonnegative cost matrix on X x Y.
class CostSpec {
 public:
  CostSpec(Alphabet x_alphabet, Alphabet y_alphabet, Eigen::MatrixXd matrix);

  const Alphabet& x_alphabet() const noexcept { return x_; }
  const Alphabet& y_alphabet() const noexcept { return y_; }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  double operator()(SymbolId x, SymbolId y) const {
    return matrix_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
  }
  double sup_norm() const noexcept { return sup_norm_; }

 private:
  Alphabet x_, y_;
  Eigen::MatrixXd matrix_;
  double sup_norm_;
};

/// c_k(x, y) = sum of single-letter costs coordinatewise; blocks must have
/// equal length and be encoded over the cost's alphabets.
double k_step_cost(const CostSpec& cost, const Block& x_block, const Block& y_block);

/// Adapted cost c_X(x, x') = max_y |c(x, y) - c(x', y)| (or the Y analogue).
/// The result is a symmetric pseudometric matrix with zero diagonal.
CostSpec adapted_cost(const CostSpec& cost, Side side);

/// 0-1 cost on alphabet x alphabet.
CostSpec hamming_cost(const Alphabet& alphabet);

/// Block-level cost oracle used by the transport solvers.
using BlockCost = std::function<double(const Block&, const Block&)>;

/// Oracle evaluating c_k lazily on (x-block, y-block) pairs.
BlockCost k_step_oracle(const CostSpec& cost);

/// Dense cost matrix over the two supports, row = atom of a, col = atom of b.
Eigen::MatrixXd cost_matrix(const BlockMeasure& a, const BlockMeasure& b,
                            const BlockCost& cost);

}  // namespace stot
