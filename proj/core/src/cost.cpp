#include "stot/cost.hpp"

#include <cmath>
#include <stdexcept>

namespace stot {

CostSpec::CostSpec(Alphabet x_alphabet, Alphabet y_alphabet, Eigen::MatrixXd matrix)
    : x_(std::move(x_alphabet)), y_(std::move(y_alphabet)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != static_cast<Eigen::Index>(x_.size()) ||
      matrix_.cols() != static_cast<Eigen::Index>(y_.size())) {
    throw std::invalid_argument("cost matrix shape does not match alphabets");
  }
  if (!matrix_.allFinite()) {
    throw std::invalid_argument("cost matrix must be finite");
  }
  if ((matrix_.array() < 0.0).any()) {
    throw std::invalid_argument("cost matrix entries must be nonnegative");
  }
  sup_norm_ = matrix_.maxCoeff();
}

double k_step_cost(const CostSpec& cost, const Block& x_block, const Block& y_block) {
  const int xw = cost.x_alphabet().encoded_width();
  const int yw = cost.y_alphabet().encoded_width();
  const std::size_t k = block_length(x_block, xw);
  if (k != block_length(y_block, yw)) {
    throw std::invalid_argument("k_step_cost: block length mismatch");
  }
  const auto& m = cost.matrix();
  const unsigned char* xp = reinterpret_cast<const unsigned char*>(x_block.data());
  const unsigned char* yp = reinterpret_cast<const unsigned char*>(y_block.data());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const SymbolId x = xw == 1 ? *xp : (static_cast<SymbolId>(xp[0]) << 8 | xp[1]);
    const SymbolId y = yw == 1 ? *yp : (static_cast<SymbolId>(yp[0]) << 8 | yp[1]);
    sum += m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
    xp += xw;
    yp += yw;
  }
  return sum;
}

CostSpec adapted_cost(const CostSpec& cost, Side side) {
  const Eigen::MatrixXd& c = cost.matrix();
  if (side == Side::x) {
    const Eigen::Index n = c.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double d = (c.row(i) - c.row(j)).cwiseAbs().maxCoeff();
        out(i, j) = d;
        out(j, i) = d;
      }
    }
    return CostSpec(cost.x_alphabet(), cost.x_alphabet(), std::move(out));
  }
  const Eigen::Index n = c.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (c.col(i) - c.col(j)).cwiseAbs().maxCoeff();
      out(i, j) = d;
      out(j, i) = d;
    }
  }
  return CostSpec(cost.y_alphabet(), cost.y_alphabet(), std::move(out));
}

CostSpec hamming_cost(const Alphabet& alphabet) {
  const Eigen::Index n = static_cast<Eigen::Index>(alphabet.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(n, n);
  m.diagonal().setZero();
  return CostSpec(alphabet, alphabet, std::move(m));
}

BlockCost k_step_oracle(const CostSpec& cost) {
  return [cost](const Block& x, const Block& y) { return k_step_cost(cost, x, y); };
}

Eigen::MatrixXd cost_matrix(const BlockMeasure& a, const BlockMeasure& b,
                            const BlockCost& cost) {
  const Eigen::Index m = static_cast<Eigen::Index>(a.support_size());
  const Eigen::Index n = static_cast<Eigen::Index>(b.support_size());
  Eigen::MatrixXd out(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Block& x = a.atoms()[static_cast<std::size_t>(i)].block;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = cost(x, b.atoms()[static_cast<std::size_t>(j)].block);
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument("cost oracle must be finite and nonnegative");
      }
      out(i, j) = v;
    }
  }
  return out;
}

}  // namespace stot
