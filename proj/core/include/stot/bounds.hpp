#pragma once

#include <cstdint>
#include <functional>

namespace stot {

/// Inputs to the finite-sample error bounds. `phi_x`/`phi_y` map a gap g to
/// the phi-mixing coefficient of the corresponding process.
struct BoundInputs {
  std::function<double(int)> phi_x;
  std::function<double(int)> phi_y;
  int k = 1;
  int g = 0;
  std::int64_t n = 1;
  double p = 1.0;          // summability exponent in [1, 2)
  double c_constant = 1.0;  // the bound's unspecified constant C
  double sup_cost = 1.0;    // ||c||_inf
  std::int64_t x_size = 2;
  std::int64_t y_size = 2;
  double eta = 0.0;
};

struct BoundResult {
  double value = 0.0;
  /// The entropic bound's log term needs u(k, n) < 1; otherwise the premise
  /// of the entropy-bias lemma fails and the bound carries no information.
  bool vacuous = false;
};

/// Evaluates the plug-in error bound for the estimated (entropic) optimal
/// joining cost: the mixing + gap + empirical-measure terms at eta = 0, and
/// the variant with entropy-bias terms when eta > 0.
BoundResult theoretical_error_bound(const BoundInputs& inputs);

}  // namespace stot
