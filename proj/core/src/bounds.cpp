#include "stot/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace stot {

BoundResult theoretical_error_bound(const BoundInputs& in) {
  if (in.k < 1 || in.g < 0 || in.n < in.k) {
    throw std::invalid_argument("bound inputs need k >= 1, g >= 0, n >= k");
  }
  if (in.p < 1.0 || in.p >= 2.0) {
    throw std::invalid_argument("summability exponent p must lie in [1, 2)");
  }
  if (in.c_constant <= 0.0 || in.sup_cost < 0.0 || in.eta < 0.0) {
    throw std::invalid_argument("bound inputs need C > 0, ||c|| >= 0, eta >= 0");
  }
  if (!in.phi_x || !in.phi_y) {
    throw std::invalid_argument("bound inputs need both phi coefficient callables");
  }

  const double k = static_cast<double>(in.k);
  const double g = static_cast<double>(in.g);
  const double phi_sum = in.phi_x(in.g + 1) + in.phi_y(in.g + 1);
  const double n_tail = std::pow(static_cast<double>(in.n), in.p / 2.0 - 1.0);
  const double root_x = std::pow(static_cast<double>(in.x_size), k / 2.0);
  const double root_y = std::pow(static_cast<double>(in.y_size), k / 2.0);

  BoundResult out;
  if (in.eta == 0.0) {
    out.value = in.sup_cost *
                (k * phi_sum / (k + g) + 3.0 * g / k +
                 in.c_constant * (root_x + root_y) * n_tail);
    return out;
  }

  const double log_x = std::log(static_cast<double>(in.x_size));
  const double log_y = std::log(static_cast<double>(in.y_size));
  const double u = in.c_constant * root_x * n_tail;
  const double v = in.c_constant * root_y * n_tail;
  if (u >= 1.0 || v >= 1.0) {
    out.vacuous = true;
  }
  const double mixing = in.sup_cost * phi_sum * k / (k + g);
  const double gap_term = (3.0 * in.sup_cost + 2.0 * in.eta * (log_x + log_y)) * g / k;
  // log(|X|^{3k} / u) expanded to stay finite for large k.
  const double u_term = u * (in.sup_cost / 2.0 + in.eta / k * (3.0 * k * log_x - std::log(u)));
  const double v_term = v * (in.sup_cost / 2.0 + in.eta / k * (3.0 * k * log_y - std::log(v)));
  out.value = mixing + gap_term + u_term + v_term;
  return out;
}

}  // namespace stot
