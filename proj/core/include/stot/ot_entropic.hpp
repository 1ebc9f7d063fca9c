#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stot/transport_plan.hpp"

namespace stot {

enum class SinkhornStatus { converged, iteration_limit };

struct SinkhornOptions {
  /// Convergence threshold on the max of the two L1 marginal violations.
  double tol = 1e-9;
  int max_iter = 1000000;
  /// Anneal eta down from ~cost scale; greatly reduces iterations when the
  /// target eta is small relative to the cost range.
  bool epsilon_scaling = true;
  /// Optional initial potentials (f, g), e.g. duals of the unregularized
  /// problem. Disables epsilon scaling.
  std::optional<std::pair<std::vector<double>, std::vector<double>>> warm_start;
  /// Keep the dense plan matrix in the result. Value-only callers can turn
  /// this off to stay within memory on large supports.
  bool want_plan = true;
  std::int64_t max_cells = static_cast<std::int64_t>(20000) * 20000;
};

/// Solution of the eta-regularized transport problem
///   T^eta(a, b) = min over couplings of  <c, pi> - eta H(pi).
/// Entropic plans are fully supported on support(a) x support(b).
struct EntropicPlan {
  BlockMeasure row_measure;
  BlockMeasure col_measure;
  std::optional<Eigen::MatrixXd> plan;  // rows x cols, strictly positive
  double eta = 0.0;
  double transport_cost = 0.0;     // integral of c d(pi)
  double plan_entropy = 0.0;       // H(pi), nats
  double regularized_value = 0.0;  // transport_cost - eta * plan_entropy
  std::vector<double> potential_row;  // f
  std::vector<double> potential_col;  // g
  int iterations = 0;
  double marginal_violation = 0.0;
  SinkhornStatus status = SinkhornStatus::converged;

  /// Sparse view of the dense plan (requires want_plan).
  TransportPlan as_transport_plan() const;
};

/// Log-domain Sinkhorn scaling. Non-convergence within max_iter is reported
/// through `status`, not an exception.
EntropicPlan solve_entropic_ot(const BlockMeasure& a, const BlockMeasure& b,
                               const BlockCost& cost, double eta,
                               const SinkhornOptions& options = {});

/// (c,eta)-transform of a column potential:
///   g~(u) = -eta log sum_v exp((g(v) - c(u, v)) / eta),
/// evaluated in log-sum-exp-stable form. `cost` is the dense matrix over
/// (row, col) supports.
std::vector<double> c_eta_transform(std::span<const double> g, const Eigen::MatrixXd& cost,
                                    double eta);

/// Semidual objective at a column potential g:
///   sum_u a(u) (eta log a(u) + g~(u)) + sum_v b(v) g(v).
/// At the solver's converged potentials this matches regularized_value.
double semidual_value(const BlockMeasure& a, const BlockMeasure& b,
                      std::span<const double> g, const BlockCost& cost, double eta);

}  // namespace stot
