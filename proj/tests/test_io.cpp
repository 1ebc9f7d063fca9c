#include <doctest.h>

#include "stot/io.hpp"
#include "stot/ot_entropic.hpp"
#include "stot/ot_exact.hpp"
#include "test_support.hpp"

using namespace stot;
using test_support::binary;

TEST_CASE("cost JSON round trip, nested and flat matrices") {
  Rng rng(91);
  const CostSpec cost(binary(), test_support::letters(3),
                      test_support::random_cost_matrix(rng, 2, 3, 2.0));
  const nlohmann::json j = cost_to_json(cost);
  const CostSpec back = cost_from_json(j);
  CHECK(back.x_alphabet() == cost.x_alphabet());
  CHECK(back.y_alphabet() == cost.y_alphabet());
  CHECK((back.matrix() - cost.matrix()).cwiseAbs().maxCoeff() == 0.0);

  // Flat row-major form parses to the same matrix.
  nlohmann::json flat = j;
  nlohmann::json values = nlohmann::json::array();
  for (const auto& row : j.at("matrix")) {
    for (const auto& v : row) values.push_back(v);
  }
  flat["matrix"] = values;
  CHECK((cost_from_json(flat).matrix() - cost.matrix()).cwiseAbs().maxCoeff() == 0.0);

  nlohmann::json wrong = j;
  wrong["matrix"] = {1.0, 2.0};
  CHECK_THROWS_AS(cost_from_json(wrong), std::invalid_argument);
}

TEST_CASE("model JSON round trip recomputes the stationary law when omitted") {
  const MarkovModel chain = test_support::symmetric_chain(0.3);
  nlohmann::json j = model_to_json(chain);
  const MarkovModel back = model_from_json(j);
  CHECK((back.transition() - chain.transition()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.stationary() - chain.stationary()).cwiseAbs().maxCoeff() <= 1e-12);

  j.erase("stationary");
  const MarkovModel recomputed = model_from_json(j);
  CHECK((recomputed.stationary() - chain.stationary()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("transport plan JSON keeps entries, value and duals") {
  Rng rng(92);
  const auto a = test_support::random_measure(rng, binary(), 2, 4);
  const auto b = test_support::random_measure(rng, binary(), 2, 3);
  const BlockCost oracle = k_step_oracle(hamming_cost(binary()));
  const TransportPlan plan = solve_ot(a, b, oracle);
  const TransportPlan back = plan_from_json(plan_to_json(plan));
  CHECK(back.cost_value == plan.cost_value);
  REQUIRE(back.entries.size() == plan.entries.size());
  for (std::size_t i = 0; i < plan.entries.size(); ++i) {
    CHECK(back.entries[i].row == plan.entries[i].row);
    CHECK(back.entries[i].col == plan.entries[i].col);
    CHECK(back.entries[i].mass == plan.entries[i].mass);
  }
  REQUIRE(back.dual_row);
  CHECK(*back.dual_row == *plan.dual_row);
  CHECK(dual_gap(back) == doctest::Approx(dual_gap(plan)).epsilon(1e-12));
}

TEST_CASE("entropic plan JSON carries the solver diagnostics") {
  Rng rng(93);
  const auto a = test_support::random_measure(rng, binary(), 2, 4);
  const auto b = test_support::random_measure(rng, binary(), 2, 4);
  const EntropicPlan plan =
      solve_entropic_ot(a, b, k_step_oracle(hamming_cost(binary())), 0.5);
  const nlohmann::json j = plan_to_json(plan);
  CHECK(j.at("eta") == 0.5);
  CHECK(j.at("converged") == true);
  CHECK(j.at("iterations").get<int>() == plan.iterations);
  CHECK(j.at("marginal_violation").get<double>() == plan.marginal_violation);
  CHECK(j.at("entries").size() == a.support_size() * b.support_size());
}
