#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "stot/experiments.hpp"
#include "stot/io.hpp"
#include "test_support.hpp"

using namespace stot;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path write_spec(const std::string& name, const nlohmann::json& j) {
  const auto path = temp_file(name);
  std::ofstream out(path);
  out << j.dump(2);
  return path;
}

nlohmann::json iid_model_json(double p1) {
  return model_to_json(test_support::bernoulli(p1));
}

}  // namespace

TEST_CASE("iid_rate experiment writes per-rep rows plus aggregates") {
  nlohmann::json spec{{"kind", "iid_rate"},
                      {"model_x", iid_model_json(0.2)},
                      {"model_y", iid_model_json(0.7)},
                      {"cost", "hamming"},
                      {"n_grid", {100, 1000}},
                      {"reps", 4},
                      {"seed", 9}};
  const auto spec_path = write_spec("stot_exp_iid.json", spec);
  const auto out_path = temp_file("stot_exp_iid.csv");
  const RunSummary summary = run_experiment(load_experiment_spec(spec_path), out_path);
  CHECK(summary.cells_ok == 2);
  CHECK(summary.cells_failed == 0);

  const std::string csv = slurp(out_path);
  CHECK(csv.rfind("experiment,cell,n,k,g,eta,rep,value,status,seconds,cell_seed,version", 0) ==
        0);
  // 2 cells x (4 reps + mean + se).
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 6);
  CHECK(csv.find(",mean,") != std::string::npos);
  CHECK(csv.find(",se,") != std::string::npos);
}

TEST_CASE("experiment CSV output is byte-identical across runs") {
  nlohmann::json spec{{"kind", "markov_rate"},
                      {"model_x", model_to_json(test_support::symmetric_chain(0.3))},
                      {"model_y", model_to_json(test_support::symmetric_chain(0.45))},
                      {"cost", "hamming"},
                      {"n_grid", {200, 2000}},
                      {"reps", 3},
                      {"schedule", {{"rule", "markov"}, {"alpha", 0.5}, {"rho", 0.4}}},
                      {"seed", 123}};
  const auto spec_path = write_spec("stot_exp_markov.json", spec);
  const auto out1 = temp_file("stot_exp_markov1.csv");
  const auto out2 = temp_file("stot_exp_markov2.csv");
  run_experiment(load_experiment_spec(spec_path), out1);
  run_experiment(load_experiment_spec(spec_path), out2);
  const std::string first = slurp(out1);
  CHECK(!first.empty());
  CHECK(first == slurp(out2));
  // Thread count must not change the bytes either.
  RunOptions options;
  options.threads = 2;
  const auto out3 = temp_file("stot_exp_markov3.csv");
  run_experiment(load_experiment_spec(spec_path), out3, options);
  CHECK(first == slurp(out3));
}

TEST_CASE("curve experiment is a pass-through of the library curve") {
  nlohmann::json spec{{"kind", "curve"},
                      {"model_x", model_to_json(test_support::bernoulli(0.5))},
                      {"model_y", model_to_json(test_support::alternating_chain())},
                      {"cost", "hamming"},
                      {"k_max", 6},
                      {"eta", 0.0}};
  const auto spec_path = write_spec("stot_exp_curve.json", spec);
  const auto out_path = temp_file("stot_exp_curve.csv");
  run_experiment(load_experiment_spec(spec_path), out_path);

  const auto curve = k_step_cost_curve(test_support::bernoulli(0.5),
                                       test_support::alternating_chain(),
                                       hamming_cost(test_support::binary()), 6, 0.0);
  const std::string csv = slurp(out_path);
  std::size_t matched = 0;
  std::stringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  while (std::getline(lines, line)) {
    std::vector<std::string> cols;
    std::stringstream row(line);
    std::string col;
    while (std::getline(row, col, ',')) cols.push_back(col);
    if (cols[6] != "0") continue;  // only per-rep rows
    const int k = std::stoi(cols[3]);
    const double value = std::stod(cols[7]);
    CHECK(value == doctest::Approx(curve[static_cast<std::size_t>(k - 1)].value).epsilon(1e-15));
    ++matched;
  }
  CHECK(matched == 6);
}

TEST_CASE("eta_sweep is nondecreasing as eta decreases") {
  nlohmann::json spec{{"kind", "eta_sweep"},
                      {"model_x", model_to_json(test_support::symmetric_chain(0.3))},
                      {"model_y", model_to_json(test_support::symmetric_chain(0.45))},
                      {"cost", "hamming"},
                      {"etas", {1.0, 0.3, 0.1, 0.03}},
                      {"k", 4},
                      {"n", 2000},
                      {"seed", 77}};
  const auto spec_path = write_spec("stot_exp_eta.json", spec);
  const auto out_path = temp_file("stot_exp_eta.csv");
  const RunSummary summary = run_experiment(load_experiment_spec(spec_path), out_path);
  CHECK(summary.cells_ok == 4);

  std::vector<double> values;
  std::stringstream lines(slurp(out_path));
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    std::vector<std::string> cols;
    std::stringstream row(line);
    std::string col;
    while (std::getline(row, col, ',')) cols.push_back(col);
    if (cols[6] == "0") values.push_back(std::stod(cols[7]));
  }
  REQUIRE(values.size() == 4);
  for (std::size_t i = 1; i < values.size(); ++i) CHECK(values[i] >= values[i - 1] - 1e-9);
}

TEST_CASE("bound_check emits schedule-driven bound values") {
  nlohmann::json spec{{"kind", "bound_check"},
                      {"model_x", model_to_json(test_support::symmetric_chain(0.3))},
                      {"model_y", model_to_json(test_support::symmetric_chain(0.45))},
                      {"cost", "hamming"},
                      {"n_grid", {10000, 1000000}},
                      {"schedule", {{"rule", "markov"}, {"alpha", 0.5}, {"rho", 0.4}}},
                      {"p", 1.0},
                      {"C", 1.0}};
  const auto spec_path = write_spec("stot_exp_bound.json", spec);
  const auto out_path = temp_file("stot_exp_bound.csv");
  const RunSummary summary = run_experiment(load_experiment_spec(spec_path), out_path);
  CHECK(summary.cells_ok == 2);
  const std::string csv = slurp(out_path);
  CHECK(csv.find("error") == std::string::npos);
}

TEST_CASE("invalid specs are rejected") {
  nlohmann::json spec{{"kind", "iid_rate"},
                      {"model_x", iid_model_json(0.2)},
                      {"model_y", iid_model_json(0.7)},
                      {"n_grid", {1000, 100}}};
  const auto spec_path = write_spec("stot_exp_bad.json", spec);
  CHECK_THROWS_AS(load_experiment_spec(spec_path), std::invalid_argument);

  nlohmann::json unknown{{"kind", "mystery"}};
  const auto unknown_path = write_spec("stot_exp_unknown.json", unknown);
  CHECK_THROWS_AS(load_experiment_spec(unknown_path), std::invalid_argument);
}

TEST_CASE("failing cells are recorded without failing the whole run") {
  // n_grid smaller than k forces a per-cell error in the first cell only.
  nlohmann::json spec{{"kind", "markov_rate"},
                      {"model_x", model_to_json(test_support::symmetric_chain(0.3))},
                      {"model_y", model_to_json(test_support::symmetric_chain(0.45))},
                      {"cost", "hamming"},
                      {"n_grid", {2, 500}},
                      {"reps", 2},
                      {"schedule", {{"rule", "fixed"}, {"k", 4}}},
                      {"seed", 5}};
  const auto spec_path = write_spec("stot_exp_partial.json", spec);
  const auto out_path = temp_file("stot_exp_partial.csv");
  const RunSummary summary = run_experiment(load_experiment_spec(spec_path), out_path);
  CHECK(summary.cells_ok == 1);
  CHECK(summary.cells_failed == 1);
  const std::string csv = slurp(out_path);
  CHECK(csv.find("error: k exceeds sequence length") != std::string::npos);
}
