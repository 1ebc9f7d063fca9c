#include "stot/experiments.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "stot/io.hpp"
#include "stot/rng.hpp"
#include "stot/version.hpp"

namespace stot {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

struct Row {
  std::string cell;
  std::string rep;  // index, "mean" or "se"
  std::string n, k, g, eta;
  std::optional<double> value;
  std::string status = "ok";
  double seconds = 0.0;
  std::uint64_t cell_seed = 0;
};

struct CellResult {
  std::vector<Row> rows;
  bool ok = false;
  double seconds = 0.0;
};

ExperimentKind kind_from_string(const std::string& s) {
  if (s == "iid_rate") return ExperimentKind::iid_rate;
  if (s == "markov_rate") return ExperimentKind::markov_rate;
  if (s == "eta_sweep") return ExperimentKind::eta_sweep;
  if (s == "curve") return ExperimentKind::curve;
  if (s == "admissibility") return ExperimentKind::admissibility;
  if (s == "bound_check") return ExperimentKind::bound_check;
  throw std::invalid_argument("unknown experiment kind: " + s);
}

MarkovModel model_from_field(const json& j, const std::filesystem::path& base) {
  if (j.is_string()) {
    std::filesystem::path p = j.get<std::string>();
    if (p.is_relative()) p = base / p;
    return load_model(p);
  }
  return model_from_json(j);
}

CostSpec cost_from_field(const json& j, const std::filesystem::path& base,
                         const std::optional<MarkovModel>& model_x) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "hamming") {
      if (!model_x) {
        throw std::invalid_argument("hamming cost needs a model to take the alphabet from");
      }
      return hamming_cost(model_x->alphabet());
    }
    std::filesystem::path p = s;
    if (p.is_relative()) p = base / p;
    return load_cost(p);
  }
  return cost_from_json(j);
}

ScheduleRule schedule_from_json(const json& j, const ExperimentSpec& spec) {
  const std::string rule = j.at("rule").get<std::string>();
  if (rule == "fixed") return FixedK{j.at("k").get<int>()};
  if (rule == "entropy") {
    EntropyRule r;
    r.eps = j.value("eps", 0.1);
    if (j.contains("h_x")) {
      r.h_x = j.at("h_x").get<double>();
      r.h_y = j.value("h_y", r.h_x);
    } else if (spec.model_x) {
      r.h_x = entropy_rate(*spec.model_x);
      r.h_y = spec.model_y ? entropy_rate(*spec.model_y) : r.h_x;
    }
    return r;
  }
  if (rule == "markov") {
    MarkovRule r;
    r.alpha = j.value("alpha", 0.5);
    if (spec.model_x) {
      r.x_size = static_cast<std::int64_t>(spec.model_x->alphabet().size());
      r.y_size = spec.model_y ? static_cast<std::int64_t>(spec.model_y->alphabet().size())
                              : r.x_size;
    }
    if (j.contains("x_size")) r.x_size = j.at("x_size").get<std::int64_t>();
    if (j.contains("y_size")) r.y_size = j.at("y_size").get<std::int64_t>();
    if (j.contains("rho")) {
      r.rho = j.at("rho").get<double>();
    } else if (spec.model_x) {
      // Default rho: the largest second-eigenvalue modulus of the models.
      double rho = spec.model_x->second_eigenvalue_modulus();
      if (spec.model_y) rho = std::max(rho, spec.model_y->second_eigenvalue_modulus());
      r.rho = std::clamp(rho, 1e-9, 1.0 - 1e-9);
    }
    return r;
  }
  if (rule == "guard") {
    GuardRule r;
    r.p = j.value("p", 1.0);
    if (spec.model_x) {
      r.x_size = static_cast<std::int64_t>(spec.model_x->alphabet().size());
      r.y_size = spec.model_y ? static_cast<std::int64_t>(spec.model_y->alphabet().size())
                              : r.x_size;
    }
    if (j.contains("x_size")) r.x_size = j.at("x_size").get<std::int64_t>();
    if (j.contains("y_size")) r.y_size = j.at("y_size").get<std::int64_t>();
    return r;
  }
  throw std::invalid_argument("unknown schedule rule: " + rule);
}

int thread_count(const RunOptions& options, std::size_t cells) {
  int threads = options.threads;
  if (threads <= 0) {
    if (const char* env = std::getenv("STOT_THREADS")) threads = std::atoi(env);
  }
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 0) threads = 1;
  return std::min<int>(threads, static_cast<int>(std::max<std::size_t>(cells, 1)));
}

// Shared per-kind state prepared once before the pool runs.
struct Prepared {
  CostSpec cost;
  std::optional<double> iid_target;          // iid_rate
  std::optional<ScheduleRule> schedule;      // markov_rate / admissibility / bound_check
  std::optional<SymbolSequence> x_data, y_data;  // eta_sweep
};

std::vector<Row> aggregate_rows(const std::vector<Row>& rep_rows) {
  std::vector<double> values;
  for (const auto& r : rep_rows) {
    if (r.status == "ok" && r.value) values.push_back(*r.value);
  }
  if (values.empty()) return {};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const std::size_t r = values.size();
  const double se = r > 1 ? std::sqrt(var / static_cast<double>(r - 1) / static_cast<double>(r))
                          : 0.0;
  Row mean_row = rep_rows.front();
  mean_row.rep = "mean";
  mean_row.value = mean;
  mean_row.status = "ok";
  Row se_row = mean_row;
  se_row.rep = "se";
  se_row.value = se;
  return {std::move(mean_row), std::move(se_row)};
}

}  // namespace

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  const json j = read_json(path);
  const std::filesystem::path base = path.parent_path();

  ExperimentSpec spec;
  spec.kind = kind_from_string(j.at("kind").get<std::string>());
  spec.name = j.value("name", j.at("kind").get<std::string>());
  if (j.contains("model_x")) spec.model_x = model_from_field(j.at("model_x"), base);
  if (j.contains("model_y")) spec.model_y = model_from_field(j.at("model_y"), base);
  if (j.contains("x_path")) {
    std::filesystem::path p = j.at("x_path").get<std::string>();
    spec.x_path = p.is_relative() ? base / p : p;
  }
  if (j.contains("y_path")) {
    std::filesystem::path p = j.at("y_path").get<std::string>();
    spec.y_path = p.is_relative() ? base / p : p;
  }
  if (j.contains("cost")) spec.cost = cost_from_field(j.at("cost"), base, spec.model_x);
  if (j.contains("n_grid")) {
    spec.n_grid = j.at("n_grid").get<std::vector<std::int64_t>>();
    for (std::size_t i = 1; i < spec.n_grid.size(); ++i) {
      if (spec.n_grid[i] <= spec.n_grid[i - 1]) {
        throw std::invalid_argument("n_grid must be strictly increasing");
      }
    }
  }
  spec.reps = j.value("reps", 1);
  if (spec.reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (j.contains("etas")) spec.etas = j.at("etas").get<std::vector<double>>();
  spec.k = j.value("k", 1);
  spec.k_max = j.value("k_max", 8);
  spec.eta = j.value("eta", 0.0);
  spec.n = j.value("n", std::int64_t(10000));
  spec.p = j.value("p", 1.0);
  spec.c_constant = j.value("C", 1.0);
  spec.seed = j.value("seed", std::uint64_t(0));
  if (j.contains("schedule")) spec.schedule = schedule_from_json(j.at("schedule"), spec);
  return spec;
}

namespace {

Prepared prepare(const ExperimentSpec& spec) {
  std::optional<CostSpec> cost = spec.cost;
  if (!cost) {
    if (spec.model_x) {
      cost = hamming_cost(spec.model_x->alphabet());
    } else if (spec.x_path) {
      cost = hamming_cost(ingest_sequence(*spec.x_path).alphabet);
    } else {
      throw std::invalid_argument("experiment needs a cost, a model or a data path");
    }
  }
  Prepared prep{std::move(*cost), {}, {}, {}, {}};

  switch (spec.kind) {
    case ExperimentKind::iid_rate: {
      if (!spec.model_x || !spec.model_y) {
        throw std::invalid_argument("iid_rate needs model_x and model_y");
      }
      const BlockMeasure mu = exact_block_law(*spec.model_x, 1);
      const BlockMeasure nu = exact_block_law(*spec.model_y, 1);
      prep.iid_target =
          solve_ot(mu, nu, k_step_oracle(prep.cost)).cost_value;
      break;
    }
    case ExperimentKind::markov_rate:
    case ExperimentKind::admissibility:
    case ExperimentKind::bound_check: {
      if (!spec.model_x) throw std::invalid_argument("experiment needs model_x");
      if (spec.schedule) {
        prep.schedule = spec.schedule;
      } else {
        MarkovRule rule;
        rule.x_size = static_cast<std::int64_t>(spec.model_x->alphabet().size());
        rule.y_size = spec.model_y ? static_cast<std::int64_t>(spec.model_y->alphabet().size())
                                   : rule.x_size;
        double rho = spec.model_x->second_eigenvalue_modulus();
        if (spec.model_y) rho = std::max(rho, spec.model_y->second_eigenvalue_modulus());
        rule.rho = std::clamp(rho, 1e-9, 1.0 - 1e-9);
        prep.schedule = rule;
      }
      break;
    }
    case ExperimentKind::eta_sweep: {
      if (spec.x_path && spec.y_path) {
        prep.x_data = ingest_sequence(*spec.x_path);
        prep.y_data = ingest_sequence(*spec.y_path);
      } else if (spec.model_x && spec.model_y) {
        prep.x_data = sample(*spec.model_x, spec.n, Rng::stream(spec.seed, 0, 1).next_u64());
        prep.y_data = sample(*spec.model_y, spec.n, Rng::stream(spec.seed, 0, 2).next_u64());
      } else {
        throw std::invalid_argument("eta_sweep needs either data paths or two models");
      }
      break;
    }
    case ExperimentKind::curve:
      if (!spec.model_x || !spec.model_y) {
        throw std::invalid_argument("curve needs model_x and model_y");
      }
      break;
  }
  return prep;
}

CellResult run_cell(const ExperimentSpec& spec, const Prepared& prep, std::size_t cell) {
  CellResult result;
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t cell_seed = Rng::stream(spec.seed, 0x5707C311ULL, cell).next_u64();
  try {
    switch (spec.kind) {
      case ExperimentKind::iid_rate: {
        const std::int64_t n = spec.n_grid.at(cell);
        for (int rep = 0; rep < spec.reps; ++rep) {
          const SymbolSequence x =
              sample(*spec.model_x, n, Rng::stream(cell_seed, rep, 1).next_u64());
          const SymbolSequence y =
              sample(*spec.model_y, n, Rng::stream(cell_seed, rep, 2).next_u64());
          EstimatorConfig cfg;
          cfg.k = 1;
          const double est = estimate_oj(x, y, prep.cost, cfg).cost_estimate;
          Row row{std::to_string(cell), std::to_string(rep), std::to_string(n), "1", "0", "0",
                  std::abs(est - *prep.iid_target), "ok", 0.0, cell_seed};
          result.rows.push_back(std::move(row));
        }
        break;
      }
      case ExperimentKind::markov_rate: {
        const std::int64_t n = spec.n_grid.at(cell);
        const Schedule sched = k_schedule(n, *prep.schedule);
        for (int rep = 0; rep < spec.reps; ++rep) {
          const SymbolSequence x =
              sample(*spec.model_x, n, Rng::stream(cell_seed, rep, 1).next_u64());
          const SymbolSequence y =
              sample(*spec.model_y, n, Rng::stream(cell_seed, rep, 2).next_u64());
          EstimatorConfig cfg;
          cfg.k = sched.k;
          cfg.eta = spec.eta;
          const EstimateResult est = estimate_oj(x, y, prep.cost, cfg);
          Row row{std::to_string(cell),   std::to_string(rep),
                  std::to_string(n),      std::to_string(sched.k),
                  std::to_string(sched.g), fmt_double(spec.eta),
                  est.cost_estimate,      "ok",
                  0.0,                    cell_seed};
          auto it = est.diagnostics.find("sinkhorn_converged");
          if (it != est.diagnostics.end() && it->second == 0.0) {
            row.status = "sinkhorn_iteration_limit";
          }
          result.rows.push_back(std::move(row));
        }
        break;
      }
      case ExperimentKind::eta_sweep: {
        const double eta = spec.etas.at(cell);
        EstimatorConfig cfg;
        cfg.k = spec.k;
        cfg.eta = eta;
        const EstimateResult est = estimate_oj(*prep.x_data, *prep.y_data, prep.cost, cfg);
        Row row{std::to_string(cell),  "0", std::to_string(prep.x_data->size()),
                std::to_string(spec.k), "0", fmt_double(eta),
                est.cost_estimate,     "ok", 0.0, cell_seed};
        auto it = est.diagnostics.find("sinkhorn_converged");
        if (it != est.diagnostics.end() && it->second == 0.0) {
          row.status = "sinkhorn_iteration_limit";
        }
        result.rows.push_back(std::move(row));
        break;
      }
      case ExperimentKind::curve: {
        CurveOptions options;
        const auto curve =
            k_step_cost_curve(*spec.model_x, *spec.model_y, prep.cost, spec.k_max, spec.eta,
                              options);
        for (const auto& point : curve) {
          result.rows.push_back(Row{std::to_string(point.k), "0", "", std::to_string(point.k),
                                    "0", fmt_double(spec.eta), point.value, "ok", 0.0,
                                    cell_seed});
        }
        break;
      }
      case ExperimentKind::admissibility: {
        const std::int64_t n = spec.n_grid.at(cell);
        const Schedule sched = k_schedule(n, *prep.schedule);
        const CostSpec adapted = adapted_cost(prep.cost, Side::x);
        const BlockCost oracle = k_step_oracle(adapted);
        const BlockMeasure exact = exact_block_law(*spec.model_x, sched.k);
        for (int rep = 0; rep < spec.reps; ++rep) {
          const SymbolSequence seq =
              sample(*spec.model_x, n, Rng::stream(cell_seed, rep, 1).next_u64());
          const BlockMeasure empirical = empirical_block_measure(seq, sched.k);
          const double dist = solve_ot(empirical, exact, oracle).cost_value / sched.k;
          result.rows.push_back(Row{std::to_string(cell), std::to_string(rep),
                                    std::to_string(n), std::to_string(sched.k),
                                    std::to_string(sched.g), "0", dist, "ok", 0.0, cell_seed});
        }
        break;
      }
      case ExperimentKind::bound_check: {
        const std::int64_t n = spec.n_grid.at(cell);
        const Schedule sched = k_schedule(n, *prep.schedule);
        const MarkovModel& mx = *spec.model_x;
        const MarkovModel& my = spec.model_y ? *spec.model_y : mx;
        BoundInputs inputs;
        inputs.phi_x = [&mx](int g) { return phi_mixing(mx, g); };
        inputs.phi_y = [&my](int g) { return phi_mixing(my, g); };
        inputs.k = sched.k;
        inputs.g = sched.g;
        inputs.n = n;
        inputs.p = spec.p;
        inputs.c_constant = spec.c_constant;
        inputs.sup_cost = prep.cost.sup_norm();
        inputs.x_size = static_cast<std::int64_t>(mx.alphabet().size());
        inputs.y_size = static_cast<std::int64_t>(my.alphabet().size());
        inputs.eta = spec.eta;
        const BoundResult bound = theoretical_error_bound(inputs);
        result.rows.push_back(Row{std::to_string(cell), "0", std::to_string(n),
                                  std::to_string(sched.k), std::to_string(sched.g),
                                  fmt_double(spec.eta), bound.value,
                                  bound.vacuous ? "vacuous" : "ok", 0.0, cell_seed});
        break;
      }
    }
    result.ok = true;
  } catch (const std::exception& e) {
    Row row{std::to_string(cell), "0", "", "", "", "", std::nullopt,
            "error: " + sanitize(e.what()), 0.0, cell_seed};
    result.rows.assign(1, std::move(row));
    result.ok = false;
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::size_t cell_count(const ExperimentSpec& spec) {
  switch (spec.kind) {
    case ExperimentKind::iid_rate:
    case ExperimentKind::markov_rate:
    case ExperimentKind::admissibility:
    case ExperimentKind::bound_check:
      return spec.n_grid.size();
    case ExperimentKind::eta_sweep:
      return spec.etas.size();
    case ExperimentKind::curve:
      return 1;
  }
  return 0;
}

}  // namespace

RunSummary run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_csv,
                          const RunOptions& options) {
  const Prepared prep = prepare(spec);
  const std::size_t cells = cell_count(spec);
  if (cells == 0) throw std::invalid_argument("experiment has no cells (empty grid)");

  std::vector<CellResult> results(cells);
  const int threads = thread_count(options, cells);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t cell = next.fetch_add(1);
      if (cell >= cells) return;
      results[cell] = run_cell(spec, prep, cell);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::ofstream out(out_csv);
  if (!out) throw std::runtime_error("cannot open output file: " + out_csv.string());
  out << "experiment,cell,n,k,g,eta,rep,value,status,seconds,cell_seed,version\n";
  RunSummary summary;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const CellResult& res = results[cell];
    if (res.ok) {
      ++summary.cells_ok;
    } else {
      ++summary.cells_failed;
    }
    std::clog << "cell " << cell << ": " << (res.ok ? "ok" : "failed") << " ("
              << res.seconds << " s)\n";
    std::vector<Row> rows = res.rows;
    const auto agg = aggregate_rows(rows);
    rows.insert(rows.end(), agg.begin(), agg.end());
    for (const auto& row : rows) {
      out << sanitize(spec.name) << ',' << row.cell << ',' << row.n << ',' << row.k << ','
          << row.g << ',' << row.eta << ',' << row.rep << ','
          << (row.value ? fmt_double(*row.value) : std::string()) << ',' << row.status << ','
          << (options.timing ? fmt_double(res.seconds) : std::string()) << ','
          << row.cell_seed << ',' << kVersion << '\n';
    }
  }
  return summary;
}

}  // namespace stot
