// stot: estimation of stationary optimal transport plans from observed
// sequences. Subcommands: estimate, dbar, sample, curve, bound, experiment,
// export-joining. Exit codes: 0 success, 1 computational error, 2 usage.

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "stot/bounds.hpp"
#include "stot/curves.hpp"
#include "stot/estimators.hpp"
#include "stot/experiments.hpp"
#include "stot/io.hpp"
#include "stot/version.hpp"

namespace {

using nlohmann::json;
using namespace stot;

// JSON config files mirror the command line flags: flat keys apply to the
// invoked subcommand ({"x": "a.txt", "k": "6"}); a nested object keyed by
// the subcommand name works too ({"dbar": {...}}). Explicit flags win.
// Expansion happens before CLI11 parses, by appending --key=value tokens
// for keys not already present.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw std::invalid_argument("cannot open config file: " + config_path);
  json j;
  in >> j;
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");

  const auto scalar = [](const json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  };
  const auto has_flag = [&args](const std::string& name) {
    const std::string flag = "--" + name;
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  const auto apply = [&](const json& section) {
    for (const auto& [key, value] : section.items()) {
      if (value.is_object() || key == "config" || has_flag(key)) continue;
      if (value.is_boolean()) {
        if (value.get<bool>()) args.push_back("--" + key);
      } else {
        args.push_back("--" + key + "=" + scalar(value));
      }
    }
  };
  for (const auto& [key, value] : j.items()) {
    if (value.is_object()) {
      // Subcommand section: apply only when that subcommand was invoked.
      if (std::find(args.begin(), args.end(), key) != args.end()) apply(value);
    }
  }
  apply(j);
  return args;
}

ScheduleRule parse_k_rule(const std::string& text, std::int64_t x_size, std::int64_t y_size) {
  if (text.find(':') == std::string::npos) {
    try {
      return FixedK{std::stoi(text)};
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse --k value: " + text);
    }
  }
  const auto colon = text.find(':');
  const std::string rule = text.substr(0, colon);
  std::map<std::string, double> kv;
  std::string rest = text.substr(colon + 1);
  std::stringstream ss(rest);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("rule parameters must look like name=value: " + part);
    }
    kv[part.substr(0, eq)] = std::stod(part.substr(eq + 1));
  }
  auto take = [&kv](const std::string& name, std::optional<double> fallback = {}) {
    auto it = kv.find(name);
    if (it != kv.end()) return it->second;
    if (fallback) return *fallback;
    throw std::invalid_argument("rule is missing parameter " + name);
  };
  if (rule == "markov") {
    MarkovRule r;
    r.alpha = take("alpha", 0.5);
    r.rho = take("rho");
    r.x_size = x_size;
    r.y_size = y_size;
    return r;
  }
  if (rule == "entropy") {
    EntropyRule r;
    r.eps = take("eps", 0.1);
    r.h_x = take("hx");
    r.h_y = take("hy", r.h_x);
    return r;
  }
  if (rule == "guard") {
    GuardRule r;
    r.p = take("p", 1.0);
    r.x_size = x_size;
    r.y_size = y_size;
    return r;
  }
  throw std::invalid_argument("unknown schedule rule: " + rule);
}

// Remaps both sequences onto the union alphabet (x tokens first, then the
// unseen y tokens) so that sequences read without an explicit alphabet can
// share a Hamming cost.
void harmonize_alphabets(SymbolSequence& x, SymbolSequence& y) {
  std::vector<std::string> tokens = x.alphabet.tokens();
  for (const auto& t : y.alphabet.tokens()) {
    if (std::find(tokens.begin(), tokens.end(), t) == tokens.end()) tokens.push_back(t);
  }
  Alphabet merged(std::move(tokens));
  auto remap = [&merged](SymbolSequence& seq) {
    std::vector<SymbolId> map(seq.alphabet.size());
    for (SymbolId id = 0; id < seq.alphabet.size(); ++id) {
      map[id] = *merged.find(seq.alphabet.token(id));
    }
    for (auto& id : seq.data) id = map[id];
    seq.alphabet = merged;
  };
  remap(x);
  remap(y);
}

struct EstimateArgs {
  std::string x_path, y_path, cost = "hamming", k = "1";
  std::string alphabet_x, alphabet_y;
  double eta = 0.0;
  double tol = 1e-9;
  int max_iter = 1000000;
  std::uint64_t seed = 0;
  std::string out, export_joining, format = "json";
};

void add_estimate_options(CLI::App* cmd, EstimateArgs& args, bool with_eta = true) {
  cmd->add_option("--x", args.x_path, "X sequence file (whitespace-separated tokens)")
      ->required();
  cmd->add_option("--y", args.y_path, "Y sequence file")->required();
  cmd->add_option("--alphabet-x", args.alphabet_x, "optional X alphabet file (token per line)");
  cmd->add_option("--alphabet-y", args.alphabet_y, "optional Y alphabet file");
  cmd->add_option("--k", args.k,
                  "block length: an integer or a rule "
                  "(markov:alpha=A,rho=R | entropy:eps=E,hx=H[,hy=H] | guard:p=P)");
  if (with_eta) {
    cmd->add_option("--eta", args.eta, "entropy regularization coefficient (0 = exact)");
    cmd->add_option("--tol", args.tol, "Sinkhorn marginal tolerance");
    cmd->add_option("--max-iter", args.max_iter, "Sinkhorn iteration cap");
  }
  cmd->add_option("--seed", args.seed, "RNG seed recorded with the output");
  cmd->add_option("--out", args.out, "write the result JSON here (default: stdout)");
  cmd->add_option("--format", args.format, "output format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
}

EstimateResult run_estimate(const EstimateArgs& args) {
  std::optional<Alphabet> ax, ay;
  if (!args.alphabet_x.empty()) ax = load_alphabet(args.alphabet_x);
  if (!args.alphabet_y.empty()) ay = load_alphabet(args.alphabet_y);

  std::optional<CostSpec> cost;
  if (args.cost != "hamming") {
    cost = load_cost(args.cost);
    // A cost file pins the alphabets; sequences are read against them.
    if (!ax) ax = cost->x_alphabet();
    if (!ay) ay = cost->y_alphabet();
  }
  SymbolSequence x = ingest_sequence(args.x_path, ax);
  SymbolSequence y = ingest_sequence(args.y_path, ay);
  if (!cost) {
    if (x.alphabet != y.alphabet) harmonize_alphabets(x, y);
    cost = hamming_cost(x.alphabet);
  } else if (cost->x_alphabet() != x.alphabet || cost->y_alphabet() != y.alphabet) {
    throw std::invalid_argument("cost alphabets do not match the sequences");
  }

  const ScheduleRule rule = parse_k_rule(args.k, static_cast<std::int64_t>(x.alphabet.size()),
                                         static_cast<std::int64_t>(y.alphabet.size()));
  const Schedule sched = k_schedule(std::min(x.size(), y.size()), rule);

  EstimatorConfig cfg;
  cfg.k = sched.k;
  cfg.eta = args.eta;
  cfg.solver = args.eta > 0 ? SolverKind::entropic : SolverKind::exact;
  cfg.sinkhorn_tol = args.tol;
  cfg.sinkhorn_max_iter = args.max_iter;
  cfg.rng_seed = args.seed;
  return estimate_oj(x, y, *cost, cfg);
}

void emit(const json& j, const std::string& out, const std::string& format) {
  std::string text;
  if (format == "csv") {
    std::string header, row;
    for (const auto& [key, value] : j.items()) {
      if (value.is_object() || value.is_array()) continue;
      header += header.empty() ? key : "," + key;
      const std::string cell = value.is_string() ? value.get<std::string>() : value.dump();
      row += row.empty() ? cell : "," + cell;
    }
    text = header + "\n" + row + "\n";
  } else {
    text = j.dump(2) + "\n";
  }
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open output file: " + out);
    f << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stot: optimal joinings of stationary processes from observed sequences"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // estimate / dbar / export-joining share their argument block.
  EstimateArgs est_args;
  auto* estimate_cmd =
      app.add_subcommand("estimate", "estimate the optimal joining cost of two sequences");
  add_estimate_options(estimate_cmd, est_args);

  EstimateArgs dbar_args;
  auto* dbar_cmd = app.add_subcommand("dbar", "d-bar distance estimate (Hamming cost, eta=0)");
  dbar_cmd->add_option("--x", dbar_args.x_path, "X sequence file")->required();
  dbar_cmd->add_option("--y", dbar_args.y_path, "Y sequence file")->required();
  dbar_cmd->add_option("--alphabet-x", dbar_args.alphabet_x, "optional X alphabet file");
  dbar_cmd->add_option("--alphabet-y", dbar_args.alphabet_y, "optional Y alphabet file");
  dbar_cmd->add_option("--k", dbar_args.k, "block length (integer or rule)");
  dbar_cmd->add_option("--seed", dbar_args.seed, "RNG seed recorded with the output");
  dbar_cmd->add_option("--format", dbar_args.format, "output format: plain, json or csv")
      ->check(CLI::IsMember({"plain", "json", "csv"}));
  dbar_args.format = "plain";

  EstimateArgs export_args;
  auto* export_cmd =
      app.add_subcommand("export-joining", "estimate and write the block joining as JSON");
  add_estimate_options(export_cmd, export_args);
  export_cmd->get_option("--out")->required();

  // sample ------------------------------------------------------------------
  struct {
    std::string model, joining;
    std::int64_t n = 1000;
    std::uint64_t seed = 0;
    std::string out, out_x, out_y;
  } sample_args;
  auto* sample_cmd = app.add_subcommand("sample", "sample a model or a joining trajectory");
  auto* sm = sample_cmd->add_option("--model", sample_args.model, "Markov model JSON");
  auto* sj = sample_cmd->add_option("--joining", sample_args.joining, "joining JSON");
  sm->excludes(sj);
  sample_cmd->add_option("--n,--length", sample_args.n, "sequence length")->required();
  sample_cmd->add_option("--seed", sample_args.seed, "RNG seed");
  sample_cmd->add_option("--out", sample_args.out, "output token file (model sampling)");
  sample_cmd->add_option("--out-x", sample_args.out_x, "X-side output (joining sampling)");
  sample_cmd->add_option("--out-y", sample_args.out_y, "Y-side output (joining sampling)");

  // curve ---------------------------------------------------------------
  struct {
    std::string model_x, model_y, cost = "hamming";
    int k_max = 8;
    double eta = 0.0;
    std::string out, format = "csv";
  } curve_args;
  auto* curve_cmd =
      app.add_subcommand("curve", "exact average k-step transport cost curve of two models");
  curve_cmd->add_option("--model-x", curve_args.model_x, "X model JSON")->required();
  curve_cmd->add_option("--model-y", curve_args.model_y, "Y model JSON")->required();
  curve_cmd->add_option("--cost", curve_args.cost, "cost JSON file or 'hamming'");
  curve_cmd->add_option("--k-max", curve_args.k_max, "largest block length");
  curve_cmd->add_option("--eta", curve_args.eta, "entropy regularization coefficient");
  curve_cmd->add_option("--out", curve_args.out, "output file (default: stdout)");
  curve_cmd->add_option("--format", curve_args.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  // bound -----------------------------------------------------------------
  struct {
    std::string phi_model, phi_model_y, cost;
    int k = 1, g = 0;
    std::int64_t n = 1000;
    double p = 1.0, c_constant = 1.0, eta = 0.0;
    std::string format = "plain";
  } bound_args;
  auto* bound_cmd =
      app.add_subcommand("bound", "evaluate the finite-sample error bound for a model pair");
  bound_cmd->add_option("--phi-model", bound_args.phi_model, "model JSON for the phi coefficients")
      ->required();
  bound_cmd->add_option("--phi-model-y", bound_args.phi_model_y,
                        "optional second model (defaults to --phi-model)");
  bound_cmd->add_option("--cost", bound_args.cost, "cost JSON (default: Hamming, sup norm 1)");
  bound_cmd->add_option("--k", bound_args.k, "block length")->required();
  bound_cmd->add_option("--g", bound_args.g, "gap length");
  bound_cmd->add_option("--n", bound_args.n, "sample size")->required();
  bound_cmd->add_option("--p", bound_args.p, "summability exponent in [1, 2)");
  bound_cmd->add_option("--C", bound_args.c_constant, "bound constant C");
  bound_cmd->add_option("--eta", bound_args.eta, "entropy regularization coefficient");
  bound_cmd->add_option("--format", bound_args.format, "plain or json")
      ->check(CLI::IsMember({"plain", "json"}));

  // experiment ------------------------------------------------------------
  struct {
    std::string spec, out;
    bool timing = false;
    int threads = 0;
    std::optional<std::uint64_t> seed;
  } exp_args;
  auto* experiment_cmd = app.add_subcommand("experiment", "run an experiment spec to CSV");
  experiment_cmd->add_option("--spec", exp_args.spec, "experiment spec JSON")->required();
  experiment_cmd->add_option("--out", exp_args.out, "output CSV path")->required();
  experiment_cmd->add_flag("--timing", exp_args.timing,
                           "fill the seconds column (off keeps outputs byte-identical)");
  experiment_cmd->add_option("--threads", exp_args.threads,
                             "worker threads (default: STOT_THREADS or hardware)");
  experiment_cmd->add_option("--seed", exp_args.seed, "override the spec's RNG seed");

  // Every subcommand takes a JSON config whose keys mirror its flags.
  static std::string config_path_sink;
  for (CLI::App* sub : app.get_subcommands({})) {
    sub->add_option("--config", config_path_sink,
                    "JSON config file mirroring this subcommand's flags");
  }

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (estimate_cmd->parsed()) {
      const EstimateResult result = run_estimate(est_args);
      json j = estimate_to_json(result);
      j["version"] = kVersion;
      j["seed"] = est_args.seed;
      if (!est_args.export_joining.empty()) {
        write_json(est_args.export_joining, joining_to_json(result.joining));
      }
      emit(j, est_args.out, est_args.format);
      const auto it = result.diagnostics.find("sinkhorn_converged");
      if (it != result.diagnostics.end() && it->second == 0.0) {
        std::cerr << "sinkhorn did not converge within --max-iter\n";
        return 1;
      }
      return 0;
    }
    if (dbar_cmd->parsed()) {
      dbar_args.eta = 0.0;
      dbar_args.cost = "hamming";
      const EstimateResult result = run_estimate(dbar_args);
      if (dbar_args.format == "plain") {
        std::cout << std::setprecision(17) << result.cost_estimate << "\n";
      } else {
        emit(json{{"dbar", result.cost_estimate},
                  {"k_used", result.k_used},
                  {"n_x", result.n_x},
                  {"n_y", result.n_y},
                  {"version", kVersion}},
             dbar_args.out, dbar_args.format);
      }
      return 0;
    }
    if (export_cmd->parsed()) {
      const EstimateResult result = run_estimate(export_args);
      write_json(export_args.out, joining_to_json(result.joining));
      return 0;
    }
    if (sample_cmd->parsed()) {
      if (!sample_args.model.empty()) {
        const MarkovModel model = load_model(sample_args.model);
        const SymbolSequence seq = sample(model, sample_args.n, sample_args.seed);
        if (sample_args.out.empty()) {
          for (std::size_t i = 0; i < seq.data.size(); ++i) {
            std::cout << (i ? " " : "") << seq.alphabet.token(seq.data[i]);
          }
          std::cout << "\n";
        } else {
          write_sequence(sample_args.out, seq);
        }
        return 0;
      }
      if (sample_args.joining.empty()) {
        std::cerr << "sample needs --model or --joining\n";
        return 2;
      }
      const BlockJoining joining = load_joining(sample_args.joining);
      const auto [xs, ys] = sample_trajectory(joining, sample_args.n, sample_args.seed);
      if (!sample_args.out_x.empty()) write_sequence(sample_args.out_x, xs);
      if (!sample_args.out_y.empty()) write_sequence(sample_args.out_y, ys);
      if (sample_args.out_x.empty() && sample_args.out_y.empty()) {
        for (std::size_t i = 0; i < xs.data.size(); ++i) {
          std::cout << (i ? " " : "") << xs.alphabet.token(xs.data[i]);
        }
        std::cout << "\n";
      }
      return 0;
    }
    if (curve_cmd->parsed()) {
      const MarkovModel mx = load_model(curve_args.model_x);
      const MarkovModel my = load_model(curve_args.model_y);
      CostSpec cost = curve_args.cost == "hamming"
                          ? hamming_cost(mx.alphabet())
                          : load_cost(curve_args.cost);
      const auto curve = k_step_cost_curve(mx, my, cost, curve_args.k_max, curve_args.eta);
      std::ostringstream text;
      if (curve_args.format == "csv") {
        text << "k,value\n";
        text << std::setprecision(17);
        for (const auto& p : curve) text << p.k << ',' << p.value << '\n';
      } else {
        json arr = json::array();
        for (const auto& p : curve) arr.push_back({{"k", p.k}, {"value", p.value}});
        text << json{{"eta", curve_args.eta}, {"curve", arr}}.dump(2) << '\n';
      }
      if (curve_args.out.empty()) {
        std::cout << text.str();
      } else {
        std::ofstream f(curve_args.out);
        if (!f) throw std::runtime_error("cannot open output file: " + curve_args.out);
        f << text.str();
      }
      return 0;
    }
    if (bound_cmd->parsed()) {
      const MarkovModel mx = load_model(bound_args.phi_model);
      const MarkovModel my =
          bound_args.phi_model_y.empty() ? mx : load_model(bound_args.phi_model_y);
      BoundInputs inputs;
      inputs.phi_x = [&mx](int g) { return phi_mixing(mx, g); };
      inputs.phi_y = [&my](int g) { return phi_mixing(my, g); };
      inputs.k = bound_args.k;
      inputs.g = bound_args.g;
      inputs.n = bound_args.n;
      inputs.p = bound_args.p;
      inputs.c_constant = bound_args.c_constant;
      inputs.sup_cost =
          bound_args.cost.empty() ? 1.0 : load_cost(bound_args.cost).sup_norm();
      inputs.x_size = static_cast<std::int64_t>(mx.alphabet().size());
      inputs.y_size = static_cast<std::int64_t>(my.alphabet().size());
      inputs.eta = bound_args.eta;
      const BoundResult bound = theoretical_error_bound(inputs);
      if (bound.vacuous) std::cerr << "bound vacuous: u(k, n) or v(k, n) is >= 1\n";
      if (bound_args.format == "plain") {
        std::cout << std::setprecision(17) << bound.value << "\n";
      } else {
        std::cout << json{{"value", bound.value}, {"vacuous", bound.vacuous}}.dump(2) << "\n";
      }
      return 0;
    }
    if (experiment_cmd->parsed()) {
      ExperimentSpec spec = load_experiment_spec(exp_args.spec);
      if (exp_args.seed) spec.seed = *exp_args.seed;
      RunOptions options;
      options.timing = exp_args.timing;
      options.threads = exp_args.threads;
      const RunSummary summary = run_experiment(spec, exp_args.out, options);
      std::cerr << "cells ok: " << summary.cells_ok << ", failed: " << summary.cells_failed
                << "\n";
      return summary.cells_ok == 0 ? 1 : 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
