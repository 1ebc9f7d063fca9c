#include "stot/io.hpp"

#include <fstream>

namespace stot {

namespace {

using nlohmann::json;

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                                 const char* what) {
  Eigen::MatrixXd m(rows, cols);
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array");
  if (!j.empty() && j.front().is_array()) {
    if (static_cast<Eigen::Index>(j.size()) != rows) {
      throw std::invalid_argument(std::string(what) + " has wrong row count");
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto& row = j[static_cast<std::size_t>(i)];
      if (static_cast<Eigen::Index>(row.size()) != cols) {
        throw std::invalid_argument(std::string(what) + " has wrong column count");
      }
      for (Eigen::Index c = 0; c < cols; ++c) {
        m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
      }
    }
    return m;
  }
  // Flat row-major.
  if (static_cast<Eigen::Index>(j.size()) != rows * cols) {
    throw std::invalid_argument(std::string(what) + " has wrong size");
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = j[static_cast<std::size_t>(i * cols + c)].get<double>();
    }
  }
  return m;
}

json block_to_json(const Block& block, const Alphabet& alphabet) {
  json out = json::array();
  for (SymbolId id : decode_block(block, alphabet.encoded_width())) {
    out.push_back(alphabet.token(id));
  }
  return out;
}

Block block_from_json(const json& j, const Alphabet& alphabet) {
  std::vector<SymbolId> ids;
  ids.reserve(j.size());
  for (const auto& tok : j) {
    const auto id = alphabet.find(tok.get<std::string>());
    if (!id) throw std::invalid_argument("unknown token in block: " + tok.get<std::string>());
    ids.push_back(*id);
  }
  return encode_block(ids, alphabet.encoded_width());
}

json measure_atoms_to_json(const BlockMeasure& m) {
  json out = json::array();
  for (const auto& atom : m.atoms()) {
    out.push_back({{"block", block_to_json(atom.block, m.alphabet())}, {"mass", atom.mass}});
  }
  return out;
}

BlockMeasure measure_from_atoms_json(const json& j, const Alphabet& alphabet, int k) {
  std::vector<BlockMeasure::Atom> atoms;
  atoms.reserve(j.size());
  for (const auto& e : j) {
    atoms.push_back({block_from_json(e.at("block"), alphabet), e.at("mass").get<double>()});
  }
  return BlockMeasure(alphabet, k, std::move(atoms));
}

}  // namespace

json cost_to_json(const CostSpec& cost) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < cost.matrix().rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < cost.matrix().cols(); ++j) row.push_back(cost.matrix()(i, j));
    rows.push_back(std::move(row));
  }
  return {{"x_tokens", cost.x_alphabet().tokens()},
          {"y_tokens", cost.y_alphabet().tokens()},
          {"matrix", std::move(rows)}};
}

CostSpec cost_from_json(const json& j) {
  Alphabet x(j.at("x_tokens").get<std::vector<std::string>>());
  Alphabet y(j.at("y_tokens").get<std::vector<std::string>>());
  Eigen::MatrixXd m =
      matrix_from_json(j.at("matrix"), static_cast<Eigen::Index>(x.size()),
                       static_cast<Eigen::Index>(y.size()), "cost matrix");
  return CostSpec(std::move(x), std::move(y), std::move(m));
}

CostSpec load_cost(const std::filesystem::path& path) { return cost_from_json(read_json(path)); }

json model_to_json(const MarkovModel& model) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < model.transition().rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < model.transition().cols(); ++j) {
      row.push_back(model.transition()(i, j));
    }
    rows.push_back(std::move(row));
  }
  json stationary = json::array();
  for (Eigen::Index i = 0; i < model.stationary().size(); ++i) {
    stationary.push_back(model.stationary()(i));
  }
  return {{"tokens", model.alphabet().tokens()},
          {"transition", std::move(rows)},
          {"stationary", std::move(stationary)}};
}

MarkovModel model_from_json(const json& j) {
  Alphabet alphabet(j.at("tokens").get<std::vector<std::string>>());
  const Eigen::Index n = static_cast<Eigen::Index>(alphabet.size());
  Eigen::MatrixXd p = matrix_from_json(j.at("transition"), n, n, "transition matrix");
  std::optional<Eigen::VectorXd> stationary;
  if (j.contains("stationary") && !j.at("stationary").is_null()) {
    const auto vec = j.at("stationary").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(vec.size()) != n) {
      throw std::invalid_argument("stationary vector has wrong size");
    }
    stationary = Eigen::Map<const Eigen::VectorXd>(vec.data(), n);
  }
  return MarkovModel(std::move(alphabet), std::move(p), std::move(stationary));
}

MarkovModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_json(path));
}

namespace {

json plan_common_json(const TransportPlan& plan) {
  json entries = json::array();
  for (const auto& e : plan.entries) {
    entries.push_back(
        {{"x_block", block_to_json(plan.row_measure.atoms()[static_cast<std::size_t>(e.row)].block,
                                   plan.row_measure.alphabet())},
         {"y_block", block_to_json(plan.col_measure.atoms()[static_cast<std::size_t>(e.col)].block,
                                   plan.col_measure.alphabet())},
         {"mass", e.mass}});
  }
  return {{"k", plan.row_measure.k()},
          {"x_tokens", plan.row_measure.alphabet().tokens()},
          {"y_tokens", plan.col_measure.alphabet().tokens()},
          {"x_atoms", measure_atoms_to_json(plan.row_measure)},
          {"y_atoms", measure_atoms_to_json(plan.col_measure)},
          {"entries", std::move(entries)},
          {"cost_value", plan.cost_value}};
}

}  // namespace

json plan_to_json(const TransportPlan& plan) {
  json out = plan_common_json(plan);
  if (plan.dual_row) out["dual_row"] = *plan.dual_row;
  if (plan.dual_col) out["dual_col"] = *plan.dual_col;
  return out;
}

json plan_to_json(const EntropicPlan& plan) {
  json out = plan_common_json(plan.as_transport_plan());
  out["eta"] = plan.eta;
  out["iterations"] = plan.iterations;
  out["marginal_violation"] = plan.marginal_violation;
  out["regularized_value"] = plan.regularized_value;
  out["potential_row"] = plan.potential_row;
  out["potential_col"] = plan.potential_col;
  out["converged"] = plan.status == SinkhornStatus::converged;
  return out;
}

TransportPlan plan_from_json(const json& j) {
  Alphabet x(j.at("x_tokens").get<std::vector<std::string>>());
  Alphabet y(j.at("y_tokens").get<std::vector<std::string>>());
  const int k = j.at("k").get<int>();
  BlockMeasure row = measure_from_atoms_json(j.at("x_atoms"), x, k);
  BlockMeasure col = measure_from_atoms_json(j.at("y_atoms"), y, k);
  TransportPlan plan{std::move(row), std::move(col), {}, j.at("cost_value").get<double>(),
                     std::nullopt, std::nullopt};
  for (const auto& e : j.at("entries")) {
    const Block xb = block_from_json(e.at("x_block"), plan.row_measure.alphabet());
    const Block yb = block_from_json(e.at("y_block"), plan.col_measure.alphabet());
    const auto r = plan.row_measure.find(xb);
    const auto c = plan.col_measure.find(yb);
    if (r < 0 || c < 0) throw std::invalid_argument("plan entry outside marginal support");
    plan.entries.push_back({static_cast<std::int32_t>(r), static_cast<std::int32_t>(c),
                            e.at("mass").get<double>()});
  }
  if (j.contains("dual_row")) plan.dual_row = j.at("dual_row").get<std::vector<double>>();
  if (j.contains("dual_col")) plan.dual_col = j.at("dual_col").get<std::vector<double>>();
  return plan;
}

json joining_to_json(const BlockJoining& joining) {
  // The coupling over the k-block coordinates carries the whole object;
  // the gap block is a point mass stored separately.
  BlockMeasure plan_measure = joining.plan_marginal();
  const BlockMeasure x_marginal =
      project_pair_measure(plan_measure, joining.x_alphabet(), joining.y_alphabet(), Side::x);
  const BlockMeasure y_marginal =
      project_pair_measure(plan_measure, joining.x_alphabet(), joining.y_alphabet(), Side::y);

  json entries = json::array();
  const int pw = plan_measure.width();
  const SymbolId y_size = static_cast<SymbolId>(joining.y_alphabet().size());
  for (const auto& atom : plan_measure.atoms()) {
    const auto ids = decode_block(atom.block, pw);
    std::vector<SymbolId> xs(ids.size()), ys(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      xs[i] = ids[i] / y_size;
      ys[i] = ids[i] % y_size;
    }
    entries.push_back(
        {{"x_block", block_to_json(encode_block(xs, joining.x_alphabet().encoded_width()),
                                   joining.x_alphabet())},
         {"y_block", block_to_json(encode_block(ys, joining.y_alphabet().encoded_width()),
                                   joining.y_alphabet())},
         {"mass", atom.mass}});
  }

  json plan_json{{"k", joining.k()},
                 {"x_tokens", joining.x_alphabet().tokens()},
                 {"y_tokens", joining.y_alphabet().tokens()},
                 {"x_atoms", measure_atoms_to_json(x_marginal)},
                 {"y_atoms", measure_atoms_to_json(y_marginal)},
                 {"entries", std::move(entries)},
                 {"cost_value", 0.0}};
  json out{{"k", joining.k()},
           {"g", joining.gap()},
           {"eta", joining.eta()},
           {"plan", std::move(plan_json)}};
  if (joining.gap_spec()) {
    out["gap_block"] = {
        {"x", block_to_json(joining.gap_spec()->x_block, joining.x_alphabet())},
        {"y", block_to_json(joining.gap_spec()->y_block, joining.y_alphabet())}};
  }
  return out;
}

BlockJoining joining_from_json(const json& j) {
  TransportPlan plan = plan_from_json(j.at("plan"));
  std::optional<GapSpec> gap;
  if (j.contains("gap_block")) {
    gap = GapSpec{block_from_json(j.at("gap_block").at("x"), plan.row_measure.alphabet()),
                  block_from_json(j.at("gap_block").at("y"), plan.col_measure.alphabet())};
  }
  return BlockJoining::from_plan(plan, std::move(gap), j.value("eta", 0.0));
}

BlockJoining load_joining(const std::filesystem::path& path) {
  return joining_from_json(read_json(path));
}

json estimate_to_json(const EstimateResult& result) {
  return {{"cost_estimate", result.cost_estimate},
          {"k_used", result.k_used},
          {"n_x", result.n_x},
          {"n_y", result.n_y},
          {"eta", result.eta},
          {"diagnostics", result.diagnostics}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open JSON file: " + path.string());
  json j;
  in >> j;
  return j;
}

}  // namespace stot
