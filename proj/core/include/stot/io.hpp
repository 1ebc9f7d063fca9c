#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>

#include "stot/estimators.hpp"
#include "stot/joining.hpp"
#include "stot/markov.hpp"

namespace stot {

// JSON schemas for the artifact's file formats. Doubles round-trip exactly
// (shortest-representation printing), so export -> import is lossless.

nlohmann::json cost_to_json(const CostSpec& cost);
CostSpec cost_from_json(const nlohmann::json& j);
CostSpec load_cost(const std::filesystem::path& path);

nlohmann::json model_to_json(const MarkovModel& model);
MarkovModel model_from_json(const nlohmann::json& j);
MarkovModel load_model(const std::filesystem::path& path);

nlohmann::json plan_to_json(const TransportPlan& plan);
nlohmann::json plan_to_json(const EntropicPlan& plan);
TransportPlan plan_from_json(const nlohmann::json& j);

nlohmann::json joining_to_json(const BlockJoining& joining);
BlockJoining joining_from_json(const nlohmann::json& j);
BlockJoining load_joining(const std::filesystem::path& path);

nlohmann::json estimate_to_json(const EstimateResult& result);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace stot
