#pragma once

// Run configuration: JSON file <-> RunConfig, with defaults, unknown-key
// rejection and key=value overrides.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "motifrgc/graph.hpp"
#include "motifrgc/train.hpp"

namespace motifrgc {

struct RunConfig {
  TrainConfig train;
  std::string dataset;
  GraphFormat format = GraphFormat::kCanonical;
  std::string out_dir = "run";
  std::vector<std::uint64_t> seeds{0};
  std::uint64_t split_seed = 0;
  std::array<double, 3> edge_ratios{0.85, 0.05, 0.10};
  std::array<double, 3> node_ratios{0.6, 0.2, 0.2};
};

using Json = nlohmann::ordered_json;

Json to_json(const RunConfig& cfg);
/// Starts from defaults and applies every key of `j`; unknown keys and
/// ill-typed values raise ConfigError.
RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config(const std::filesystem::path& file);

/// Applies `key=value`; the value is parsed as JSON when possible and as a
/// plain string otherwise.
void apply_override(RunConfig& cfg, const std::string& assignment);

std::string format_name(GraphFormat format);

}  // namespace motifrgc
