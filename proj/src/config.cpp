#include "motifrgc/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "motifrgc/errors.hpp"

namespace motifrgc {

namespace {

using Setter = std::function<void(RunConfig&, const Json&)>;

template <typename T>
T as(const Json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) throw ConfigError("");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' has an invalid value: " + v.dump());
  }
}

std::array<double, 3> as_ratios(const Json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 3) throw ConfigError("config key '" + key + "' must be a list of three numbers");
  return {as<double>(v[0], key), as<double>(v[1], key), as<double>(v[2], key)};
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"dataset", [](RunConfig& c, const Json& v) { c.dataset = as<std::string>(v, "dataset"); }},
      {"format", [](RunConfig& c, const Json& v) { c.format = parse_format(as<std::string>(v, "format")); }},
      {"out_dir", [](RunConfig& c, const Json& v) { c.out_dir = as<std::string>(v, "out_dir"); }},
      {"seeds",
       [](RunConfig& c, const Json& v) {
         if (!v.is_array() || v.empty()) throw ConfigError("config key 'seeds' must be a nonempty list");
         c.seeds.clear();
         for (const auto& s : v) c.seeds.push_back(as<std::uint64_t>(s, "seeds"));
       }},
      {"split_seed", [](RunConfig& c, const Json& v) { c.split_seed = as<std::uint64_t>(v, "split_seed"); }},
      {"edge_ratios", [](RunConfig& c, const Json& v) { c.edge_ratios = as_ratios(v, "edge_ratios"); }},
      {"node_ratios", [](RunConfig& c, const Json& v) { c.node_ratios = as_ratios(v, "node_ratios"); }},
      {"factors",
       [](RunConfig& c, const Json& v) {
         if (!v.is_array() || v.empty()) throw ConfigError("config key 'factors' must be a nonempty list");
         c.train.encoder.factors.clear();
         for (const auto& f : v) {
           if (!f.is_object()) throw ConfigError("each factor must be an object {curvature, dim}");
           FactorSpec spec;
           for (const auto& [k, val] : f.items()) {
             if (k == "curvature") {
               spec.curvature = as<double>(val, "factors.curvature");
             } else if (k == "dim") {
               spec.dim = as<int>(val, "factors.dim");
             } else {
               throw ConfigError("unknown config key 'factors." + k + "'");
             }
           }
           c.train.encoder.factors.push_back(spec);
         }
       }},
      {"kernel_dim", [](RunConfig& c, const Json& v) { c.train.encoder.kernel_dim = as<int>(v, "kernel_dim"); }},
      {"hidden_dim", [](RunConfig& c, const Json& v) { c.train.encoder.hidden_dim = as<int>(v, "hidden_dim"); }},
      {"view_dim", [](RunConfig& c, const Json& v) { c.train.encoder.view_dim = as<int>(v, "view_dim"); }},
      {"projector_hidden",
       [](RunConfig& c, const Json& v) { c.train.encoder.projector_hidden = as<int>(v, "projector_hidden"); }},
      {"frequency_std",
       [](RunConfig& c, const Json& v) { c.train.encoder.frequency_std = as<double>(v, "frequency_std"); }},
      {"kernel_norm",
       [](RunConfig& c, const Json& v) {
         c.train.encoder.kernel_norm = parse_kernel_norm(as<std::string>(v, "kernel_norm"));
       }},
      {"alpha", [](RunConfig& c, const Json& v) { c.train.hardness.alpha = as<double>(v, "alpha"); }},
      {"temperature",
       [](RunConfig& c, const Json& v) {
         if (v.is_null()) {
           c.train.hardness.temperature.reset();
         } else {
           c.train.hardness.temperature = as<double>(v, "temperature");
         }
       }},
      {"generator_sign", [](RunConfig& c, const Json& v) { c.train.generator.sign = as<int>(v, "generator_sign"); }},
      {"literal_midpoint",
       [](RunConfig& c, const Json& v) { c.train.generator.literal_midpoint = as<bool>(v, "literal_midpoint"); }},
      {"candidate_limit",
       [](RunConfig& c, const Json& v) { c.train.generator.candidate_limit = as<int>(v, "candidate_limit"); }},
      {"min_steps", [](RunConfig& c, const Json& v) { c.train.min_steps = as<int>(v, "min_steps"); }},
      {"max_steps", [](RunConfig& c, const Json& v) { c.train.max_steps = as<int>(v, "max_steps"); }},
      {"max_iterations", [](RunConfig& c, const Json& v) { c.train.max_iterations = as<int>(v, "max_iterations"); }},
      {"eval_every", [](RunConfig& c, const Json& v) { c.train.eval_every = as<int>(v, "eval_every"); }},
      {"patience", [](RunConfig& c, const Json& v) { c.train.patience = as<int>(v, "patience"); }},
      {"lr_euclidean", [](RunConfig& c, const Json& v) { c.train.lr_euclidean = as<double>(v, "lr_euclidean"); }},
      {"lr_riemannian", [](RunConfig& c, const Json& v) { c.train.lr_riemannian = as<double>(v, "lr_riemannian"); }},
      {"lr_curvature", [](RunConfig& c, const Json& v) { c.train.lr_curvature = as<double>(v, "lr_curvature"); }},
      {"fake_batch_size",
       [](RunConfig& c, const Json& v) { c.train.fake_batch_size = as<int>(v, "fake_batch_size"); }},
      {"discriminator_width",
       [](RunConfig& c, const Json& v) { c.train.discriminator_width = as<int>(v, "discriminator_width"); }},
      {"reward_baseline",
       [](RunConfig& c, const Json& v) { c.train.reward_baseline = as<bool>(v, "reward_baseline"); }},
      {"lp_mode",
       [](RunConfig& c, const Json& v) { c.train.lp_mode = parse_lp_mode(as<std::string>(v, "lp_mode")); }},
  };
  return table;
}

void validate(const RunConfig& c) {
  c.train.validate();
  for (const auto* r : {&c.edge_ratios, &c.node_ratios}) {
    double sum = 0.0;
    for (double x : *r) {
      if (x < 0) throw ConfigError("split ratios must be nonnegative");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
  }
}

}  // namespace

std::string format_name(GraphFormat format) { return format == GraphFormat::kPlanetoid ? "planetoid" : "canonical"; }

Json to_json(const RunConfig& c) {
  const TrainConfig& t = c.train;
  Json j;
  j["dataset"] = c.dataset;
  j["format"] = format_name(c.format);
  j["out_dir"] = c.out_dir;
  j["seeds"] = c.seeds;
  j["split_seed"] = c.split_seed;
  j["edge_ratios"] = c.edge_ratios;
  j["node_ratios"] = c.node_ratios;
  Json factors = Json::array();
  for (const auto& f : t.encoder.factors) factors.push_back({{"curvature", f.curvature}, {"dim", f.dim}});
  j["factors"] = factors;
  j["kernel_dim"] = t.encoder.kernel_dim;
  j["hidden_dim"] = t.encoder.hidden_dim;
  j["view_dim"] = t.encoder.view_dim;
  j["projector_hidden"] = t.encoder.projector_hidden;
  j["frequency_std"] = t.encoder.frequency_std;
  j["kernel_norm"] = to_string(t.encoder.kernel_norm);
  j["alpha"] = t.hardness.alpha;
  j["temperature"] = t.hardness.temperature ? Json(*t.hardness.temperature) : Json(nullptr);
  j["generator_sign"] = t.generator.sign;
  j["literal_midpoint"] = t.generator.literal_midpoint;
  j["candidate_limit"] = t.generator.candidate_limit;
  j["min_steps"] = t.min_steps;
  j["max_steps"] = t.max_steps;
  j["max_iterations"] = t.max_iterations;
  j["eval_every"] = t.eval_every;
  j["patience"] = t.patience;
  j["lr_euclidean"] = t.lr_euclidean;
  j["lr_riemannian"] = t.lr_riemannian;
  j["lr_curvature"] = t.lr_curvature;
  j["fake_batch_size"] = t.fake_batch_size;
  j["discriminator_width"] = t.discriminator_width;
  j["reward_baseline"] = t.reward_baseline;
  j["lp_mode"] = to_string(t.lp_mode);
  return j;
}

RunConfig run_config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  const auto& table = setters();
  for (const auto& [key, value] : j.items()) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(c, value);
  }
  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  Json j = to_json(cfg);
  if (!j.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  j[key] = value;
  cfg = run_config_from_json(j);
}

}  // namespace motifrgc
