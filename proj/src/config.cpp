#include "s2/config.hpp"

#include <initializer_list>
#include <json.hpp>

namespace s2::cfg {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

SourceModel parse_source(const json& j, const std::string& where) {
  const auto type = get<std::string>(j, "type", where, "random_walk");
  if (type == "two_state") {
    only_keys(j, where, {"type", "p"});
    return TwoStateSource::make(get<double>(j, "p", where, 0.5));
  }
  if (type == "random_walk") {
    only_keys(j, where, {"type", "q_up", "q_down", "q_stay"});
    return RandomWalkSource::make(get<double>(j, "q_up", where, 0.5), get<double>(j, "q_down", where, 0.5),
                                  get<double>(j, "q_stay", where, 0.0));
  }
  throw ConfigError(where + ".type: unknown source type '" + type + "'");
}

Extension parse_extension(const std::string& s, const std::string& where) {
  if (s == "none") return Extension::none;
  if (s == "hold") return Extension::hold;
  if (s == "linear") return Extension::linear;
  throw ConfigError(where + ".extension: expected none, hold or linear");
}

ErrorFunction parse_error(const json& j, const std::string& where) {
  only_keys(j, where, {"kind", "weight", "d0", "values", "extension"});
  const auto kind = get<std::string>(j, "kind", where, "linear");
  const double w = get<double>(j, "weight", where, 1.0);
  if (kind == "threshold") return ErrorFunction::threshold(get<std::int64_t>(j, "d0", where, 1), w);
  if (kind == "tabulated")
    return ErrorFunction::tabulated(get<std::vector<double>>(j, "values", where, {}),
                                    parse_extension(get<std::string>(j, "extension", where, "none"), where), w);
  return parse_error_function_name(kind, w);
}

std::vector<NodeParams> parse_nodes(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("nodes: expected a non-empty array");
  std::vector<NodeParams> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const json& g = j[i];
    only_keys(g, where, {"count", "source", "error", "p_e"});
    NodeParams p;
    if (g.contains("source")) p.source = parse_source(g["source"], where + ".source");
    if (g.contains("error")) p.f = parse_error(g["error"], where + ".error");
    p.p_e = get<double>(g, "p_e", where, 0.0);
    const auto count = get<std::int64_t>(g, "count", where, 1);
    if (count < 1 || count > 1'000'000) throw ConfigError(where + ".count: must be in 1..1000000");
    out.insert(out.end(), static_cast<std::size_t>(count), p);
  }
  return out;
}

PolicySpec parse_policy(const json& j, std::optional<meanfield::Mapping>& mapping) {
  only_keys(j, "policy", {"kind", "nu", "mapping"});
  PolicySpec p;
  p.kind = parse_policy_kind(get<std::string>(j, "kind", "policy", "centralized_whittle"));
  p.nu = get<double>(j, "nu", "policy", 0.1);
  if (j.contains("mapping")) {
    const json& m = j["mapping"];
    only_keys(m, "policy.mapping", {"i_th", "p_tx"});
    mapping = meanfield::build_mapping(get<double>(m, "i_th", "policy.mapping", 0.0),
                                       get<double>(m, "p_tx", "policy.mapping", 1.0));
  }
  return p;
}

PresetJob parse_preset(const json& j) {
  only_keys(j, "config", {"preset", "n", "horizon", "replications", "seed", "grid", "d_max", "output"});
  PresetJob job;
  job.name = get<std::string>(j, "preset", "config", "");
  job.options.n = get<std::int64_t>(j, "n", "config", 0);
  job.options.horizon = get<std::int64_t>(j, "horizon", "config", 100'000);
  job.options.replications = get<int>(j, "replications", "config", 20);
  job.options.seed = get<std::uint64_t>(j, "seed", "config", 1);
  job.options.grid = get<std::vector<double>>(j, "grid", "config", {});
  job.options.d_max = get<std::int64_t>(j, "d_max", "config", 10);
  job.output = get<std::string>(j, "output", "config", "");
  return job;
}

exp::RunSpec parse_run(const json& j) {
  only_keys(j, "config", {"horizon", "seed", "contention", "slot_ratio", "initial", "initial_offset",
                          "warmup", "drift_predictor", "d_cap", "track_threshold", "policy", "policies",
                          "nodes", "sweep", "replications", "output"});
  exp::RunSpec spec;
  sim::SimConfig& c = spec.base;
  if (!j.contains("nodes")) throw ConfigError("config: 'nodes' is required");
  c.nodes = parse_nodes(j["nodes"]);
  c.horizon = get<std::int64_t>(j, "horizon", "config", 100'000);
  c.seed = get<std::uint64_t>(j, "seed", "config", 1);
  const auto contention = get<std::string>(j, "contention", "config", "mini_slot");
  if (contention == "mini_slot") c.contention = sim::ContentionModel::mini_slot;
  else if (contention == "slotted") c.contention = sim::ContentionModel::slotted;
  else throw ConfigError("config.contention: expected slotted or mini_slot");
  c.slot_ratio = get<double>(j, "slot_ratio", "config", 10.0);
  const auto initial = get<std::string>(j, "initial", "config", "synced");
  if (initial == "synced") c.initial = sim::InitialRule::synced;
  else if (initial == "offset") c.initial = sim::InitialRule::offset;
  else throw ConfigError("config.initial: expected synced or offset");
  c.initial_offset = get<std::int64_t>(j, "initial_offset", "config", 0);
  c.warmup = get<std::int64_t>(j, "warmup", "config", 0);
  c.drift_predictor = get<bool>(j, "drift_predictor", "config", false);
  c.d_cap = get<std::int64_t>(j, "d_cap", "config", 0);
  c.track_threshold = get<std::int64_t>(j, "track_threshold", "config", 0);
  if (j.contains("policy")) c.policy = parse_policy(j["policy"], c.etsu_mapping);
  for (const auto& name : get<std::vector<std::string>>(j, "policies", "config", {}))
    spec.policies.push_back(parse_policy_kind(name));
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    only_keys(s, "sweep", {"variable", "values"});
    spec.sweep.variable = get<std::string>(s, "variable", "sweep", "");
    spec.sweep.values = get<std::vector<double>>(s, "values", "sweep", {});
    if (spec.sweep.variable.empty() || spec.sweep.values.empty())
      throw ConfigError("sweep: needs a variable and at least one value");
  }
  spec.replications = get<int>(j, "replications", "config", 1);
  spec.output = get<std::string>(j, "output", "config", "");
  c.validate();
  return spec;
}

}  // namespace

ErrorFunction parse_error_function_name(const std::string& name, double weight) {
  if (name == "linear") return ErrorFunction::linear(weight);
  if (name == "quadratic") return ErrorFunction::quadratic(weight);
  if (name == "exponential") return ErrorFunction::exponential(weight);
  if (name == "indicator") return ErrorFunction::indicator(weight);
  throw ConfigError("unknown error function '" + name + "'");
}

Job parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  try {
    if (j.contains("preset")) return parse_preset(j);
    return parse_run(j);
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace s2::cfg
