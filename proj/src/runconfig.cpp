#include "floqsens/runconfig.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace floqsens::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kExperiments = {"bands", "power",  "evolve", "qfi",
                                            "parity", "scaling", "loss",   "bayes",
                                            "noise", "detune", "optimize", "validate"};

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

}  // namespace

RunConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: parse failure: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(j,
                 {"experiment", "model", "input", "grid", "steps_per_tcom", "t_list",
                  "truncation", "theta", "seed", "threads", "out_dir", "extra"},
                 "top level");

  RunConfig c;
  if (!j.contains("experiment") || !j["experiment"].is_string())
    throw ConfigError("config: 'experiment' (string) is required");
  c.experiment = j["experiment"].get<std::string>();
  if (!kExperiments.count(c.experiment))
    throw ConfigError("config: unknown experiment '" + c.experiment + "'");

  if (!j.contains("model") || !j["model"].is_object())
    throw ConfigError("config: 'model' (object) is required");
  const json& jm = j["model"];
  if (!jm.contains("name") || !jm["name"].is_string())
    throw ConfigError("config: model.name is required");
  c.model_name = jm["name"].get<std::string>();
  for (auto it = jm.begin(); it != jm.end(); ++it) {
    if (it.key() == "name") continue;
    if (!it.value().is_number())
      throw ConfigError("config: model parameter '" + it.key() + "' must be a number");
    c.model_params[it.key()] = it.value().get<double>();
  }

  if (j.contains("input")) {
    const json& ji = j["input"];
    reject_unknown(ji, {"kind", "n_c", "phi10", "phi20"}, "input");
    if (ji.contains("kind")) c.input_kind = ji["kind"].get<std::string>();
    if (c.input_kind != "fock" && c.input_kind != "coherent")
      throw ConfigError("config: input.kind must be 'fock' or 'coherent'");
    if (ji.contains("n_c")) c.n_c = ji["n_c"].get<int>();
    if (ji.contains("phi10")) c.phi10 = ji["phi10"].get<double>();
    if (ji.contains("phi20")) c.phi20 = ji["phi20"].get<double>();
    if (c.n_c < 1) throw ConfigError("config: input.n_c must be >= 1");
  }

  if (j.contains("grid")) c.grid = j["grid"].get<int>();
  if (c.grid < 2 || (c.grid & (c.grid - 1)) != 0)
    throw ConfigError("config: grid must be a power of two >= 2");
  if (j.contains("steps_per_tcom")) c.steps_per_tcom = j["steps_per_tcom"].get<int>();
  if (c.steps_per_tcom < 100) throw ConfigError("config: steps_per_tcom must be >= 100");
  if (j.contains("t_list")) {
    for (const auto& v : j["t_list"]) {
      long k = v.get<long>();
      if (k < 0) throw ConfigError("config: t_list entries must be >= 0");
      c.t_list.push_back(k);
    }
  }
  if (j.contains("truncation")) c.truncation = j["truncation"].get<int>();
  if (j.contains("theta") && !j["theta"].is_null()) c.theta = j["theta"].get<double>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) c.threads = j["threads"].get<int>();
  if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("extra")) {
    for (auto it = j["extra"].begin(); it != j["extra"].end(); ++it) {
      if (!it.value().is_number())
        throw ConfigError("config: extra values must be numbers");
      c.extra[it.key()] = it.value().get<double>();
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_json(ss.str());
}

std::string RunConfig::canonical() const {
  json j;
  j["experiment"] = experiment;
  j["model"]["name"] = model_name;
  for (const auto& [k, v] : model_params) j["model"][k] = v;
  j["input"] = {{"kind", input_kind}, {"n_c", n_c}, {"phi10", phi10}, {"phi20", phi20}};
  j["grid"] = grid;
  j["steps_per_tcom"] = steps_per_tcom;
  j["t_list"] = t_list;
  j["truncation"] = truncation;
  if (theta) j["theta"] = *theta;
  j["seed"] = seed;
  for (const auto& [k, v] : extra) j["extra"][k] = v;
  return j.dump();
}

}  // namespace floqsens::cli
