#include "cenal/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"

#include "cenal/errors.hpp"
#include "cenal/version.hpp"

namespace cenal::config {

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("bad JSON in " + path + ": " + e.what());
  }
  return j;
}

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (known.find(key) == known.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void get_to(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      j.at(key).get_to(out);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

}  // namespace

loop::ExperimentConfig experiment_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad JSON config: ") + e.what());
  }

  loop::ExperimentConfig cfg;
  reject_unknown(j,
                 {"dataset", "splits", "acquisition", "network", "train", "repetitions",
                  "master_seed", "score_profile"},
                 "config");

  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    reject_unknown(d,
                   {"id", "kind", "path", "features", "target", "event", "log_transform",
                    "standardize"},
                   "dataset");
    get_to(d, "id", cfg.dataset_id);
    std::string kind = "synthetic";
    get_to(d, "kind", kind);
    if (kind == "synthetic") {
      cfg.source = loop::ExperimentConfig::Source::synthetic;
      cfg.log_transform = false;
    } else if (kind == "csv") {
      cfg.source = loop::ExperimentConfig::Source::csv;
      cfg.standardize = true;  // real datasets default to standardized features
    } else {
      throw ConfigError("dataset.kind must be 'synthetic' or 'csv'");
    }
    get_to(d, "path", cfg.csv_path);
    get_to(d, "features", cfg.schema.features);
    get_to(d, "target", cfg.schema.target);
    get_to(d, "event", cfg.schema.event);
    get_to(d, "log_transform", cfg.log_transform);
    get_to(d, "standardize", cfg.standardize);
  } else {
    cfg.log_transform = false;
  }

  if (j.contains("splits")) {
    const json& s = j.at("splits");
    reject_unknown(s, {"n0", "pool", "val", "test"}, "splits");
    get_to(s, "n0", cfg.sizes.n0);
    get_to(s, "pool", cfg.sizes.pool);
    get_to(s, "val", cfg.sizes.val);
    get_to(s, "test", cfg.sizes.test);
  }

  if (j.contains("acquisition")) {
    const json& a = j.at("acquisition");
    reject_unknown(a, {"size", "steps", "functions", "posterior_draws", "mc_samples"},
                   "acquisition");
    get_to(a, "size", cfg.acquisition_size);
    get_to(a, "steps", cfg.steps);
    if (a.contains("functions")) {
      std::vector<std::string> names;
      a.at("functions").get_to(names);
      cfg.functions.clear();
      for (const auto& n : names) cfg.functions.push_back(acq::function_from_name(n));
    }
    get_to(a, "posterior_draws", cfg.posterior_draws);
    get_to(a, "mc_samples", cfg.mc_samples);
  }

  if (j.contains("network")) {
    const json& n = j.at("network");
    reject_unknown(n, {"hidden_layers", "hidden_units", "dropout_p", "activation"},
                   "network");
    get_to(n, "hidden_layers", cfg.network.hidden_layers);
    get_to(n, "hidden_units", cfg.network.hidden_units);
    get_to(n, "dropout_p", cfg.network.dropout_p);
    if (n.contains("activation")) {
      cfg.network.activation = nn::activation_from_name(n.at("activation").get<std::string>());
    }
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t, {"max_epochs", "patience", "batch_size", "learning_rate", "warm_start"},
                   "train");
    get_to(t, "max_epochs", cfg.train.max_epochs);
    get_to(t, "patience", cfg.train.patience);
    get_to(t, "batch_size", cfg.train.batch_size);
    get_to(t, "learning_rate", cfg.train.learning_rate);
    get_to(t, "warm_start", cfg.warm_start);
  }

  get_to(j, "repetitions", cfg.repetitions);
  get_to(j, "master_seed", cfg.master_seed);
  get_to(j, "score_profile", cfg.score_profile);

  loop::validate(cfg);
  return cfg;
}

loop::ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return experiment_from_json_text(text);
}

std::string canonical_json(const loop::ExperimentConfig& cfg) {
  json j;
  j["dataset"]["id"] = cfg.dataset_id;
  j["dataset"]["kind"] =
      cfg.source == loop::ExperimentConfig::Source::synthetic ? "synthetic" : "csv";
  j["dataset"]["path"] = cfg.csv_path;
  j["dataset"]["features"] = cfg.schema.features;
  j["dataset"]["target"] = cfg.schema.target;
  j["dataset"]["event"] = cfg.schema.event;
  j["dataset"]["log_transform"] = cfg.log_transform;
  j["dataset"]["standardize"] = cfg.standardize;
  j["splits"] = {{"n0", cfg.sizes.n0},
                 {"pool", cfg.sizes.pool},
                 {"val", cfg.sizes.val},
                 {"test", cfg.sizes.test}};
  std::vector<std::string> fn_names;
  for (acq::Function f : cfg.functions) fn_names.push_back(acq::function_name(f));
  j["acquisition"] = {{"size", cfg.acquisition_size},
                      {"steps", cfg.steps},
                      {"functions", fn_names},
                      {"posterior_draws", cfg.posterior_draws},
                      {"mc_samples", cfg.mc_samples}};
  j["network"] = {{"hidden_layers", cfg.network.hidden_layers},
                  {"hidden_units", cfg.network.hidden_units},
                  {"dropout_p", cfg.network.dropout_p},
                  {"activation", nn::activation_name(cfg.network.activation)}};
  j["train"] = {{"max_epochs", cfg.train.max_epochs},
                {"patience", cfg.train.patience},
                {"batch_size", cfg.train.batch_size},
                {"learning_rate", cfg.train.learning_rate},
                {"warm_start", cfg.warm_start}};
  j["repetitions"] = cfg.repetitions;
  j["master_seed"] = cfg.master_seed;
  j["score_profile"] = cfg.score_profile;
  return j.dump();
}

std::string config_hash(const loop::ExperimentConfig& cfg) {
  const std::string text = canonical_json(cfg);
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

GenerateConfig load_generate(const std::string& path) {
  const json j = load_json(path);
  reject_unknown(j, {"n", "seed", "kind"}, "generate config");
  GenerateConfig g;
  get_to(j, "n", g.n);
  get_to(j, "seed", g.seed);
  get_to(j, "kind", g.kind);
  if (g.n == 0) throw ConfigError("generate: n must be >= 1");
  if (g.kind != "synthetic" && g.kind != "synthetic_test") {
    throw ConfigError("generate: kind must be 'synthetic' or 'synthetic_test'");
  }
  return g;
}

Manifest read_manifest(const std::string& path) {
  const json j = load_json(path);
  Manifest m;
  try {
    m.version = j.value("version", "");
    m.config_hash = j.value("config_hash", "");
    m.dataset = j.value("dataset", "");
    m.master_seed = j.value("master_seed", std::uint64_t{0});
    m.created = j.value("created", "");
    if (j.contains("units")) {
      for (const auto& u : j.at("units")) {
        ManifestUnit mu;
        mu.function = acq::function_from_name(u.at("function").get<std::string>());
        mu.repetition = u.at("repetition").get<std::size_t>();
        mu.status = u.at("status").get<std::string>();
        mu.file = u.value("file", "");
        mu.error = u.value("error", "");
        m.units.push_back(mu);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError("bad manifest " + path + ": " + e.what());
  }
  return m;
}

void write_manifest(const std::string& path, const Manifest& m) {
  json j;
  j["version"] = m.version;
  j["config_hash"] = m.config_hash;
  j["dataset"] = m.dataset;
  j["master_seed"] = m.master_seed;
  j["created"] = m.created;
  j["units"] = json::array();
  for (const auto& u : m.units) {
    json ju;
    ju["function"] = acq::function_name(u.function);
    ju["repetition"] = u.repetition;
    ju["status"] = u.status;
    ju["file"] = u.file;
    if (!u.error.empty()) ju["error"] = u.error;
    j["units"].push_back(ju);
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot write " + tmp);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace cenal::config
