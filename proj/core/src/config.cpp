#include "dualpath/config.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "dualpath/error.hpp"

namespace dualpath {

namespace {

using Json = nlohmann::ordered_json;

struct ParamField {
  const char* name;
  double NetworkParams::*member;
};

constexpr std::array<ParamField, 9> kFields{{
    {"lambda_b", &NetworkParams::lambda_b},
    {"lambda_c", &NetworkParams::lambda_c},
    {"l", &NetworkParams::length},
    {"w", &NetworkParams::width},
    {"phi", &NetworkParams::orientation},
    {"alpha_los", &NetworkParams::alpha_los},
    {"alpha_nlos", &NetworkParams::alpha_nlos},
    {"p_t", &NetworkParams::tx_power},
    {"sir_threshold", &NetworkParams::sir_threshold},
}};

// Returns the field and whether the key carried the "_db" suffix.
std::pair<const ParamField*, bool> find_field(std::string_view key) {
  bool db = false;
  if (key.size() > 3 && key.substr(key.size() - 3) == "_db") {
    db = true;
    key.remove_suffix(3);
  }
  for (const ParamField& f : kFields)
    if (key == f.name) return {&f, db};
  return {nullptr, false};
}

double number(const Json& j, std::string_view where) {
  if (!j.is_number()) throw ConfigError(fmt::format("{}: expected a number", where));
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(fmt::format("{}: not finite", where));
  return v;
}

std::uint64_t count(const Json& j, std::string_view where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ConfigError(fmt::format("{}: expected a non-negative integer", where));
  return j.get<std::uint64_t>();
}

std::string text(const Json& j, std::string_view where) {
  if (!j.is_string()) throw ConfigError(fmt::format("{}: expected a string", where));
  return j.get<std::string>();
}

LaplaceMode parse_mode(const std::string& s) {
  if (s == "exact" || s == "exact_angular") return LaplaceMode::exact_angular;
  if (s == "bound" || s == "bessel_bound") return LaplaceMode::bessel_bound;
  throw ConfigError("mode: expected exact or bound, got '" + s + "'");
}

}  // namespace

const std::vector<std::string>& parameter_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const ParamField& f : kFields) out.emplace_back(f.name);
    return out;
  }();
  return names;
}

void set_parameter(NetworkParams& params, std::string_view name, double value) {
  const auto [field, db] = find_field(name);
  if (field == nullptr) throw ConfigError(fmt::format("unknown parameter '{}'", name));
  params.*(field->member) = db ? db_to_linear(value) : value;
}

double get_parameter(const NetworkParams& params, std::string_view name) {
  const auto [field, db] = find_field(name);
  if (field == nullptr) throw ConfigError(fmt::format("unknown parameter '{}'", name));
  const double v = params.*(field->member);
  return db ? linear_to_db(v) : v;
}

void ExperimentConfig::validate() const {
  try {
    params.validate();
    for (const NetworkParams& p : sweep_points(*this)) p.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  for (const SweepAxis& axis : sweep) {
    if (axis.values.empty()) throw ConfigError("sweep." + axis.name + ": empty value list");
    if (find_field(axis.name).first == nullptr || find_field(axis.name).second)
      throw ConfigError("sweep: unknown parameter '" + axis.name + "'");
  }
  if (k < 1) throw ConfigError("k must be >= 1");
  if (k_max < 1) throw ConfigError("k_max must be >= 1");
  if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("r must be > 0");
  if (!std::isfinite(theta)) throw ConfigError("theta must be finite");
  if (assoc_samples < 2) throw ConfigError("assoc_samples must be >= 2");
}

ExperimentConfig parse_config(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text.begin(), json_text.end());
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    if (key == "params") {
      if (!value.is_object()) throw ConfigError("params: expected an object");
      for (const auto& [name, v] : value.items()) {
        if (find_field(name).first == nullptr)
          throw ConfigError("params: unknown parameter '" + name + "'");
        set_parameter(cfg.params, name, number(v, "params." + name));
      }
    } else if (key == "sweep") {
      if (!value.is_object()) throw ConfigError("sweep: expected an object");
      for (const auto& [name, list] : value.items()) {
        const auto [field, db] = find_field(name);
        if (field == nullptr) throw ConfigError("sweep: unknown parameter '" + name + "'");
        if (!list.is_array()) throw ConfigError("sweep." + name + ": expected an array");
        SweepAxis axis{field->name, {}};
        for (const Json& v : list) {
          const double x = number(v, "sweep." + name);
          axis.values.push_back(db ? db_to_linear(x) : x);
        }
        for (const SweepAxis& other : cfg.sweep)
          if (other.name == axis.name) throw ConfigError("sweep: duplicate axis " + axis.name);
        cfg.sweep.push_back(std::move(axis));
      }
    } else if (key == "out") {
      cfg.output_path = text(value, key);
    } else if (key == "seed") {
      cfg.seed = count(value, key);
    } else if (key == "trials") {
      cfg.trials = count(value, key);
    } else if (key == "mode") {
      cfg.mode = parse_mode(text(value, key));
    } else if (key == "blockage") {
      const auto m = parse_blockage_mode(text(value, key));
      if (!m) throw ConfigError("blockage: expected geometric or probabilistic");
      cfg.blockage = *m;
    } else if (key == "assoc") {
      const auto a = parse_association_rule(text(value, key));
      if (!a) throw ConfigError("assoc: unknown association rule");
      cfg.association = *a;
    } else if (key == "k") {
      cfg.k = static_cast<int>(count(value, key));
    } else if (key == "k_max") {
      cfg.k_max = static_cast<int>(count(value, key));
    } else if (key == "r") {
      cfg.r = number(value, key);
    } else if (key == "theta") {
      cfg.theta = number(value, key);
    } else if (key == "assoc_samples") {
      cfg.assoc_samples = count(value, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  Json doc;
  Json params = Json::object();
  for (const ParamField& f : kFields) params[f.name] = config.params.*(f.member);
  doc["params"] = params;
  Json sweep = Json::object();
  for (const SweepAxis& axis : config.sweep) sweep[axis.name] = axis.values;
  doc["sweep"] = sweep;
  doc["seed"] = config.seed;
  doc["trials"] = config.trials;
  doc["mode"] = to_string(config.mode);
  doc["blockage"] = to_string(config.blockage);
  doc["assoc"] = to_string(config.association);
  doc["k"] = config.k;
  doc["k_max"] = config.k_max;
  doc["r"] = config.r;
  doc["theta"] = config.theta;
  doc["assoc_samples"] = config.assoc_samples;
  doc["out"] = config.output_path;
  return doc.dump(2);
}

std::string config_digest(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.output_path.clear();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : serialize_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::vector<NetworkParams> sweep_points(const ExperimentConfig& config) {
  std::vector<NetworkParams> points{config.params};
  for (const SweepAxis& axis : config.sweep) {
    const ParamField* field = find_field(axis.name).first;
    if (field == nullptr) throw ConfigError("sweep: unknown parameter '" + axis.name + "'");
    std::vector<NetworkParams> next;
    next.reserve(points.size() * axis.values.size());
    for (const NetworkParams& p : points) {
      for (double v : axis.values) {
        NetworkParams q = p;
        q.*(field->member) = v;
        next.push_back(q);
      }
    }
    points = std::move(next);
  }
  return points;
}

}  // namespace dualpath
