#include "substate/experiment_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <yaml-cpp/yaml.h>

#include "substate/errors.hpp"

namespace substate {

namespace fs = std::filesystem;

Combination Combination::parse(std::string_view spec) {
  const auto plus = spec.rfind('+');
  if (plus == std::string_view::npos || plus == 0 || plus + 1 == spec.size()) {
    throw InputError("bad combination '" + std::string(spec) + "' (expected e.g. BBE+0.5%)");
  }
  return Combination{std::string(spec.substr(0, plus)), KPolicy::parse(spec.substr(plus + 1))};
}

std::vector<KPolicy> default_k_specs() {
  std::vector<KPolicy> ks{KPolicy::fixed(2)};
  for (double p : {0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0}) {
    ks.push_back(KPolicy::percent(p));
  }
  return ks;
}

std::vector<Combination> default_combinations() {
  std::vector<Combination> out;
  for (const char* name : {"BB", "BBE", "DUP", "ALL"}) {
    for (const auto& k : {KPolicy::fixed(2), KPolicy::percent(0.5), KPolicy::percent(1.0),
                          KPolicy::percent(2.0)}) {
      out.push_back({name, k});
    }
  }
  return out;
}

fs::path SweepConfig::resolve(const StructuralInput& input) const {
  fs::path p(input.path);
  if (p.is_relative() && !base_dir.empty()) return base_dir / p;
  return p;
}

void SweepConfig::validate() const {
  if (k_specs.empty()) throw ConfigError("k_specs", "at least one k spec is required");
  if (replications < 1) throw ConfigError("replications", "must be >= 1");
  std::set<std::string> names;
  for (const auto& s : structural_inputs) {
    if (s.name.empty() || s.path.empty()) {
      throw ConfigError("structural_inputs", "entries must be NAME=path");
    }
    if (s.name == kAllProfileName) {
      throw ConfigError("structural_inputs", "ALL is built from the other inputs, not loaded");
    }
    if (!names.insert(s.name).second) {
      throw ConfigError("structural_inputs", "duplicate name '" + s.name + "'");
    }
  }
}

bool SweepConfig::operator==(const SweepConfig& o) const {
  return k_specs == o.k_specs && structural_inputs == o.structural_inputs &&
         include_all == o.include_all && combinations == o.combinations &&
         combinations_explicit == o.combinations_explicit && replications == o.replications &&
         rq2 == o.rq2 && seed == o.seed;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> list_value(const std::string& key, const YAML::Node& node) {
  std::vector<std::string> items;
  if (node.IsNull()) return items;
  if (node.IsSequence()) {
    for (const auto& item : node) {
      if (!item.IsScalar()) throw ConfigError(key, "list items must be plain values");
      items.push_back(trim(item.Scalar()));
    }
    return items;
  }
  if (!node.IsScalar()) throw ConfigError(key, "expected a list");
  std::stringstream ss(node.Scalar());
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string scalar_value(const std::string& key, const YAML::Node& node) {
  if (!node.IsScalar()) throw ConfigError(key, "expected a single value");
  return trim(node.Scalar());
}

bool bool_value(const std::string& key, const YAML::Node& node) {
  const std::string v = scalar_value(key, node);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::uint64_t uint_value(const std::string& key, const YAML::Node& node) {
  const std::string v = scalar_value(key, node);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

}  // namespace

SweepConfig parse_config(std::string_view text, const fs::path& base_dir) {
  SweepConfig cfg;
  cfg.base_dir = base_dir;

  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("<file>", std::string("not a flat key: value file: ") + e.what());
  }
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw ConfigError("<file>", "expected key: value lines");

  for (const auto& entry : root) {
    const std::string key = entry.first.as<std::string>();
    const YAML::Node& value = entry.second;
    try {
      if (key == "k_specs") {
        cfg.k_specs.clear();
        for (const auto& item : list_value(key, value)) cfg.k_specs.push_back(KPolicy::parse(item));
      } else if (key == "structural_inputs") {
        cfg.structural_inputs.clear();
        for (const auto& item : list_value(key, value)) {
          const auto eq = item.find('=');
          if (eq == std::string::npos) throw ConfigError(key, "entry '" + item + "' is not NAME=path");
          cfg.structural_inputs.push_back({trim(item.substr(0, eq)), trim(item.substr(eq + 1))});
        }
      } else if (key == "include_all") {
        cfg.include_all = bool_value(key, value);
      } else if (key == "combinations") {
        cfg.combinations.clear();
        cfg.combinations_explicit = true;
        for (const auto& item : list_value(key, value)) {
          cfg.combinations.push_back(Combination::parse(item));
        }
      } else if (key == "replications") {
        cfg.replications = uint_value(key, value);
      } else if (key == "rq2") {
        cfg.rq2 = bool_value(key, value);
      } else if (key == "seed") {
        cfg.seed = uint_value(key, value);
      } else {
        throw ConfigError(key, "unknown key");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const InputError& e) {
      throw ConfigError(key, e.what());
    }
  }
  cfg.validate();
  return cfg;
}

SweepConfig load_config(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError("cannot open config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.parent_path());
}

std::string serialize_config(const SweepConfig& cfg) {
  std::vector<std::string> ks;
  for (const auto& k : cfg.k_specs) ks.push_back(k.spec());
  std::vector<std::string> inputs;
  for (const auto& s : cfg.structural_inputs) inputs.push_back(s.name + "=" + s.path);

  std::string out;
  out += fmt::format("k_specs: [{}]\n", fmt::join(ks, ", "));
  out += fmt::format("structural_inputs: [{}]\n", fmt::join(inputs, ", "));
  out += fmt::format("include_all: {}\n", cfg.include_all);
  if (cfg.combinations_explicit) {
    std::vector<std::string> combos;
    for (const auto& c : cfg.combinations) combos.push_back(c.spec());
    out += fmt::format("combinations: [{}]\n", fmt::join(combos, ", "));
  }
  out += fmt::format("replications: {}\n", cfg.replications);
  out += fmt::format("rq2: {}\n", cfg.rq2);
  out += fmt::format("seed: {}\n", cfg.seed);
  return out;
}

}  // namespace substate
