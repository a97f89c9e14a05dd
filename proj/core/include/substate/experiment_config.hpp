#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "substate/clustering.hpp"

namespace substate {

struct StructuralInput {
  std::string name;  // e.g. BB, BBE, DUP
  std::string path;  // as written; relative paths resolve against SweepConfig::base_dir

  bool operator==(const StructuralInput&) const = default;
};

// A structural profile paired with a Substate k, e.g. "BBE+0.5%".
struct Combination {
  std::string structural;
  KPolicy k = KPolicy::fixed(2);

  std::string spec() const { return structural + "+" + k.spec(); }
  static Combination parse(std::string_view spec);  // throws InputError

  bool operator==(const Combination&) const = default;
};

inline constexpr std::string_view kAllProfileName = "ALL";

std::vector<KPolicy> default_k_specs();         // 2, then 0.5%, 1%, 1.5%, 2%, 3% ... 10%
std::vector<Combination> default_combinations();  // {BB,BBE,DUP,ALL} x {2, 0.5%, 1%, 2%}

struct SweepConfig {
  std::vector<KPolicy> k_specs = default_k_specs();
  std::vector<StructuralInput> structural_inputs;
  bool include_all = true;  // build ALL by concatenating the structural inputs
  std::vector<Combination> combinations = default_combinations();
  // Default combinations naming an absent structural profile are skipped;
  // explicit ones are an error.
  bool combinations_explicit = false;
  std::size_t replications = 100;
  bool rq2 = true;
  std::uint64_t seed = 0;

  std::filesystem::path base_dir;  // not serialized

  std::filesystem::path resolve(const StructuralInput& input) const;
  void validate() const;  // throws ConfigError

  bool operator==(const SweepConfig& other) const;
};

// Flat `key: value` file; list values are written `[a, b, c]` or `a, b, c`.
// Keys: k_specs, structural_inputs (NAME=path), include_all, combinations
// (NAME+k), replications, rq2, seed. An empty file gives all defaults.
SweepConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
SweepConfig load_config(const std::filesystem::path& file);

// Every key, in the order listed above, one per line.
std::string serialize_config(const SweepConfig& cfg);

}  // namespace substate
