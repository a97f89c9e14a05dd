#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "substate/experiment_config.hpp"
#include "substate/trace_ingest.hpp"

namespace substate {

// Everything a subcommand needs. Commands write files below out_dir and
// return their paths; they report failures by throwing.
struct RunContext {
  std::filesystem::path trace_dir;
  std::filesystem::path labels_path;
  std::filesystem::path out_dir = "out";
  RetentionConfig retention;
  SweepConfig config;
  unsigned jobs = 1;
  bool keep_universal = false;
  bool log_selections = false;
  bool rq2_keep_others = false;
  // Matrix inputs for reduce/combine, as NAME=path or a bare path (the name
  // is then the file stem).
  std::vector<std::string> matrices;
  std::ostream* timing = nullptr;  // per-phase wall-clock lines, if set
};

// Eight hex digits identifying every setting that can change a command's
// output. Stamped into output file names.
std::string config_hash(const RunContext& ctx);

struct TraceFileSummary {
  std::string file;
  std::size_t events = 0;
  std::size_t channels = 0;
  std::size_t nan_channels = 0;
  std::size_t inf_channels = 0;
};

struct ValidationReport {
  std::vector<TraceFileSummary> files;
  std::vector<std::string> errors;  // "file:line: message"
  bool ok() const noexcept { return errors.empty(); }
};

// Parses every *.trace file in the directory (sorted by name). Throws
// InputError when the directory is missing or holds no traces.
ValidationReport cmd_validate(const std::filesystem::path& trace_dir,
                              const RetentionConfig& retention = {});
void print_validation(std::ostream& out, const ValidationReport& report);

// Features of every unflagged (test, channel) stream, channel by channel.
std::filesystem::path cmd_features(const RunContext& ctx);

// One Substate matrix per k in ctx.config.k_specs.
std::vector<std::filesystem::path> cmd_profile(const RunContext& ctx);

// Reduces each of ctx.matrices with ctx.config.replications runs.
std::vector<std::filesystem::path> cmd_reduce(const RunContext& ctx);

// Structural vs Substate comparison, single-failure variant (when
// config.rq2) and combined profiles, plus the verdict table.
std::vector<std::filesystem::path> cmd_experiment(const RunContext& ctx);

// Concatenates ctx.matrices and, when a trace directory is given, the
// Substate matrix of every k in ctx.config.k_specs.
std::filesystem::path cmd_combine(const RunContext& ctx);

}  // namespace substate
