#include "cli.hpp"

#include <algorithm>
#include <exception>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "substate/commands.hpp"
#include "substate/errors.hpp"

namespace substate::cli {

namespace {

struct Flags {
  std::string trace_dir;
  std::string labels;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string config;
  std::vector<std::string> k;
  std::optional<std::size_t> v_lead;
  std::optional<std::size_t> v_trail;
  bool keep_universal = false;
  bool log_selections = false;
  bool rq2_keep_others = false;
  std::optional<std::size_t> replications;
  std::optional<bool> rq2;
  std::optional<bool> include_all;
  std::vector<std::string> structural;
  std::vector<std::string> combinations;
  std::vector<std::string> matrices;
};

void add_common(CLI::App& app, Flags& f) {
  app.add_option("--trace-dir", f.trace_dir, "Directory with tests.txt and <test>.trace files");
  app.add_option("--labels", f.labels, "Labels CSV (test_id,verdict,defect_id)");
  app.add_option("--out", f.out, "Output directory")->capture_default_str();
  app.add_option("--seed", f.seed, "Global seed (default 0)");
  app.add_option("--jobs", f.jobs, "Worker threads, 0 for all cores")->capture_default_str();
  app.add_option("--config", f.config, "Sweep configuration file");
  app.add_option("--k,--k-specs,--k_specs", f.k, "Cluster count, e.g. 2 or 0.5% (repeatable)");
  app.add_option("--v-lead", f.v_lead, "Leading values kept per channel (default 2000)");
  app.add_option("--v-trail", f.v_trail, "Trailing values kept per channel (default 2000)");
  app.add_flag("--keep-universal", f.keep_universal,
               "Keep all-zero columns of input matrices instead of rejecting them");
  app.add_flag("--log-selections", f.log_selections, "Write per-replication selections");
  app.add_flag("--rq2-keep-others", f.rq2_keep_others,
               "Single-failure runs keep unsampled failing tests as non-revealing");
  app.add_option("--replications", f.replications, "Greedy runs per configuration");
  app.add_option("--rq2", f.rq2, "Run the single-failure experiment (true/false)");
  app.add_option("--include-all,--include_all", f.include_all, "Build ALL from the structural inputs");
  app.add_option("--structural,--structural-inputs,--structural_inputs", f.structural,
                 "Structural matrix NAME=path (repeatable)");
  app.add_option("--combination,--combinations", f.combinations,
                 "Combined profile NAME+k, e.g. BBE+0.5% (repeatable)");
  app.add_option("--matrix", f.matrices, "Coverage matrix CSV, NAME=path or path (repeatable)");
}

RunContext make_context(const Flags& f) {
  RunContext ctx;
  if (!f.config.empty()) ctx.config = load_config(f.config);
  if (f.seed) ctx.config.seed = *f.seed;
  if (!f.k.empty()) {
    ctx.config.k_specs.clear();
    for (const auto& spec : f.k) ctx.config.k_specs.push_back(KPolicy::parse(spec));
  }
  if (f.replications) ctx.config.replications = *f.replications;
  if (f.rq2) ctx.config.rq2 = *f.rq2;
  if (f.include_all) ctx.config.include_all = *f.include_all;
  if (!f.structural.empty()) {
    ctx.config.structural_inputs.clear();
    for (const auto& s : f.structural) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("structural_inputs", "'" + s + "' is not NAME=path");
      }
      ctx.config.structural_inputs.push_back({s.substr(0, eq), s.substr(eq + 1)});
    }
    // Paths given on the command line are relative to the working directory.
    ctx.config.base_dir.clear();
  }
  if (!f.combinations.empty()) {
    ctx.config.combinations.clear();
    ctx.config.combinations_explicit = true;
    for (const auto& c : f.combinations) ctx.config.combinations.push_back(Combination::parse(c));
  }
  ctx.config.validate();

  ctx.trace_dir = f.trace_dir;
  ctx.labels_path = f.labels;
  ctx.out_dir = f.out;
  if (f.v_lead) ctx.retention.v_lead = *f.v_lead;
  if (f.v_trail) ctx.retention.v_trail = *f.v_trail;
  ctx.retention.validate();
  ctx.jobs = f.jobs;
  ctx.keep_universal = f.keep_universal;
  ctx.log_selections = f.log_selections;
  ctx.rq2_keep_others = f.rq2_keep_others;
  ctx.matrices = f.matrices;
  return ctx;
}

void print_paths(std::ostream& out, const std::vector<std::filesystem::path>& paths) {
  for (const auto& p : paths) out << p.string() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Substate profiling and test suite reduction", "substate"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  add_common(app, flags);

  auto* validate = app.add_subcommand("validate", "Parse every trace and summarize it");
  auto* features = app.add_subcommand("features", "Write per-channel feature vectors");
  auto* profile = app.add_subcommand("profile", "Write Substate profile matrices");
  auto* reduce = app.add_subcommand("reduce", "Reduce coverage matrices and report rd%/df%");
  auto* experiment = app.add_subcommand("experiment", "Run the full comparison sweep");
  auto* combine = app.add_subcommand("combine", "Concatenate profile matrices");

  try {
    std::vector<std::string> reversed(args.size() > 1 ? args.begin() + 1 : args.end(),
                                      args.end());
    std::reverse(reversed.begin(), reversed.end());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    const RunContext ctx = make_context(flags);
    if (validate->parsed()) {
      if (ctx.trace_dir.empty()) throw InputError("--trace-dir is required");
      const ValidationReport report = cmd_validate(ctx.trace_dir, ctx.retention);
      print_validation(out, report);
      return report.ok() ? 0 : 1;
    }
    RunContext timed = ctx;
    timed.timing = &err;
    if (features->parsed()) {
      out << cmd_features(timed).string() << '\n';
    } else if (profile->parsed()) {
      print_paths(out, cmd_profile(timed));
    } else if (reduce->parsed()) {
      print_paths(out, cmd_reduce(timed));
    } else if (experiment->parsed()) {
      print_paths(out, cmd_experiment(timed));
    } else if (combine->parsed()) {
      out << cmd_combine(timed).string() << '\n';
    }
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace substate::cli
