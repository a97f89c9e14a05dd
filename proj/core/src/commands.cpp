#include "substate/commands.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "substate/errors.hpp"
#include "substate/profiles.hpp"
#include "substate/reduction.hpp"
#include "substate/rng.hpp"

namespace substate {

namespace fs = std::filesystem;

namespace {

class PhaseTimer {
 public:
  PhaseTimer(std::ostream* sink, std::string name)
      : sink_(sink), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~PhaseTimer() {
    if (sink_ == nullptr) return;
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              start_)
                        .count();
    *sink_ << fmt::format("phase {}: {:.1f} ms\n", name_, ms);
  }
  PhaseTimer(const PhaseTimer&) = delete;
  PhaseTimer& operator=(const PhaseTimer&) = delete;

 private:
  std::ostream* sink_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// "0.5%" is awkward in a file name.
std::string file_safe(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '%') {
      out += "pct";
    } else if (c == '+') {
      out += "_";
    } else {
      out += c;
    }
  }
  return out;
}

fs::path output_path(const RunContext& ctx, std::string_view subdir, std::string_view stem,
                     std::string_view ext) {
  const fs::path dir = ctx.out_dir / subdir;
  fs::create_directories(dir);
  return dir / fmt::format("{}-{}{}", stem, config_hash(ctx), ext);
}

void write_file(const fs::path& file, const std::string& contents) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + file.string());
  out << contents;
  if (!out) throw InputError("write failed for " + file.string());
}

SuiteTraces load_suite(const RunContext& ctx) {
  if (ctx.trace_dir.empty()) throw InputError("--trace-dir is required");
  ctx.retention.validate();
  auto suite = ingest_suite(ctx.trace_dir, ctx.retention, ctx.jobs);
  if (suite.test_ids.empty()) throw InputError("no tests listed in " + ctx.trace_dir.string());
  return suite;
}

std::vector<TestLabel> load_context_labels(const RunContext& ctx) {
  if (ctx.labels_path.empty()) throw InputError("--labels is required");
  return load_labels(ctx.labels_path);
}

struct NamedMatrix {
  std::string name;
  ProfileMatrix matrix;
};

std::pair<std::string, fs::path> split_matrix_arg(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos) return {fs::path(arg).stem().string(), fs::path(arg)};
  return {arg.substr(0, eq), fs::path(arg.substr(eq + 1))};
}

std::vector<NamedMatrix> load_matrix_args(const RunContext& ctx) {
  std::vector<NamedMatrix> out;
  const MatrixLoadOptions opts{ctx.keep_universal};
  for (const auto& arg : ctx.matrices) {
    auto [name, path] = split_matrix_arg(arg);
    out.push_back({name, load_coverage_matrix(path, opts)});
  }
  return out;
}

// Same matrix with rows in `order`; the test sets must agree.
ProfileMatrix align_rows(const ProfileMatrix& m, const std::vector<std::string>& order,
                         std::string_view what) {
  if (m.test_ids() == order) return m;
  std::vector<std::string> sorted_a = m.test_ids();
  std::vector<std::string> sorted_b = order;
  std::sort(sorted_a.begin(), sorted_a.end());
  std::sort(sorted_b.begin(), sorted_b.end());
  if (sorted_a != sorted_b) {
    throw InputError(fmt::format("{} does not cover the same tests as the trace suite", what));
  }
  std::vector<Bits> rows;
  rows.reserve(order.size());
  for (const auto& id : order) rows.push_back(m.rows()[m.test_index(id)]);
  return ProfileMatrix(order, m.element_ids(), std::move(rows), m.universal_ids());
}

struct SubstateProfiles {
  std::vector<std::string> test_ids;
  std::vector<std::pair<KPolicy, ProfileMatrix>> by_k;
};

SubstateProfiles build_substate_profiles(const RunContext& ctx, std::span<const KPolicy> ks) {
  SuiteTraces suite;
  {
    PhaseTimer t(ctx.timing, "ingest");
    suite = load_suite(ctx);
  }
  ChannelTable table;
  {
    PhaseTimer t(ctx.timing, "features");
    table = build_channel_table(suite, ctx.jobs);
  }
  SubstateProfiles out;
  out.test_ids = suite.test_ids;
  PhaseTimer t(ctx.timing, "cluster");
  for (const auto& k : ks) {
    const auto clusters = cluster_table(table, k, ctx.config.seed, ctx.jobs);
    out.by_k.emplace_back(k, generate_profiles(clusters, suite.test_ids));
  }
  return out;
}

ExperimentReport labelled(ExperimentReport r, std::string config_id, std::string profile_type,
                          std::string k_spec) {
  r.config_id = std::move(config_id);
  r.profile_type = std::move(profile_type);
  r.k_spec = std::move(k_spec);
  return r;
}

}  // namespace

std::string config_hash(const RunContext& ctx) {
  std::string key = serialize_config(ctx.config);
  key += fmt::format("v_lead: {}\nv_trail: {}\nkeep_universal: {}\nrq2_keep_others: {}\n",
                     ctx.retention.v_lead, ctx.retention.v_trail, ctx.keep_universal,
                     ctx.rq2_keep_others);
  for (const auto& m : ctx.matrices) key += "matrix: " + split_matrix_arg(m).first + "\n";
  return fmt::format("{:08x}", static_cast<std::uint32_t>(fnv1a64(key) & 0xffffffffu));
}

ValidationReport cmd_validate(const fs::path& trace_dir, const RetentionConfig& retention) {
  if (!fs::is_directory(trace_dir)) {
    throw InputError("trace directory " + trace_dir.string() + " does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(trace_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == kTraceExtension) {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw InputError("no traces in " + trace_dir.string());
  std::sort(files.begin(), files.end());

  ValidationReport report;
  for (const auto& file : files) {
    try {
      const TestTrace trace = ingest_trace_file(file, retention);
      TraceFileSummary row{file.filename().string(), trace.event_count, trace.channel_count(), 0,
                           0};
      for (const auto& [key, summary] : trace.channels()) {
        if (summary.nan_seen()) ++row.nan_channels;
        if (summary.inf_seen()) ++row.inf_channels;
      }
      report.files.push_back(std::move(row));
    } catch (const InputError& e) {
      report.errors.emplace_back(e.what());
    }
  }
  return report;
}

void print_validation(std::ostream& out, const ValidationReport& report) {
  std::size_t width = 4;
  for (const auto& f : report.files) width = std::max(width, f.file.size());
  out << fmt::format("{:<{}}  {:>8}  {:>8}  {:>5}  {:>5}\n", "file", width, "events", "channels",
                     "nan", "inf");
  for (const auto& f : report.files) {
    out << fmt::format("{:<{}}  {:>8}  {:>8}  {:>5}  {:>5}\n", f.file, width, f.events,
                       f.channels, f.nan_channels, f.inf_channels);
  }
  for (const auto& e : report.errors) out << "error: " << e << '\n';
  out << fmt::format("{} file(s) ok, {} error(s)\n", report.files.size(), report.errors.size());
}

fs::path cmd_features(const RunContext& ctx) {
  SuiteTraces suite;
  {
    PhaseTimer t(ctx.timing, "ingest");
    suite = load_suite(ctx);
  }
  PhaseTimer t(ctx.timing, "features");
  const ChannelTable table = build_channel_table(suite, ctx.jobs);

  std::string csv = "test_id,method,offset,thread,kind,channel";
  for (auto name : FeatureVector::names) {
    csv += ',';
    csv += name;
  }
  csv += '\n';
  for (std::size_t c = 0; c < table.channels.size(); ++c) {
    const ChannelKey& key = table.channels[c];
    for (const auto& obs : table.observations[c]) {
      if (!obs.features) continue;
      csv += fmt::format("{},{},{},{},{},{}", csv_field(table.test_ids[obs.test]),
                         csv_field(key.cp.method_sig), key.cp.offset, key.cp.thread,
                         to_string(key.kind), to_string(key.channel));
      for (double v : obs.features->as_array()) csv += fmt::format(",{}", v);
      csv += '\n';
    }
  }
  const fs::path file = output_path(ctx, "features", "features", ".csv");
  write_file(file, csv);
  return file;
}

std::vector<fs::path> cmd_profile(const RunContext& ctx) {
  ctx.config.validate();
  const auto profiles = build_substate_profiles(ctx, ctx.config.k_specs);
  std::vector<fs::path> out;
  for (const auto& [k, matrix] : profiles.by_k) {
    const fs::path file =
        output_path(ctx, "profiles", "substate-k" + file_safe(k.spec()), ".csv");
    write_matrix_csv(file, matrix);
    out.push_back(file);
  }
  return out;
}

std::vector<fs::path> cmd_reduce(const RunContext& ctx) {
  ctx.config.validate();
  if (ctx.matrices.empty()) throw InputError("reduce needs at least one --matrix");
  const auto labels = load_context_labels(ctx);
  const auto matrices = load_matrix_args(ctx);

  ExperimentOptions opts;
  opts.replications = ctx.config.replications;
  opts.seed = ctx.config.seed;
  opts.jobs = ctx.jobs;

  std::vector<ExperimentReport> reports;
  std::string log_text;
  PhaseTimer t(ctx.timing, "reduce");
  for (const auto& [name, matrix] : matrices) {
    const DefectMap defects(matrix, labels);
    std::vector<SelectionLog> log;
    reports.push_back(labelled(run_experiment(matrix, defects, opts,
                                              ctx.log_selections ? &log : nullptr),
                               name, name, ""));
    if (ctx.log_selections) {
      std::ostringstream ss;
      write_selection_log(ss, name, log);
      log_text += ss.str();
    }
  }

  std::vector<fs::path> out;
  std::ostringstream csv;
  write_report_csv(csv, reports);
  out.push_back(output_path(ctx, "reports", "reduce", ".csv"));
  write_file(out.back(), csv.str());
  if (ctx.log_selections) {
    out.push_back(output_path(ctx, "reports", "reduce-selections", ".jsonl"));
    write_file(out.back(), log_text);
  }
  return out;
}

std::vector<fs::path> cmd_experiment(const RunContext& ctx) {
  const SweepConfig& cfg = ctx.config;
  cfg.validate();
  const auto labels = load_context_labels(ctx);

  // Every k needed by the sweep or a combination, in first-use order.
  std::vector<KPolicy> ks = cfg.k_specs;
  for (const auto& c : cfg.combinations) {
    if (std::find(ks.begin(), ks.end(), c.k) == ks.end()) ks.push_back(c.k);
  }
  const SubstateProfiles substate = build_substate_profiles(ctx, ks);
  const auto substate_for = [&](const KPolicy& k) -> const ProfileMatrix& {
    for (const auto& [kk, m] : substate.by_k) {
      if (kk == k) return m;
    }
    throw InvariantError("substate profile for " + k.label() + " was not built");
  };

  std::vector<NamedMatrix> structural;
  {
    PhaseTimer t(ctx.timing, "load structural");
    const MatrixLoadOptions opts{ctx.keep_universal};
    for (const auto& input : cfg.structural_inputs) {
      const auto m = load_coverage_matrix(cfg.resolve(input), opts);
      structural.push_back(
          {input.name, align_rows(m, substate.test_ids, "structural input " + input.name)});
    }
    if (cfg.include_all && !structural.empty()) {
      std::vector<ProfileMatrix> parts;
      std::vector<std::string> tags;
      for (const auto& s : structural) {
        parts.push_back(s.matrix);
        tags.push_back(s.name);
      }
      structural.push_back({std::string(kAllProfileName), combine_matrices(parts, tags)});
    }
  }
  const auto structural_for = [&](const std::string& name) -> const NamedMatrix* {
    for (const auto& s : structural) {
      if (s.name == name) return &s;
    }
    return nullptr;
  };

  std::string log_text;
  const auto run = [&](const ProfileMatrix& m, std::string config_id, std::string type,
                       std::string k_spec, bool single_failure) {
    const DefectMap defects(m, labels);
    ExperimentOptions opts;
    opts.replications = cfg.replications;
    opts.seed = cfg.seed;
    opts.jobs = ctx.jobs;
    opts.keep_other_failures = ctx.rq2_keep_others;
    std::vector<SelectionLog> log;
    auto* log_ptr = ctx.log_selections ? &log : nullptr;
    auto report = single_failure ? single_failure_experiment(m, defects, opts, log_ptr)
                                 : run_experiment(m, defects, opts, log_ptr);
    if (ctx.log_selections) {
      std::ostringstream ss;
      write_selection_log(ss, config_id, log);
      log_text += ss.str();
    }
    return labelled(std::move(report), std::move(config_id), std::move(type), std::move(k_spec));
  };

  std::string verdicts = "experiment,structural,k_spec,comparison\n";
  std::vector<fs::path> out;
  const auto emit_reports = [&](std::string_view stem, const std::vector<ExperimentReport>& rs) {
    std::ostringstream csv;
    write_report_csv(csv, rs);
    out.push_back(output_path(ctx, "reports", stem, ".csv"));
    write_file(out.back(), csv.str());
  };

  // Structural profiles against the Substate sweep, with and without the
  // single-failure sampling.
  std::map<std::string, ExperimentReport> suite_substate;    // keyed by k spec
  std::map<std::string, ExperimentReport> suite_structural;  // keyed by profile name
  for (const bool single : {false, true}) {
    if (single && !cfg.rq2) continue;
    const std::string q = single ? "single_failure" : "suite";
    PhaseTimer t(ctx.timing, q);
    std::vector<ExperimentReport> reports;
    std::vector<ExperimentReport> sub_reports;
    for (const auto& k : cfg.k_specs) {
      sub_reports.push_back(
          run(substate_for(k), q + "/substate/" + k.label(), "substate", k.spec(), single));
      if (!single) suite_substate.emplace(k.spec(), sub_reports.back());
    }
    for (const auto& s : structural) {
      reports.push_back(run(s.matrix, q + "/" + s.name, s.name, "", single));
      if (!single) suite_structural.emplace(s.name, reports.back());
      const SweepVerdict v = verdict(reports.back(), sub_reports);
      for (std::size_t i = 0; i < sub_reports.size(); ++i) {
        verdicts += fmt::format("{},{},{},{}\n", q, s.name, sub_reports[i].k_spec,
                                to_string(v.per_k[i]));
      }
      verdicts += fmt::format("{},{},overall,{}\n", q, s.name, to_string(v.overall));
    }
    reports.insert(reports.end(), sub_reports.begin(), sub_reports.end());
    emit_reports(q, reports);
  }

  // Combined profiles.
  {
    PhaseTimer t(ctx.timing, "combined");
    std::vector<ExperimentReport> reports;
    for (const auto& c : cfg.combinations) {
      const NamedMatrix* s = structural_for(c.structural);
      if (s == nullptr) {
        if (cfg.combinations_explicit) {
          throw ConfigError("combinations",
                            "no structural profile named '" + c.structural + "'");
        }
        continue;
      }
      const std::vector<ProfileMatrix> parts{s->matrix, substate_for(c.k)};
      const std::vector<std::string> tags{s->name, c.k.label()};
      reports.push_back(
          run(combine_matrices(parts, tags), "combined/" + c.spec(), c.spec(), c.k.spec(), false));

      auto sub = suite_substate.find(c.k.spec());
      if (sub == suite_substate.end()) {
        sub = suite_substate
                  .emplace(c.k.spec(), run(substate_for(c.k), "suite/substate/" + c.k.label(),
                                           "substate", c.k.spec(), false))
                  .first;
      }
      const ExperimentReport& structural_report = suite_structural.at(s->name);
      verdicts += fmt::format(
          "combined,{},{},{}\n", s->name, c.k.spec(),
          combined_is_better(reports.back(), structural_report, sub->second) ? "combined_better"
                                                                             : "not_better");
    }
    if (!reports.empty()) emit_reports("combined", reports);
  }

  out.push_back(output_path(ctx, "reports", "verdicts", ".csv"));
  write_file(out.back(), verdicts);
  if (ctx.log_selections) {
    out.push_back(output_path(ctx, "reports", "experiment-selections", ".jsonl"));
    write_file(out.back(), log_text);
  }
  return out;
}

fs::path cmd_combine(const RunContext& ctx) {
  std::vector<ProfileMatrix> parts;
  std::vector<std::string> tags;
  for (auto& [name, matrix] : load_matrix_args(ctx)) {
    parts.push_back(std::move(matrix));
    tags.push_back(std::move(name));
  }
  if (!ctx.trace_dir.empty()) {
    ctx.config.validate();
    const auto substate = build_substate_profiles(ctx, ctx.config.k_specs);
    for (const auto& [k, matrix] : substate.by_k) {
      parts.push_back(parts.empty() ? matrix
                                    : align_rows(matrix, parts.front().test_ids(),
                                                 "substate profile " + k.label()));
      tags.push_back(k.label());
    }
  }
  if (parts.empty()) throw InputError("combine needs --matrix inputs or a --trace-dir");
  const ProfileMatrix combined = combine_matrices(parts, tags);
  const fs::path file = output_path(ctx, "profiles", "combined", ".csv");
  write_matrix_csv(file, combined);
  return file;
}

}  // namespace substate
