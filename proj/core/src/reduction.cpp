#include "substate/reduction.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "substate/errors.hpp"
#include "substate/parallel.hpp"
#include "substate/rng.hpp"

namespace substate {

namespace {

using Words = std::vector<std::uint64_t>;

Words to_words(const Bits& b) {
  Words w(b.num_blocks());
  boost::to_block_range(b, w.begin());
  return w;
}

std::size_t masked_count(const Words& row, const Words& mask) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < row.size(); ++i) n += std::popcount(row[i] & mask[i]);
  return n;
}

constexpr std::uint64_t kSampleStream = 0x52513253414d504cULL;
constexpr double kEps = 1e-9;

}  // namespace

ReductionRun greedy_reduce(const ProfileMatrix& m, std::uint64_t seed) {
  std::vector<std::size_t> all(m.test_count());
  std::iota(all.begin(), all.end(), 0);
  return greedy_reduce(m, seed, all);
}

ReductionRun greedy_reduce(const ProfileMatrix& m, std::uint64_t seed,
                           std::span<const std::size_t> candidates) {
  ReductionRun run;
  run.seed = seed;
  Rng rng = make_rng(seed);

  std::vector<Words> rows;
  rows.reserve(candidates.size());
  for (auto t : candidates) {
    if (t >= m.test_count()) throw InvariantError("greedy candidate outside the matrix");
    rows.push_back(to_words(m.rows()[t]));
  }

  const std::size_t blocks = Bits(m.element_count()).num_blocks();
  Words uncovered(blocks, 0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < blocks; ++i) uncovered[i] |= r[i];
  }
  for (std::size_t i = 0; i < blocks; ++i) run.covered += std::popcount(uncovered[i]);
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    if (!((uncovered[e / 64] >> (e % 64)) & 1u)) run.uncoverable.push_back(m.element_ids()[e]);
  }

  std::vector<bool> taken(rows.size(), false);
  std::vector<std::size_t> tied;
  while (true) {
    std::size_t best = 0;
    tied.clear();
    for (std::size_t c = 0; c < rows.size(); ++c) {
      if (taken[c]) continue;
      const std::size_t gain = masked_count(rows[c], uncovered);
      if (gain == 0) continue;
      if (gain > best) {
        best = gain;
        tied.clear();
      }
      if (gain == best) tied.push_back(c);
    }
    if (best == 0) break;
    const std::size_t pick = tied.size() == 1 ? tied[0] : tied[uniform_index(rng, tied.size())];
    taken[pick] = true;
    run.selected.push_back(candidates[pick]);
    for (std::size_t i = 0; i < blocks; ++i) uncovered[i] &= ~rows[pick][i];
  }

  if (run.selected.empty() && !m.universal_ids().empty() && !candidates.empty()) {
    run.selected.push_back(candidates[uniform_index(rng, candidates.size())]);
  }
  return run;
}

double rd_pct(std::size_t total, std::size_t selected) {
  if (total == 0) throw DomainError("rd% of an empty suite");
  if (selected > total) throw InvariantError("selected more tests than the suite holds");
  return (1.0 - static_cast<double>(selected) / static_cast<double>(total)) * 100.0;
}

DefectMap::DefectMap(const ProfileMatrix& m, std::span<const TestLabel> labels) {
  std::unordered_map<std::string_view, const TestLabel*> by_id;
  for (const auto& l : labels) by_id.emplace(l.test_id, &l);

  std::map<std::string, std::vector<std::size_t>> failing;
  defect_of_.resize(m.test_count());
  for (std::size_t t = 0; t < m.test_count(); ++t) {
    auto it = by_id.find(m.test_ids()[t]);
    if (it == by_id.end()) throw InputError("no label for test '" + m.test_ids()[t] + "'");
    if (it->second->verdict == Verdict::fail) failing[*it->second->defect_id].push_back(t);
  }
  if (failing.empty()) throw DomainError("labels reveal no defect: df% is undefined");
  for (auto& [defect, tests] : failing) {
    defects_.push_back(defect);
    failures_ += tests.size();
    for (auto t : tests) defect_of_[t] = failing_.size();
    failing_.push_back(std::move(tests));
  }
}

double df_pct(std::span<const std::size_t> selected, const DefectMap& defects) {
  std::vector<bool> revealed(defects.defects().size(), false);
  for (auto t : selected) {
    if (auto d = defects.defect_of(t)) revealed[*d] = true;
  }
  const auto hits = static_cast<double>(std::count(revealed.begin(), revealed.end(), true));
  return 100.0 * hits / static_cast<double>(revealed.size());
}

double df_pct(std::span<const std::string> selected, std::span<const TestLabel> labels) {
  std::map<std::string, bool> revealed;
  std::unordered_map<std::string_view, const TestLabel*> by_id;
  for (const auto& l : labels) {
    by_id.emplace(l.test_id, &l);
    if (l.verdict == Verdict::fail) revealed.emplace(*l.defect_id, false);
  }
  if (revealed.empty()) throw DomainError("labels reveal no defect: df% is undefined");
  for (const auto& id : selected) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw InputError("selected test '" + id + "' has no label");
    if (it->second->verdict == Verdict::fail) revealed[*it->second->defect_id] = true;
  }
  const auto hits = std::count_if(revealed.begin(), revealed.end(),
                                  [](const auto& kv) { return kv.second; });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(revealed.size());
}

namespace {

struct RepOutcome {
  double rd = 0.0;
  double df = 0.0;
  std::size_t selected = 0;
  std::vector<bool> revealed;
  SelectionLog log;
};

RepOutcome score(const ProfileMatrix& m, const DefectMap& defects, const ReductionRun& run,
                 std::size_t suite_size, std::size_t replication, bool keep_log) {
  RepOutcome out;
  out.rd = rd_pct(suite_size, run.selected.size());
  out.selected = run.selected.size();
  out.revealed.assign(defects.defects().size(), false);
  for (auto t : run.selected) {
    if (auto d = defects.defect_of(t)) out.revealed[*d] = true;
  }
  out.df = 100.0 * static_cast<double>(std::count(out.revealed.begin(), out.revealed.end(), true)) /
           static_cast<double>(out.revealed.size());
  if (keep_log) {
    out.log.replication = replication;
    out.log.seed = run.seed;
    for (auto t : run.selected) out.log.selected.push_back(m.test_ids()[t]);
  }
  return out;
}

ExperimentReport merge(const DefectMap& defects, std::vector<RepOutcome>& outcomes,
                       std::vector<SelectionLog>* log) {
  ExperimentReport report;
  report.replications = outcomes.size();
  report.defects = defects.defects();
  report.reveal_frequency.assign(defects.defects().size(), 0.0);
  double rd = 0.0;
  double df = 0.0;
  double sel = 0.0;
  for (auto& o : outcomes) {
    rd += o.rd;
    df += o.df;
    sel += static_cast<double>(o.selected);
    for (std::size_t d = 0; d < o.revealed.size(); ++d) {
      if (o.revealed[d]) report.reveal_frequency[d] += 1.0;
    }
    if (log) log->push_back(std::move(o.log));
  }
  const auto reps = static_cast<double>(outcomes.size());
  report.rd_pct = rd / reps;
  report.df_pct = df / reps;
  report.mean_selected = sel / reps;
  for (auto& f : report.reveal_frequency) f /= reps;
  return report;
}

}  // namespace

ExperimentReport run_experiment(const ProfileMatrix& m, const DefectMap& defects,
                                const ExperimentOptions& options,
                                std::vector<SelectionLog>* log) {
  if (options.replications < 1) throw InputError("replications must be >= 1");
  if (m.test_count() == 0) throw DomainError("cannot reduce an empty suite");
  if (defects.test_count() != m.test_count()) throw InvariantError("defect map / matrix mismatch");

  std::vector<RepOutcome> outcomes(options.replications);
  parallel_for(options.replications, options.jobs, [&](std::size_t r) {
    const ReductionRun run = greedy_reduce(m, mix_seed(options.seed, r));
    outcomes[r] = score(m, defects, run, m.test_count(), r, log != nullptr);
  });
  return merge(defects, outcomes, log);
}

ExperimentReport single_failure_experiment(const ProfileMatrix& m, const DefectMap& defects,
                                           const ExperimentOptions& options,
                                           std::vector<SelectionLog>* log) {
  if (m.test_count() == 0) throw DomainError("cannot reduce an empty suite");
  if (defects.test_count() != m.test_count()) throw InvariantError("defect map / matrix mismatch");
  const std::size_t reps = 10 * defects.failure_count();

  std::vector<RepOutcome> outcomes(reps);
  parallel_for(reps, options.jobs, [&](std::size_t r) {
    const std::uint64_t rep_seed = mix_seed(options.seed, r);
    Rng sampler = make_rng(mix_seed(rep_seed, kSampleStream));

    std::vector<bool> keep(m.test_count(), true);
    std::vector<bool> revealing(m.test_count(), false);
    for (std::size_t d = 0; d < defects.defects().size(); ++d) {
      const auto& failing = defects.failing_tests(d);
      const std::size_t chosen = failing[uniform_index(sampler, failing.size())];
      for (auto t : failing) {
        if (t != chosen && !options.keep_other_failures) keep[t] = false;
      }
      revealing[chosen] = true;
    }
    std::vector<std::size_t> candidates;
    for (std::size_t t = 0; t < m.test_count(); ++t) {
      if (keep[t]) candidates.push_back(t);
    }

    ReductionRun run = greedy_reduce(m, rep_seed, candidates);
    RepOutcome out = score(m, defects, run, candidates.size(), r, log != nullptr);
    // Unsampled failures kept under keep_other_failures do not reveal anything.
    if (options.keep_other_failures) {
      out.revealed.assign(defects.defects().size(), false);
      for (auto t : run.selected) {
        if (revealing[t]) out.revealed[*defects.defect_of(t)] = true;
      }
      out.df = 100.0 *
               static_cast<double>(std::count(out.revealed.begin(), out.revealed.end(), true)) /
               static_cast<double>(out.revealed.size());
    }
    outcomes[r] = std::move(out);
  });
  return merge(defects, outcomes, log);
}

std::string_view to_string(Comparison c) noexcept {
  switch (c) {
    case Comparison::substate_better: return "substate_better";
    case Comparison::struct_better: return "struct_better";
    case Comparison::tie: return "tie";
  }
  return "?";
}

Comparison compare_reports(const ExperimentReport& structural, const ExperimentReport& substate) {
  if (substate.df_pct > structural.df_pct + kEps &&
      structural.rd_pct - substate.rd_pct < kMaxRdLoss) {
    return Comparison::substate_better;
  }
  if (structural.df_pct > substate.df_pct + kEps &&
      substate.rd_pct - structural.rd_pct < kMaxRdLoss) {
    return Comparison::struct_better;
  }
  return Comparison::tie;
}

SweepVerdict verdict(const ExperimentReport& structural,
                     std::span<const ExperimentReport> substate) {
  SweepVerdict v;
  bool any_sub = false;
  bool any_struct = false;
  for (const auto& s : substate) {
    const Comparison c = compare_reports(structural, s);
    any_sub |= c == Comparison::substate_better;
    any_struct |= c == Comparison::struct_better;
    v.per_k.push_back(c);
  }
  v.overall = any_sub ? Comparison::substate_better
                      : (any_struct ? Comparison::struct_better : Comparison::tie);
  return v;
}

bool combined_is_better(const ExperimentReport& combined, const ExperimentReport& structural,
                        const ExperimentReport& substate) {
  auto beats = [&](const ExperimentReport& other) {
    if (combined.df_pct > other.df_pct + kEps) return true;
    if (combined.df_pct < other.df_pct - kEps) return false;
    return combined.rd_pct > other.rd_pct + kEps;
  };
  return beats(structural) && beats(substate);
}

void write_report_csv(std::ostream& out, std::span<const ExperimentReport> reports) {
  std::vector<std::string> defects;
  for (const auto& r : reports) {
    for (const auto& d : r.defects) {
      if (std::find(defects.begin(), defects.end(), d) == defects.end()) defects.push_back(d);
    }
  }
  std::sort(defects.begin(), defects.end());

  std::string line = "config_id,profile_type,k_spec,replications,rd_pct,df_pct";
  for (const auto& d : defects) line += ",reveal:" + d;
  out << line << '\n';
  for (const auto& r : reports) {
    line = fmt::format("{},{},{},{},{:.6f},{:.6f}", r.config_id, r.profile_type, r.k_spec,
                       r.replications, r.rd_pct, r.df_pct);
    for (const auto& d : defects) {
      auto it = std::find(r.defects.begin(), r.defects.end(), d);
      const double f =
          it == r.defects.end() ? 0.0 : r.reveal_frequency[static_cast<std::size_t>(it - r.defects.begin())];
      line += fmt::format(",{:.6f}", f);
    }
    out << line << '\n';
  }
}

void write_selection_log(std::ostream& out, std::string_view config_id,
                         std::span<const SelectionLog> log) {
  for (const auto& entry : log) {
    nlohmann::ordered_json j;
    j["config"] = config_id;
    j["replication"] = entry.replication;
    j["seed"] = entry.seed;
    j["selected"] = entry.selected;
    out << j.dump() << '\n';
  }
}

}  // namespace substate
