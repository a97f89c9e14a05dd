#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "substate/profiles.hpp"
#include "substate/trace_model.hpp"

namespace substate {

struct ReductionRun {
  std::vector<std::size_t> selected;  // test indices in selection order
  std::size_t covered = 0;            // coverable elements (all of them are covered on return)
  std::uint64_t seed = 0;
  std::vector<std::string> uncoverable;  // element ids no candidate test covers
};

// Greedy set cover: repeatedly take the candidate test that covers the most
// still-uncovered elements, breaking ties uniformly at random, until every
// coverable element is covered. If that selects nothing but the matrix had
// universal elements removed, one candidate is drawn uniformly so those
// elements are still covered. Deterministic for a given seed.
ReductionRun greedy_reduce(const ProfileMatrix& m, std::uint64_t seed);
// Same, restricted to the listed candidate rows (ascending indices).
ReductionRun greedy_reduce(const ProfileMatrix& m, std::uint64_t seed,
                           std::span<const std::size_t> candidates);

// (1 - selected / total) * 100.
double rd_pct(std::size_t total, std::size_t selected);

// Labels aligned to a matrix's rows.
class DefectMap {
 public:
  // Every matrix test needs a label; extra labels are ignored.
  // Throws DomainError when no matrix test fails.
  DefectMap(const ProfileMatrix& m, std::span<const TestLabel> labels);

  const std::vector<std::string>& defects() const noexcept { return defects_; }
  // Index into defects() for a failing test.
  std::optional<std::size_t> defect_of(std::size_t test) const { return defect_of_[test]; }
  const std::vector<std::size_t>& failing_tests(std::size_t defect) const {
    return failing_[defect];
  }
  std::size_t failure_count() const noexcept { return failures_; }
  std::size_t test_count() const noexcept { return defect_of_.size(); }

 private:
  std::vector<std::string> defects_;  // sorted
  std::vector<std::optional<std::size_t>> defect_of_;
  std::vector<std::vector<std::size_t>> failing_;
  std::size_t failures_ = 0;
};

// 100 * |defects with a failing test in `selected`| / |defects|.
double df_pct(std::span<const std::size_t> selected, const DefectMap& defects);
// Label-only form: defects are those with at least one failing label.
// Throws DomainError when the labels contain no failure.
double df_pct(std::span<const std::string> selected, std::span<const TestLabel> labels);

struct ExperimentReport {
  std::string config_id;
  std::string profile_type;
  std::string k_spec;  // empty for structural profiles
  std::size_t replications = 0;
  double rd_pct = 0.0;
  double df_pct = 0.0;
  double mean_selected = 0.0;
  std::vector<std::string> defects;
  std::vector<double> reveal_frequency;  // fraction of replications revealing each defect
};

struct ExperimentOptions {
  std::size_t replications = 100;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  // Single-failure mode: keep the unsampled failing tests selectable (they
  // then count as non-revealing) instead of removing them.
  bool keep_other_failures = false;
};

struct SelectionLog {
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> selected;
};

// Averages rd% and df% over `replications` greedy runs; run r uses seed
// mix_seed(options.seed, r), so parallel and sequential execution agree.
ExperimentReport run_experiment(const ProfileMatrix& m, const DefectMap& defects,
                                const ExperimentOptions& options,
                                std::vector<SelectionLog>* log = nullptr);

// Each replication keeps one uniformly sampled failing test per defect,
// drops the other failing tests, and reduces the remaining suite. Runs
// 10 x (number of failing tests) replications; options.replications is
// ignored.
ExperimentReport single_failure_experiment(const ProfileMatrix& m, const DefectMap& defects,
                                           const ExperimentOptions& options,
                                           std::vector<SelectionLog>* log = nullptr);

inline constexpr double kMaxRdLoss = 20.0;  // percentage points

enum class Comparison { substate_better, struct_better, tie };
std::string_view to_string(Comparison c) noexcept;

// Higher df% wins as long as the winner's rd% is less than kMaxRdLoss points
// below the loser's.
Comparison compare_reports(const ExperimentReport& structural, const ExperimentReport& substate);

struct SweepVerdict {
  std::vector<Comparison> per_k;  // parallel to the substate reports
  Comparison overall = Comparison::tie;
};

// overall: substate_better if any k qualifies, otherwise struct_better if any
// k lets the baseline win, otherwise tie.
SweepVerdict verdict(const ExperimentReport& structural,
                     std::span<const ExperimentReport> substate);

// A combined profile is better when it beats each separate profile: higher
// df%, or equal df% with higher rd%.
bool combined_is_better(const ExperimentReport& combined, const ExperimentReport& structural,
                        const ExperimentReport& substate);

void write_report_csv(std::ostream& out, std::span<const ExperimentReport> reports);

// One JSON object per line: {"config":...,"replication":...,"seed":...,"selected":[...]}.
void write_selection_log(std::ostream& out, std::string_view config_id,
                         std::span<const SelectionLog> log);

}  // namespace substate
