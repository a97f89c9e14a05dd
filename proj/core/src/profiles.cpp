#include "substate/profiles.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "substate/errors.hpp"

namespace substate {

namespace fs = std::filesystem;

ProfileMatrix::ProfileMatrix(std::vector<std::string> test_ids,
                             std::vector<std::string> element_ids, std::vector<Bits> rows,
                             std::vector<std::string> universal_ids)
    : test_ids_(std::move(test_ids)),
      element_ids_(std::move(element_ids)),
      rows_(std::move(rows)),
      universal_ids_(std::move(universal_ids)) {
  if (rows_.size() != test_ids_.size()) {
    throw InvariantError(fmt::format("matrix has {} rows for {} tests", rows_.size(),
                                     test_ids_.size()));
  }
  for (const auto& row : rows_) {
    if (row.size() != element_ids_.size()) {
      throw InvariantError(fmt::format("matrix row has {} bits for {} elements", row.size(),
                                       element_ids_.size()));
    }
  }
}

std::vector<std::size_t> ProfileMatrix::members(std::size_t element) const {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < rows_.size(); ++t) {
    if (rows_[t][element]) out.push_back(t);
  }
  return out;
}

std::size_t ProfileMatrix::test_index(std::string_view test_id) const {
  auto it = std::find(test_ids_.begin(), test_ids_.end(), test_id);
  if (it == test_ids_.end()) throw InputError("unknown test id '" + std::string(test_id) + "'");
  return static_cast<std::size_t>(it - test_ids_.begin());
}

ProfileMatrix ProfileMatrix::without_universal() const {
  if (rows_.empty()) return *this;
  Bits all(element_count());
  all.set();
  for (const auto& row : rows_) all &= row;
  if (all.none()) return *this;

  std::vector<std::size_t> keep;
  std::vector<std::string> universal = universal_ids_;
  for (std::size_t e = 0; e < element_count(); ++e) {
    if (all[e]) {
      universal.push_back(element_ids_[e]);
    } else {
      keep.push_back(e);
    }
  }
  std::vector<std::string> ids;
  ids.reserve(keep.size());
  for (auto e : keep) ids.push_back(element_ids_[e]);
  std::vector<Bits> rows(rows_.size(), Bits(keep.size()));
  for (std::size_t t = 0; t < rows_.size(); ++t) {
    for (std::size_t j = 0; j < keep.size(); ++j) rows[t][j] = rows_[t][keep[j]];
  }
  return ProfileMatrix(test_ids_, std::move(ids), std::move(rows), std::move(universal));
}

std::string element_id(const ChannelKey& channel, std::string_view suffix) {
  return channel.id() + "#" + std::string(suffix);
}

ProfileMatrix generate_profiles(std::span<const ChannelClusters> channels,
                                std::span<const std::string> suite) {
  const std::size_t n = suite.size();
  std::vector<std::string> ids;
  std::vector<std::string> universal;
  std::vector<std::vector<std::size_t>> columns;

  auto add = [&](const ChannelKey& key, std::string_view suffix,
                 const std::vector<std::size_t>& members) {
    if (members.empty()) return;
    for (auto t : members) {
      if (t >= n) throw InvariantError("cluster member outside the suite");
    }
    std::string id = element_id(key, suffix);
    if (members.size() == n) {
      universal.push_back(std::move(id));
      return;
    }
    ids.push_back(std::move(id));
    columns.push_back(members);
  };

  for (const auto& ch : channels) {
    for (std::size_t c = 0; c < ch.clusters.size(); ++c) {
      add(ch.channel, fmt::format("c{}", c), ch.clusters[c]);
    }
    add(ch.channel, "nan", ch.nan_bucket);
    add(ch.channel, "inf", ch.inf_bucket);
  }

  std::vector<Bits> rows(n, Bits(ids.size()));
  for (std::size_t e = 0; e < columns.size(); ++e) {
    for (auto t : columns[e]) rows[t].set(e);
  }
  return ProfileMatrix({suite.begin(), suite.end()}, std::move(ids), std::move(rows),
                       std::move(universal));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos
                                                                   : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

ProfileMatrix load_coverage_matrix(std::istream& in, const MatrixLoadOptions& opts,
                                   std::string_view source) {
  const std::string src(source);
  std::string line;
  if (!next_line(in, line) || line.empty()) throw InputError(src + ": empty matrix file");

  auto header = split_csv_line(line);
  if (header.front() != "test_id") {
    throw InputError(src + ":1: header must start with 'test_id'");
  }
  std::vector<std::string> element_ids(header.begin() + 1, header.end());
  {
    std::unordered_set<std::string> seen;
    for (std::size_t c = 0; c < element_ids.size(); ++c) {
      if (element_ids[c].empty()) {
        throw InputError(fmt::format("{}:1: column {} has an empty element id", src, c + 2));
      }
      if (!seen.insert(element_ids[c]).second) {
        throw InputError(fmt::format("{}:1: duplicate element id '{}' (column {})", src,
                                     element_ids[c], c + 2));
      }
    }
  }

  std::vector<std::string> test_ids;
  std::vector<Bits> rows;
  std::unordered_set<std::string> seen_tests;
  std::size_t row_no = 1;
  while (next_line(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw InputError(fmt::format("{}:{}: expected {} cells, found {}", src, row_no,
                                   header.size(), cells.size()));
    }
    if (cells[0].empty()) throw InputError(fmt::format("{}:{}: empty test id", src, row_no));
    if (!seen_tests.insert(cells[0]).second) {
      throw InputError(fmt::format("{}:{}: duplicate test id '{}'", src, row_no, cells[0]));
    }
    Bits row(element_ids.size());
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c] == "1") {
        row.set(c - 1);
      } else if (cells[c] != "0") {
        throw InputError(fmt::format("{}:{}: column {} ('{}'): cell '{}' is not 0 or 1", src,
                                     row_no, c + 1, element_ids[c - 1], cells[c]));
      }
    }
    test_ids.push_back(std::move(cells[0]));
    rows.push_back(std::move(row));
  }
  if (test_ids.empty()) throw InputError(src + ": matrix has no test rows");

  ProfileMatrix m(std::move(test_ids), std::move(element_ids), std::move(rows));
  if (opts.keep_universal) return m;

  Bits any(m.element_count());
  for (const auto& row : m.rows()) any |= row;
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    if (!any[e]) {
      throw InputError(fmt::format("{}: column {} ('{}') is covered by no test", src, e + 2,
                                   m.element_ids()[e]));
    }
  }
  return m.without_universal();
}

ProfileMatrix load_coverage_matrix(const fs::path& file, const MatrixLoadOptions& opts) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError("cannot open matrix file " + file.string());
  return load_coverage_matrix(in, opts, file.string());
}

void write_matrix_csv(std::ostream& out, const ProfileMatrix& m) {
  std::string buf = "test_id";
  for (const auto& id : m.element_ids()) {
    buf += ',';
    buf += id;
  }
  buf += '\n';
  out << buf;
  for (std::size_t t = 0; t < m.test_count(); ++t) {
    buf = m.test_ids()[t];
    const auto& row = m.rows()[t];
    for (std::size_t e = 0; e < m.element_count(); ++e) {
      buf += row[e] ? ",1" : ",0";
    }
    buf += '\n';
    out << buf;
  }
}

void write_matrix_csv(const fs::path& file, const ProfileMatrix& m) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + file.string());
  write_matrix_csv(out, m);
  if (!out) throw InputError("write failed for " + file.string());
}

ProfileMatrix combine_matrices(std::span<const ProfileMatrix> matrices,
                               std::span<const std::string> tags) {
  if (matrices.empty()) return {};
  if (matrices.size() == 1) return matrices.front();
  if (!tags.empty() && tags.size() != matrices.size()) {
    throw InvariantError("combine_matrices: one tag per matrix required");
  }
  auto tag = [&](std::size_t i) { return tags.empty() ? fmt::format("m{}", i) : tags[i]; };

  const auto& base = matrices.front();
  const std::set<std::string> base_set(base.test_ids().begin(), base.test_ids().end());
  for (std::size_t i = 1; i < matrices.size(); ++i) {
    const std::set<std::string> other(matrices[i].test_ids().begin(),
                                      matrices[i].test_ids().end());
    if (other != base_set) {
      std::vector<std::string> diff;
      std::set_symmetric_difference(base_set.begin(), base_set.end(), other.begin(),
                                    other.end(), std::back_inserter(diff));
      throw InputError(fmt::format("cannot combine '{}' with '{}': test ids differ: {}", tag(0),
                                   tag(i), fmt::join(diff, ", ")));
    }
  }

  std::vector<std::string> ids;
  std::vector<std::string> universal;
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    for (const auto& id : matrices[i].element_ids()) ids.push_back(tag(i) + ":" + id);
    for (const auto& id : matrices[i].universal_ids()) universal.push_back(tag(i) + ":" + id);
  }

  std::vector<Bits> rows(base.test_count(), Bits(ids.size()));
  std::size_t offset = 0;
  for (const auto& m : matrices) {
    std::unordered_map<std::string_view, std::size_t> row_of;
    for (std::size_t t = 0; t < m.test_count(); ++t) row_of.emplace(m.test_ids()[t], t);
    for (std::size_t t = 0; t < base.test_count(); ++t) {
      const auto& src = m.rows()[row_of.at(base.test_ids()[t])];
      for (std::size_t e = 0; e < m.element_count(); ++e) {
        if (src[e]) rows[t].set(offset + e);
      }
    }
    offset += m.element_count();
  }
  return ProfileMatrix(base.test_ids(), std::move(ids), std::move(rows), std::move(universal));
}

std::vector<TestLabel> load_labels(std::istream& in, std::string_view source) {
  const std::string src(source);
  std::string line;
  if (!next_line(in, line) || line.empty()) throw InputError(src + ": empty labels file");
  if (line != "test_id,verdict,defect_id") {
    throw InputError(src + ":1: header must be 'test_id,verdict,defect_id'");
  }
  std::vector<TestLabel> labels;
  std::unordered_set<std::string> seen;
  std::size_t row_no = 1;
  while (next_line(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 3) {
      throw InputError(fmt::format("{}:{}: expected 3 cells, found {}", src, row_no, cells.size()));
    }
    Verdict verdict;
    if (cells[1] == "pass") {
      verdict = Verdict::pass;
    } else if (cells[1] == "fail") {
      verdict = Verdict::fail;
    } else {
      throw InputError(fmt::format("{}:{}: verdict '{}' is not pass or fail", src, row_no,
                                   cells[1]));
    }
    if (!seen.insert(cells[0]).second) {
      throw InputError(fmt::format("{}:{}: duplicate test id '{}'", src, row_no, cells[0]));
    }
    try {
      labels.push_back(TestLabel::make(cells[0], verdict,
                                       cells[2].empty() ? std::nullopt
                                                        : std::optional<std::string>(cells[2])));
    } catch (const InputError& e) {
      throw InputError(fmt::format("{}:{}: {}", src, row_no, e.what()));
    }
  }
  return labels;
}

std::vector<TestLabel> load_labels(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError("cannot open labels file " + file.string());
  return load_labels(in, file.string());
}

}  // namespace substate
