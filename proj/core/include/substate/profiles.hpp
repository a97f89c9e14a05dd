#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "substate/clustering.hpp"
#include "substate/trace_model.hpp"

namespace substate {

using Bits = boost::dynamic_bitset<std::uint64_t>;

struct ProfileElement {
  std::string id;
  std::vector<std::size_t> members;  // suite indices, ascending
};

// Tests x binary profile elements. The same type carries Substate,
// structural and combined profiles.
//
// Elements covered by every test are normally removed and their ids kept in
// universal_ids(): they constrain nothing beyond "select at least one test".
class ProfileMatrix {
 public:
  ProfileMatrix() = default;
  // rows[t] has one bit per element. Throws InvariantError on shape mismatch.
  ProfileMatrix(std::vector<std::string> test_ids, std::vector<std::string> element_ids,
                std::vector<Bits> rows, std::vector<std::string> universal_ids = {});

  const std::vector<std::string>& test_ids() const noexcept { return test_ids_; }
  const std::vector<std::string>& element_ids() const noexcept { return element_ids_; }
  const std::vector<Bits>& rows() const noexcept { return rows_; }
  const std::vector<std::string>& universal_ids() const noexcept { return universal_ids_; }

  std::size_t test_count() const noexcept { return test_ids_.size(); }
  std::size_t element_count() const noexcept { return element_ids_.size(); }
  bool bit(std::size_t test, std::size_t element) const { return rows_[test][element]; }

  std::vector<std::size_t> members(std::size_t element) const;
  std::size_t test_index(std::string_view test_id) const;  // throws InputError if absent

  // Moves every all-ones column into universal_ids(). A matrix without tests
  // has no universal columns.
  ProfileMatrix without_universal() const;

  bool operator==(const ProfileMatrix&) const = default;

 private:
  std::vector<std::string> test_ids_;
  std::vector<std::string> element_ids_;
  std::vector<Bits> rows_;
  std::vector<std::string> universal_ids_;
};

// `<channel id>#c<ordinal>`, `<channel id>#nan`, `<channel id>#inf`.
std::string element_id(const ChannelKey& channel, std::string_view suffix);

// One candidate element per normal cluster, then the NaN bucket, then the
// infinity bucket (when non-empty), channel by channel in the given order.
// Candidates covering the whole suite are discarded into universal_ids().
ProfileMatrix generate_profiles(std::span<const ChannelClusters> channels,
                                std::span<const std::string> suite);

struct MatrixLoadOptions {
  bool keep_universal = false;  // keep the input verbatim, all-zero columns included
};

// Reads a coverage matrix CSV (`test_id,<elem>,...` then one 0/1 row per
// test). Ragged rows, non-binary cells, duplicate test or element ids and
// (unless keep_universal) all-zero columns are InputErrors that name the
// row/column.
ProfileMatrix load_coverage_matrix(std::istream& in, const MatrixLoadOptions& opts = {},
                                   std::string_view source = "<matrix>");
ProfileMatrix load_coverage_matrix(const std::filesystem::path& file,
                                   const MatrixLoadOptions& opts = {});

void write_matrix_csv(std::ostream& out, const ProfileMatrix& m);
void write_matrix_csv(const std::filesystem::path& file, const ProfileMatrix& m);

// Column-wise concatenation with rows aligned to the first matrix's test
// order. With more than one input every element id gets a `<tag>:` prefix
// (tags default to m0, m1, ...). A single matrix is returned unchanged.
// Throws InputError listing the symmetric difference when test sets differ.
ProfileMatrix combine_matrices(std::span<const ProfileMatrix> matrices,
                               std::span<const std::string> tags = {});

// Labels CSV: header `test_id,verdict,defect_id`.
std::vector<TestLabel> load_labels(std::istream& in, std::string_view source = "<labels>");
std::vector<TestLabel> load_labels(const std::filesystem::path& file);

}  // namespace substate
