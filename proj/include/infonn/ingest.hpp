#pragma once

#include "infonn/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace infonn {

/// Parse failure carrying the 1-based line number it refers to.
class IngestError : public std::runtime_error {
 public:
  IngestError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Item table: comma-separated, header line first. Column `id` is required
/// and must come first; optional `label` and `name` columns may follow in any
/// position; every other column is a numeric feature.
struct FeatureTable {
  std::vector<std::string> ids;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd features;
  std::optional<std::vector<std::string>> labels;
  std::optional<std::vector<std::string>> names;

  std::size_t size() const { return ids.size(); }
  /// Row index of an id; throws std::out_of_range for unknown ids.
  ItemId lookup(const std::string& id) const;
  /// Labels as integers: used verbatim when all parse as integers, otherwise
  /// the sorted distinct strings are numbered from 0.
  std::vector<int> label_codes() const;

  std::map<std::string, std::size_t> index;
};

FeatureTable parse_features(std::istream& in, const std::string& source = "<stream>");
FeatureTable ingest_features(const std::filesystem::path& path);
void write_features(std::ostream& out, const FeatureTable& table);

/// Comparison corpus lines, ids as in the feature table:
///   ref,winner,loser            -> triplet
///   ref,c1,...,cC,winner_index  -> NN query with 1-based winner (C >= 2)
/// Blank lines and lines starting with '#' are skipped. Conflicting or
/// repeated lines are kept as-is.
struct ComparisonCorpus {
  std::vector<PairedComparison> triplets;
  std::vector<QueryResponse> nn_responses;

  /// Everything as paired comparisons (NN answers decomposed).
  std::vector<PairedComparison> all_comparisons() const;
};

ComparisonCorpus parse_comparisons(std::istream& in, const FeatureTable& items, const std::string& source = "<stream>");
ComparisonCorpus ingest_comparisons(const std::filesystem::path& path, const FeatureTable& items);

}  // namespace infonn
