#include "infonn/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace infonn {

IngestError::IngestError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Comma-separated fields; a field may be double-quoted, with "" for a literal quote.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false, was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"' && trim(field).empty()) {
      quoted = was_quoted = true;
      field.clear();
    } else if (ch == ',') {
      out.push_back(was_quoted ? field : trim(field));
      field.clear();
      was_quoted = false;
    } else if (!was_quoted) {
      field += ch;
    }
  }
  out.push_back(was_quoted ? field : trim(field));
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos && s == trim(s)) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + '"';
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_size(const std::string& s, std::size_t& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool skippable(const std::string& line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

ItemId FeatureTable::lookup(const std::string& id) const {
  const auto it = index.find(id);
  if (it == index.end()) throw std::out_of_range("unknown item id '" + id + "'");
  return ItemId{it->second};
}

std::vector<int> FeatureTable::label_codes() const {
  if (!labels) throw std::invalid_argument("feature table has no labels");
  std::vector<int> out;
  out.reserve(labels->size());
  bool numeric = true;
  for (const auto& l : *labels) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(l.data(), l.data() + l.size(), v);
    if (ec != std::errc() || ptr != l.data() + l.size()) {
      numeric = false;
      break;
    }
    out.push_back(v);
  }
  if (numeric) return out;
  const std::set<std::string> distinct(labels->begin(), labels->end());
  const std::vector<std::string> sorted(distinct.begin(), distinct.end());
  out.clear();
  for (const auto& l : *labels)
    out.push_back(static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), l) - sorted.begin()));
  return out;
}

FeatureTable parse_features(std::istream& in, const std::string& source) {
  FeatureTable t;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!skippable(line)) {
      header = split_csv(line);
      break;
    }
  }
  if (header.empty()) throw IngestError(source, std::max<std::size_t>(line_no, 1), "missing header line");
  if (header.front() != "id") throw IngestError(source, line_no, "first header column must be 'id'");

  std::optional<std::size_t> label_col, name_col;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c] == "label" && !label_col) {
      label_col = c;
    } else if (header[c] == "name" && !name_col) {
      name_col = c;
    } else {
      feature_cols.push_back(c);
      t.feature_names.push_back(header[c]);
    }
  }
  if (feature_cols.empty()) throw IngestError(source, line_no, "no feature columns");
  if (label_col) t.labels.emplace();
  if (name_col) t.names.emplace();

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw IngestError(source, line_no,
                        "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    const std::string& id = fields.front();
    if (id.empty()) throw IngestError(source, line_no, "empty id");
    if (!t.index.emplace(id, t.ids.size()).second) throw IngestError(source, line_no, "duplicate id '" + id + "'");
    t.ids.push_back(id);
    if (label_col) t.labels->push_back(fields[*label_col]);
    if (name_col) t.names->push_back(fields[*name_col]);
    std::vector<double> row;
    row.reserve(feature_cols.size());
    for (auto c : feature_cols) {
      double v = 0.0;
      if (!parse_double(fields[c], v))
        throw IngestError(source, line_no, "non-numeric value '" + fields[c] + "' in column '" + header[c] + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }

  t.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(feature_cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < feature_cols.size(); ++j)
      t.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return t;
}

FeatureTable ingest_features(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_features(in, path.string());
}

void write_features(std::ostream& out, const FeatureTable& t) {
  out << "id";
  if (t.labels) out << ",label";
  if (t.names) out << ",name";
  for (const auto& f : t.feature_names) out << ',' << csv_field(f);
  out << '\n';
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << csv_field(t.ids[i]);
    if (t.labels) out << ',' << csv_field((*t.labels)[i]);
    if (t.names) out << ',' << csv_field((*t.names)[i]);
    for (Eigen::Index j = 0; j < t.features.cols(); ++j) out << ',' << t.features(static_cast<Eigen::Index>(i), j);
    out << '\n';
  }
  out.precision(old_precision);
}

std::vector<PairedComparison> ComparisonCorpus::all_comparisons() const {
  std::vector<PairedComparison> out = triplets;
  for (const auto& r : nn_responses) {
    const auto cs = decompose_nn(r);
    out.insert(out.end(), cs.begin(), cs.end());
  }
  return out;
}

ComparisonCorpus parse_comparisons(std::istream& in, const FeatureTable& items, const std::string& source) {
  ComparisonCorpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split_csv(line);
    if (fields.size() < 3) throw IngestError(source, line_no, "need at least 3 fields");
    auto id = [&](const std::string& s) {
      const auto it = items.index.find(s);
      if (it == items.index.end()) throw IngestError(source, line_no, "unknown id '" + s + "'");
      return ItemId{it->second};
    };
    try {
      if (fields.size() == 3) {
        const PairedComparison c{id(fields[0]), id(fields[1]), id(fields[2])};
        validate_query(NNQuery{c.reference, {c.winner, c.loser}});
        corpus.triplets.push_back(c);
        continue;
      }
      NNQuery q{id(fields[0]), {}};
      for (std::size_t i = 1; i + 1 < fields.size(); ++i) q.candidates.push_back(id(fields[i]));
      std::size_t winner = 0;
      if (!parse_size(fields.back(), winner) || winner < 1 || winner > q.length())
        throw IngestError(source, line_no,
                          "winner index '" + fields.back() + "' must be an integer in 1.." + std::to_string(q.length()));
      QueryResponse r{std::move(q), winner};
      validate_response(r);
      corpus.nn_responses.push_back(std::move(r));
    } catch (const IngestError&) {
      throw;
    } catch (const std::exception& e) {
      throw IngestError(source, line_no, e.what());
    }
  }
  return corpus;
}

ComparisonCorpus ingest_comparisons(const std::filesystem::path& path, const FeatureTable& items) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_comparisons(in, items, path.string());
}

}  // namespace infonn
