#pragma once

#include <iosfwd>
#include <mutex>
#include <string>

namespace infonn {

/// One metric value. Streams are line-delimited JSON, one record per line,
/// emitted in (trial, arm, cycle) order.
struct ResultRecord {
  std::string arm;
  int trial = 0;
  int cycle = 0;
  std::string metric;
  double value = 0.0;
};

std::string to_json_line(const ResultRecord& r);

/// Serializes records through a single writer; flushes every line so long
/// runs can be tailed and survive crashes.
class RecordWriter {
 public:
  explicit RecordWriter(std::ostream& out) : out_(out) {}
  void write(const ResultRecord& r);
  std::size_t count() const { return count_; }

 private:
  std::ostream& out_;
  std::mutex mutex_;
  std::size_t count_ = 0;
};

}  // namespace infonn
