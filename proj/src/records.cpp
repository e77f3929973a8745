#include "infonn/records.hpp"

#include <json.hpp>

#include <ostream>

namespace infonn {

std::string to_json_line(const ResultRecord& r) {
  nlohmann::ordered_json j;
  j["arm"] = r.arm;
  j["trial"] = r.trial;
  j["cycle"] = r.cycle;
  j["metric"] = r.metric;
  j["value"] = r.value;
  return j.dump();
}

void RecordWriter::write(const ResultRecord& r) {
  std::lock_guard lock(mutex_);
  out_ << to_json_line(r) << '\n';
  out_.flush();
  ++count_;
}

}  // namespace infonn
