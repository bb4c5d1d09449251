#include "socsim/event_log.hpp"

namespace socsim {

void EventLog::append(Json record) {
  record["seq"] = records_.size();
  records_.push_back(std::move(record));
}

void EventLog::append_all(std::vector<Json>& buffer) {
  for (auto& r : buffer) append(std::move(r));
  buffer.clear();
}

std::vector<const Json*> EventLog::of_type(std::string_view type) const {
  std::vector<const Json*> out;
  for (const auto& r : records_)
    if (r.value("type", std::string()) == type) out.push_back(&r);
  return out;
}

bool EventLog::complete() const {
  for (auto it = records_.rbegin(); it != records_.rend(); ++it)
    if (it->value("type", std::string()) == "run_end") return it->value("complete", false);
  return false;
}

std::string EventLog::serialize() const {
  std::string out;
  for (const auto& r : records_) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

EventLog EventLog::parse(std::string_view text) {
  EventLog log;
  std::size_t start = 0, lineno = 1;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    if (!trim(line).empty()) {
      try {
        log.records_.push_back(Json::parse(line));
      } catch (const Json::parse_error& e) {
        throw IoError("events.log line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    start = end + 1;
    ++lineno;
  }
  return log;
}

}  // namespace socsim
