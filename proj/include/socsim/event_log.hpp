#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "socsim/document.hpp"

namespace socsim {

/// Append-only run record. Each entry is a JSON object with a "type" field;
/// append() stamps a monotonic "seq". Serialized as one sorted-key JSON
/// object per line.
class EventLog {
 public:
  void append(Json record);
  /// Moves a per-agent buffer in, preserving its order.
  void append_all(std::vector<Json>& buffer);

  const std::vector<Json>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  /// Records whose "type" equals `type`, in log order.
  std::vector<const Json*> of_type(std::string_view type) const;

  /// True once a run_end record with complete=true has been appended.
  bool complete() const;

  std::string serialize() const;
  static EventLog parse(std::string_view text);

 private:
  std::vector<Json> records_;
};

}  // namespace socsim
