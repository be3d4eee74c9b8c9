#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

namespace utrack {

struct GroundTruthRecord {
  int frame = 0;
  int det_index = 0;
  int true_id = 0;
};

/// Lookup of true identities keyed by (frame, det_index).
class GroundTruth {
 public:
  GroundTruth() = default;
  explicit GroundTruth(std::span<const GroundTruthRecord> records);

  /// Throws MissingGroundTruth naming the key.
  int true_id(int frame, int det_index) const;
  bool contains(int frame, int det_index) const { return ids_.count({frame, det_index}) != 0; }
  std::size_t size() const { return ids_.size(); }

 private:
  std::map<std::pair<int, int>, int> ids_;
};

}  // namespace utrack
