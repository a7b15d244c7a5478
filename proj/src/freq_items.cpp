#include "fdsketch/freq_items.hpp"

#include <algorithm>
#include <limits>

namespace fdsk {

void FiSummary::update(std::uint64_t item) {
  n_ += 1;
  auto it = counters_.find(item);
  if (it != counters_.end()) {
    it->second += 1.0;
  } else if (counters_.size() < ell_) {
    counters_.emplace(item, 1.0);
  } else {
    // All ell slots are mapped; at least one holds a zero count. Evict the
    // zero slot with the lowest item id (std::map iterates in id order).
    auto victim = counters_.end();
    for (auto c = counters_.begin(); c != counters_.end(); ++c) {
      if (c->second == 0.0) {
        victim = c;
        break;
      }
    }
    if (victim == counters_.end()) {
      throw std::logic_error("FiSummary: zero-slot invariant violated");
    }
    counters_.erase(victim);
    counters_.emplace(item, 1.0);
  }

  // If every slot now holds a positive count, decrease all of them by the
  // minimum so at least one returns to zero.
  if (counters_.size() == ell_) {
    double min_count = std::numeric_limits<double>::infinity();
    bool all_positive = true;
    for (const auto& [id, count] : counters_) {
      if (count <= 0.0) {
        all_positive = false;
        break;
      }
      min_count = std::min(min_count, count);
    }
    if (all_positive) {
      for (auto& [id, count] : counters_) {
        count = std::max(count - min_count, 0.0);
      }
    }
  }
}

double FiSummary::estimate(std::uint64_t item) const {
  auto it = counters_.find(item);
  return it == counters_.end() ? 0.0 : it->second;
}

}  // namespace fdsk
