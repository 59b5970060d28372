#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "matsplat/types.hpp"

namespace matsplat {

/// Sparse class -> count histogram, entries kept sorted by class id.
class VoteHistogram {
 public:
  using Entry = std::pair<ClassId, std::uint64_t>;

  void add(ClassId c, std::uint64_t count = 1) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), c,
                               [](const Entry& e, ClassId v) { return e.first < v; });
    if (it != entries_.end() && it->first == c) it->second += count;
    else entries_.insert(it, {c, count});
  }

  void merge(const VoteHistogram& other) {
    for (const auto& [c, n] : other.entries_) add(c, n);
  }

  std::uint64_t count(ClassId c) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), c,
                               [](const Entry& e, ClassId v) { return e.first < v; });
    return (it != entries_.end() && it->first == c) ? it->second : 0;
  }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& e : entries_) t += e.second;
    return t;
  }

  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Most frequent class; ties go to the lowest id; kUnlabeled when empty.
  ClassId argmax() const {
    ClassId best = kUnlabeled;
    std::uint64_t best_count = 0;
    for (const auto& [c, n] : entries_) {
      if (n > best_count) {
        best = c;
        best_count = n;
      }
    }
    return best;
  }

  friend bool operator==(const VoteHistogram&, const VoteHistogram&) = default;

 private:
  std::vector<Entry> entries_;
};

}  // namespace matsplat
