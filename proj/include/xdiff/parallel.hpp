#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace xdiff {

/// Worker count for sampling loops and sweep fan-out.
/// Capped by the XDIFF_THREADS environment variable when set.
int worker_count();

/// Runs f(begin, end) over a partition of [0, count) on worker threads.
/// Chunks are contiguous index ranges; per-index work must not depend on
/// the partition for results to stay deterministic.
void parallel_chunks(std::size_t count,
                     const std::function<void(std::size_t, std::size_t)>& f);

/// Index-ordered extremum accumulator: merging prefers the smaller value
/// and breaks ties toward the smaller index, so reductions are independent
/// of chunk boundaries and thread scheduling.
struct MinSample {
  double value = 0.0;
  std::size_t index = static_cast<std::size_t>(-1);
  bool empty() const { return index == static_cast<std::size_t>(-1); }
  void consider(double v, std::size_t i) {
    if (empty() || v < value || (v == value && i < index)) {
      value = v;
      index = i;
    }
  }
  void merge(const MinSample& o) {
    if (!o.empty()) consider(o.value, o.index);
  }
};

struct MaxSample {
  double value = 0.0;
  std::size_t index = static_cast<std::size_t>(-1);
  bool empty() const { return index == static_cast<std::size_t>(-1); }
  void consider(double v, std::size_t i) {
    if (empty() || v > value || (v == value && i < index)) {
      value = v;
      index = i;
    }
  }
  void merge(const MaxSample& o) {
    if (!o.empty()) consider(o.value, o.index);
  }
};

}  // namespace xdiff
