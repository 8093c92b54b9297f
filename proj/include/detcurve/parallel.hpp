#pragma once

#include <cstddef>
#include <functional>

namespace detcurve {

/// Worker count used by the parallel loops. Resolution order: the value set
/// by set_thread_count (if > 0), the DETCURVE_THREADS environment variable,
/// then std::thread::hardware_concurrency().
int thread_count();

/// Overrides the worker count for this process; 0 restores the default.
void set_thread_count(int threads);

/// Calls body(chunk) for every chunk in [0, chunks). Chunks are claimed
/// dynamically, so callers must write per-chunk results into their own slots
/// and reduce them in chunk order to stay independent of the thread count.
void parallel_for(std::size_t chunks, const std::function<void(std::size_t)>& body);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.carry_);
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace detcurve
