#pragma once

#include <cstdint>

namespace tmfwc {

// Per-thread instrumentation for the extraction benchmark. Every
// multiply-accumulate in a feature path and every frequency-domain transform
// on a signal path bumps the calling thread's counters.
struct OpCounters {
  std::uint64_t macs = 0;
  std::uint64_t transforms = 0;
};

OpCounters& thread_op_counters() noexcept;

// Captures the counter delta accrued on this thread during its lifetime.
class ScopedOpCount {
 public:
  ScopedOpCount() noexcept : start_(thread_op_counters()) {}

  OpCounters delta() const noexcept {
    const OpCounters& now = thread_op_counters();
    return {now.macs - start_.macs, now.transforms - start_.transforms};
  }

 private:
  OpCounters start_;
};

}  // namespace tmfwc
