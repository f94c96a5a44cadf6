#include "tmfwc/op_counters.hpp"

namespace tmfwc {

OpCounters& thread_op_counters() noexcept {
  thread_local OpCounters counters;
  return counters;
}

}  // namespace tmfwc
