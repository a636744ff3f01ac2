#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsq {

/// Raised when an operation would exceed a configured resource ceiling.
class ResourceLimit : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Process-wide ceilings.  Set once at startup (the CLI does this from its
/// config); operations read them before allocating.
struct Limits {
  std::size_t max_bytes = std::size_t{2} << 30;
  int max_derivative_order = 12;
  unsigned threads = 0;  // 0: GSQ_THREADS or hardware concurrency
};

Limits& limits();

/// Throw ResourceLimit if `count` complex doubles would exceed the ceiling.
void require_complex_capacity(std::size_t count, const std::string& what);

/// Worker count honouring GSQ_THREADS.
unsigned worker_count();

}  // namespace gsq
