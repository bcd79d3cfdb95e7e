#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace cpte {

// Runs body(i) for i in [0, n) on the OpenMP team. An exception escaping a
// body is captured and the one from the lowest index is rethrown after the
// loop, so failures are reported identically for any schedule.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, bool dynamic = false) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (dynamic) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace cpte
