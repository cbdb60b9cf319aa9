#pragma once

// Replication loops. Each replication writes only its own slot, so the
// parallel and serial versions produce identical result vectors.

#include <cstddef>
#include <exception>
#include <vector>

namespace sve::runner {

/// Calls fn(r) for r in [0, count) on the calling thread.
template <class Result, class Fn>
std::vector<Result> map_serial(std::size_t count, Fn&& fn) {
  std::vector<Result> out(count);
  for (std::size_t r = 0; r < count; ++r) out[r] = fn(r);
  return out;
}

/// OpenMP version of map_serial. An exception thrown by any replication is
/// rethrown after the loop; the one with the lowest index wins.
template <class Result, class Fn>
std::vector<Result> map_parallel(std::size_t count, Fn&& fn) {
  std::vector<Result> out(count);
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long r = 0; r < n; ++r) {
    try {
      out[static_cast<std::size_t>(r)] = fn(static_cast<std::size_t>(r));
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

template <class Result, class Fn>
std::vector<Result> map(std::size_t count, bool parallel, Fn&& fn) {
  return parallel ? map_parallel<Result>(count, fn) : map_serial<Result>(count, fn);
}

}  // namespace sve::runner
