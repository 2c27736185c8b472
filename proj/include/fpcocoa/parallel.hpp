#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fpcocoa {

/// How many OpenMP workers a data-parallel loop may use. `workers == 1` is
/// the serial reference path; 0 means "OpenMP default".
struct ExecutionPolicy {
  int workers = 1;

  static ExecutionPolicy serial() { return {1}; }
  static ExecutionPolicy parallel(int w = 0) { return {w}; }
  bool isSerial() const { return workers == 1; }
};

inline int resolvedWorkers(const ExecutionPolicy& policy) {
#ifdef _OPENMP
  return policy.workers > 0 ? policy.workers : omp_get_max_threads();
#else
  (void)policy;
  return 1;
#endif
}

/// Serial reference: body(i) for i = 0..count-1 in order.
template <class Body>
void forEachSerial(std::size_t count, Body&& body) {
  for (std::size_t i = 0; i < count; ++i) body(i);
}

/// OpenMP kernel: body(i) for every i with no ordering guarantee. Bodies must
/// write only to slot i of preallocated output. The first exception thrown by
/// any body is rethrown after the loop.
template <class Body>
void forEachParallel(std::size_t count, const ExecutionPolicy& policy, Body&& body) {
  const int workers = resolvedWorkers(policy);
  if (workers <= 1 || count <= 1) {
    forEachSerial(count, body);
    return;
  }
  std::exception_ptr failure;
  std::mutex failureMutex;
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(failureMutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

template <class Body>
void forEach(std::size_t count, const ExecutionPolicy& policy, Body&& body) {
  if (policy.isSerial()) {
    forEachSerial(count, body);
  } else {
    forEachParallel(count, policy, body);
  }
}

/// Evaluates fn(i) into slot i; the result order is the index order no matter
/// how work was scheduled.
template <class T, class Fn>
std::vector<T> mapIndexed(std::size_t count, const ExecutionPolicy& policy, Fn&& fn) {
  std::vector<T> out(count);
  forEach(count, policy, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace fpcocoa
