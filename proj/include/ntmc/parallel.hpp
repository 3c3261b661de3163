// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ntmc {

// Serial is the reference implementation; parallel must match it bit-for-bit.
enum class Exec { serial, parallel };

// Worker count from NTMC_WORKERS, else the OpenMP default.
int default_workers();
void set_workers(int n);

// Runs f(i) for i in [0, n) and returns the results in index order.
// Exceptions are rethrown from the lowest failing index.
template <class T, class F>
std::vector<T> map_cycles(std::size_t n, Exec exec, F&& f) {
  std::vector<T> out(n);
  if (exec == Exec::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace ntmc
