/* Copyright 2026 The actdiag Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef ACTDIAG_COMMON_HPP_
#define ACTDIAG_COMMON_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace actdiag {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. The message always carries the source and line.
class ParseError : public Error {
 public:
  ParseError(std::string_view source, std::size_t line, std::string_view what);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Frame predictions do not cover a sampled evaluation time.
class CoverageError : public Error {
 public:
  using Error::Error;
};

// Masked matrix / table entries are stored as quiet NaN.
inline constexpr double kMasked = std::numeric_limits<double>::quiet_NaN();
inline bool is_masked(double v) { return std::isnan(v); }

// Dense row-major matrix of doubles. Masked cells hold kMasked.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return values[r * cols + c];
  }
};

// SplitMix64 finalizer; used to derive independent per-task seeds so that
// parallel and serial runs consume identical random streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index must only
// write to its own output slot. The exception thrown by the lowest failing
// index is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = n;
  std::exception_ptr error;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace actdiag

#endif  // ACTDIAG_COMMON_HPP_
