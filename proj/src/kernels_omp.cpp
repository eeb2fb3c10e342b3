/*
   Copyright 2026 The stochflow Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "stochflow/kernels.hpp"

namespace stochflow::kernels::omp {

namespace {
// below this many multiply-adds a parallel region costs more than it saves
constexpr std::size_t kMinWork = 1 << 14;
}

void apply_axis(const double* A, std::size_t rows, std::size_t cols, const double* in,
                std::size_t outer, std::size_t inner, double* out) {
  const long long tasks = static_cast<long long>(outer * rows);
  const bool go = outer * rows * cols * inner >= kMinWork && !omp_in_parallel();
  if (inner == 1) {
#pragma omp parallel for schedule(static) if (go)
    for (long long o = 0; o < static_cast<long long>(outer); ++o)
      for (std::size_t r = 0; r < rows; ++r) {
        const double* arow = A + r * cols;
        const double* src = in + static_cast<std::size_t>(o) * cols;
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) s += arow[c] * src[c];
        out[static_cast<std::size_t>(o) * rows + r] = s;
      }
    return;
  }
#pragma omp parallel for schedule(static) if (go)
  for (long long t = 0; t < tasks; ++t) {
    const std::size_t o = static_cast<std::size_t>(t) / rows;
    const std::size_t r = static_cast<std::size_t>(t) % rows;
    double* dst = out + (o * rows + r) * inner;
    std::fill(dst, dst + inner, 0.0);
    const double* arow = A + r * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      const double a = arow[c];
      const double* src = in + (o * cols + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) dst[i] += a * src[i];
    }
  }
}

namespace {
template <class F>
double blocked_sum(std::size_t n, F&& term) {
  const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(nblocks, 0.0);
  const bool go = n >= kMinWork && !omp_in_parallel();
#pragma omp parallel for schedule(static) if (go)
  for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
    const std::size_t start = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t stop = std::min(n, start + kReduceBlock);
    double s = 0.0;
    for (std::size_t i = start; i < stop; ++i) s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}
}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  return blocked_sum(n, [&](std::size_t i) { return a[i] * b[i]; });
}

double sum(const double* a, std::size_t n) {
  return blocked_sum(n, [&](std::size_t i) { return a[i]; });
}

double max_abs(const double* a, std::size_t n) {
  double m = 0.0;
  const bool go = n >= kMinWork && !omp_in_parallel();
#pragma omp parallel for reduction(max : m) schedule(static) if (go)
  for (long long i = 0; i < static_cast<long long>(n); ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
  const bool go = n >= kMinWork && !omp_in_parallel();
#pragma omp parallel for schedule(static) if (go)
  for (long long i = 0; i < static_cast<long long>(n); ++i) out[i] = a[i] * b[i];
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const bool go = n >= kMinWork && !omp_in_parallel();
#pragma omp parallel for schedule(static) if (go)
  for (long long i = 0; i < static_cast<long long>(n); ++i) y[i] += alpha * x[i];
}

}  // namespace stochflow::kernels::omp
