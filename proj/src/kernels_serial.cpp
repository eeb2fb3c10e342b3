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
#include <algorithm>
#include <atomic>
#include <omp.h>

#include <cmath>

#include "stochflow/kernels.hpp"

namespace stochflow::kernels {

namespace {
// fork/join overhead dominates on a single thread
std::atomic<Exec> g_exec{omp_get_max_threads() > 1 ? Exec::Parallel : Exec::Serial};
}

void set_default_exec(Exec e) { g_exec.store(e); }
Exec default_exec() { return g_exec.load(); }

void apply_axis(Exec e, const double* A, std::size_t rows, std::size_t cols, const double* in,
                std::size_t outer, std::size_t inner, double* out) {
  if (e == Exec::Serial)
    serial::apply_axis(A, rows, cols, in, outer, inner, out);
  else
    omp::apply_axis(A, rows, cols, in, outer, inner, out);
}
double dot(Exec e, const double* a, const double* b, std::size_t n) {
  return e == Exec::Serial ? serial::dot(a, b, n) : omp::dot(a, b, n);
}
double sum(Exec e, const double* a, std::size_t n) {
  return e == Exec::Serial ? serial::sum(a, n) : omp::sum(a, n);
}
double max_abs(Exec e, const double* a, std::size_t n) {
  return e == Exec::Serial ? serial::max_abs(a, n) : omp::max_abs(a, n);
}
void multiply(Exec e, const double* a, const double* b, double* out, std::size_t n) {
  if (e == Exec::Serial)
    serial::multiply(a, b, out, n);
  else
    omp::multiply(a, b, out, n);
}
void axpy(Exec e, double alpha, const double* x, double* y, std::size_t n) {
  if (e == Exec::Serial)
    serial::axpy(alpha, x, y, n);
  else
    omp::axpy(alpha, x, y, n);
}

namespace serial {

void apply_axis(const double* A, std::size_t rows, std::size_t cols, const double* in,
                std::size_t outer, std::size_t inner, double* out) {
  if (inner == 1) {
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t r = 0; r < rows; ++r) {
        const double* arow = A + r * cols;
        const double* src = in + o * cols;
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) s += arow[c] * src[c];
        out[o * rows + r] = s;
      }
    return;
  }
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t r = 0; r < rows; ++r) {
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
}

double dot(const double* a, const double* b, std::size_t n) {
  double total = 0.0;
  for (std::size_t start = 0; start < n; start += kReduceBlock) {
    const std::size_t stop = std::min(n, start + kReduceBlock);
    double s = 0.0;
    for (std::size_t i = start; i < stop; ++i) s += a[i] * b[i];
    total += s;
  }
  return total;
}

double sum(const double* a, std::size_t n) {
  double total = 0.0;
  for (std::size_t start = 0; start < n; start += kReduceBlock) {
    const std::size_t stop = std::min(n, start + kReduceBlock);
    double s = 0.0;
    for (std::size_t i = start; i < stop; ++i) s += a[i];
    total += s;
  }
  return total;
}

double max_abs(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace serial
}  // namespace stochflow::kernels
