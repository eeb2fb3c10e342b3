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
#pragma once

#include <cstddef>

// Grid kernels in two flavours: a plain serial reference and an OpenMP
// version.  Both produce bit-identical results: the per-element summation
// order is the same and reductions use fixed blocks combined in order.
namespace stochflow::kernels {

enum class Exec { Serial, Parallel };

void set_default_exec(Exec e);
Exec default_exec();

// out(o, r, i) = sum_c A(r, c) * in(o, c, i)   (A row-major rows x cols)
void apply_axis(Exec e, const double* A, std::size_t rows, std::size_t cols,
                const double* in, std::size_t outer, std::size_t inner, double* out);

double dot(Exec e, const double* a, const double* b, std::size_t n);
double sum(Exec e, const double* a, std::size_t n);
double max_abs(Exec e, const double* a, std::size_t n);

// out = a * b pointwise
void multiply(Exec e, const double* a, const double* b, double* out, std::size_t n);
// y += alpha * x
void axpy(Exec e, double alpha, const double* x, double* y, std::size_t n);

namespace serial {
void apply_axis(const double* A, std::size_t rows, std::size_t cols, const double* in,
                std::size_t outer, std::size_t inner, double* out);
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double max_abs(const double* a, std::size_t n);
void multiply(const double* a, const double* b, double* out, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace serial

namespace omp {
void apply_axis(const double* A, std::size_t rows, std::size_t cols, const double* in,
                std::size_t outer, std::size_t inner, double* out);
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double max_abs(const double* a, std::size_t n);
void multiply(const double* a, const double* b, double* out, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace omp

constexpr std::size_t kReduceBlock = 512;

// convenience overloads using the process-wide default
inline void apply_axis(const double* A, std::size_t rows, std::size_t cols, const double* in,
                       std::size_t outer, std::size_t inner, double* out) {
  apply_axis(default_exec(), A, rows, cols, in, outer, inner, out);
}
inline double dot(const double* a, const double* b, std::size_t n) { return dot(default_exec(), a, b, n); }
inline double sum(const double* a, std::size_t n) { return sum(default_exec(), a, n); }
inline double max_abs(const double* a, std::size_t n) { return max_abs(default_exec(), a, n); }

}  // namespace stochflow::kernels
