#include "emopred/kernels.hpp"

// AVX2 kernels (4 doubles per lane). This translation unit is built with
// -mavx2 and nothing else from the project is; callers reach it only through
// the dispatch table after a runtime CPU check.
//
// Elementwise kernels keep exactly one multiply/add per element and use no
// FMA, so they match the scalar backend bit for bit. dot/sum/matvec
// accumulate across four lanes and only match within tolerance.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace emopred::kernels {
namespace {

void v_add(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

void v_sub(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] - y[i];
}

void v_mul(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void v_scale(const double* x, double a, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) out[i] = a * x[i];
}

void v_axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double v_dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(
        acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  double r = hsum(acc);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

double v_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double r = hsum(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

double v_max(const double* x, std::size_t n) {
  std::size_t i = 0;
  double m = x[0];
  if (n >= 4) {
    __m256d vm = _mm256_loadu_pd(x);
    for (i = 4; i + 4 <= n; i += 4)
      vm = _mm256_max_pd(vm, _mm256_loadu_pd(x + i));
    __m128d lo = _mm256_castpd256_pd128(vm);
    __m128d hi = _mm256_extractf128_pd(vm, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    m = _mm_cvtsd_f64(_mm_max_sd(lo, swapped));
  }
  for (; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

void v_relu(const double* x, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_max_pd(zero, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void v_matvec(const double* w, const double* x, double* y, std::size_t rows,
              std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = v_dot(w + r * cols, x, cols);
}

void v_matvec_t_acc(const double* w, const double* y, double* x,
                    std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) v_axpy(y[r], w + r * cols, x, cols);
}

void v_outer_acc(double* w, const double* a, const double* b, std::size_t rows,
                 std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) v_axpy(a[r], b, w + r * cols, cols);
}

const Backend avx2_table = {
    "avx2", v_add, v_sub,  v_mul,    v_scale,        v_axpy,      v_dot,
    v_sum,  v_max, v_relu, v_matvec, v_matvec_t_acc, v_outer_acc,
};

}  // namespace

const Backend* avx2_backend() {
  return avx2_supported() ? &avx2_table : nullptr;
}

}  // namespace emopred::kernels

#else

namespace emopred::kernels {
const Backend* avx2_backend() { return nullptr; }
}  // namespace emopred::kernels

#endif
