#include "emopred/kernels.hpp"

// Reference kernels. Plain loops, one operation per element, no FMA and no
// reassociation so the bitwise half of the backend contract holds.

namespace emopred::kernels {
namespace {

void s_add(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}

void s_sub(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}

void s_mul(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void s_scale(const double* x, double a, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i];
}

void s_axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double s_dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double s_sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double s_max(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

void s_relu(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void s_matvec(const double* w, const double* x, double* y, std::size_t rows,
              std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = s_dot(w + r * cols, x, cols);
}

void s_matvec_t_acc(const double* w, const double* y, double* x,
                    std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) s_axpy(y[r], w + r * cols, x, cols);
}

void s_outer_acc(double* w, const double* a, const double* b, std::size_t rows,
                 std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) s_axpy(a[r], b, w + r * cols, cols);
}

}  // namespace

const Backend& scalar() {
  static const Backend k = {
      "scalar", s_add, s_sub,   s_mul,    s_scale,        s_axpy,      s_dot,
      s_sum,    s_max, s_relu,  s_matvec, s_matvec_t_acc, s_outer_acc,
  };
  return k;
}

}  // namespace emopred::kernels
