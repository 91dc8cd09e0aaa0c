#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Data-parallel inner loops behind the tensor core. A scalar reference
// backend always exists; an AVX2 backend is selected at runtime when the
// CPU supports it (override with EMOPRED_KERNELS=scalar|avx2 or
// kernels::select()).
//
// Equivalence contract across backends:
//   - elementwise kernels (add, sub, mul, scale, axpy, relu), max,
//     matvec_t_acc and outer_acc produce bitwise-identical results
//     (same per-element operation order, no FMA contraction);
//   - reductions (dot, sum, matvec) may differ in accumulation order and
//     agree only within floating-point tolerance.
// tests/test_kernels.cpp enforces both halves of this contract.

namespace emopred::kernels {

struct Backend {
  const char* name;

  void (*add)(const double* x, const double* y, double* out, std::size_t n);
  void (*sub)(const double* x, const double* y, double* out, std::size_t n);
  void (*mul)(const double* x, const double* y, double* out, std::size_t n);
  void (*scale)(const double* x, double a, double* out, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*max)(const double* x, std::size_t n);  // n >= 1
  void (*relu)(const double* x, double* out, std::size_t n);
  // y = W x, W row-major rows x cols
  void (*matvec)(const double* w, const double* x, double* y, std::size_t rows,
                 std::size_t cols);
  // x += W^T y (accumulating; row-by-row so results are order-stable)
  void (*matvec_t_acc)(const double* w, const double* y, double* x,
                       std::size_t rows, std::size_t cols);
  // W += a b^T
  void (*outer_acc)(double* w, const double* a, const double* b,
                    std::size_t rows, std::size_t cols);
};

const Backend& scalar();
bool avx2_supported();
const Backend* avx2_backend();  // null when not compiled in / unsupported

// Active backend. First call resolves EMOPRED_KERNELS (or auto-detects).
const Backend& active();

// Force a backend: "scalar", "avx2" or "auto". False if unavailable.
bool select(const std::string& name);

std::vector<std::string> available();

}  // namespace emopred::kernels
