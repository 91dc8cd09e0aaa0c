#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "emopred/kernels.hpp"
#include "emopred/rng.hpp"

using namespace emopred;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

const std::vector<std::size_t> kSizes = {1, 2, 3, 4, 5, 7, 8, 15, 16, 33, 100, 257};

bool nearly(double a, double b, double rel = 1e-12) {
  double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= rel * scale;
}

}  // namespace

TEST_CASE("scalar kernels match naive loops") {
  const auto& k = kernels::scalar();
  Rng rng(11);
  for (std::size_t n : kSizes) {
    std::vector<double> x = random_vec(n, rng);
    std::vector<double> y = random_vec(n, rng);
    std::vector<double> out(n);

    k.add(x.data(), y.data(), out.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == x[i] + y[i]);

    k.mul(x.data(), y.data(), out.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == x[i] * y[i]);

    k.relu(x.data(), out.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == (x[i] > 0 ? x[i] : 0.0));

    double dot = 0;
    for (std::size_t i = 0; i < n; ++i) dot += x[i] * y[i];
    CHECK(k.dot(x.data(), y.data(), n) == dot);

    double mx = x[0];
    for (double v : x) mx = std::max(mx, v);
    CHECK(k.max(x.data(), n) == mx);
  }
}

TEST_CASE("scalar matvec and its transpose agree with naive loops") {
  const auto& k = kernels::scalar();
  Rng rng(12);
  std::size_t rows = 7, cols = 13;
  std::vector<double> w = random_vec(rows * cols, rng);
  std::vector<double> x = random_vec(cols, rng);
  std::vector<double> y(rows);
  k.matvec(w.data(), x.data(), y.data(), rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double expect = 0;
    for (std::size_t c = 0; c < cols; ++c) expect += w[r * cols + c] * x[c];
    CHECK(nearly(y[r], expect));
  }

  std::vector<double> xt(cols, 0.0);
  k.matvec_t_acc(w.data(), y.data(), xt.data(), rows, cols);
  for (std::size_t c = 0; c < cols; ++c) {
    double expect = 0;
    for (std::size_t r = 0; r < rows; ++r) expect += w[r * cols + c] * y[r];
    CHECK(nearly(xt[c], expect));
  }

  std::vector<double> acc(rows * cols, 1.0);
  k.outer_acc(acc.data(), y.data(), x.data(), rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      CHECK(acc[r * cols + c] == 1.0 + y[r] * x[c]);
}

TEST_CASE("avx2 elementwise kernels are bitwise-identical to scalar") {
  const kernels::Backend* avx2 = kernels::avx2_backend();
  if (!avx2) {
    MESSAGE("AVX2 not available on this machine; equivalence not exercised");
    return;
  }
  const auto& ref = kernels::scalar();
  Rng rng(21);
  for (std::size_t n : kSizes) {
    std::vector<double> x = random_vec(n, rng);
    std::vector<double> y = random_vec(n, rng);
    std::vector<double> a(n), b(n);

    ref.add(x.data(), y.data(), a.data(), n);
    avx2->add(x.data(), y.data(), b.data(), n);
    CHECK(a == b);

    ref.sub(x.data(), y.data(), a.data(), n);
    avx2->sub(x.data(), y.data(), b.data(), n);
    CHECK(a == b);

    ref.mul(x.data(), y.data(), a.data(), n);
    avx2->mul(x.data(), y.data(), b.data(), n);
    CHECK(a == b);

    ref.scale(x.data(), 1.7, a.data(), n);
    avx2->scale(x.data(), 1.7, b.data(), n);
    CHECK(a == b);

    ref.relu(x.data(), a.data(), n);
    avx2->relu(x.data(), b.data(), n);
    CHECK(a == b);

    a = y;
    b = y;
    ref.axpy(-0.3, x.data(), a.data(), n);
    avx2->axpy(-0.3, x.data(), b.data(), n);
    CHECK(a == b);

    CHECK(ref.max(x.data(), n) == avx2->max(x.data(), n));
  }
}

TEST_CASE("avx2 row-accumulating kernels are bitwise-identical to scalar") {
  const kernels::Backend* avx2 = kernels::avx2_backend();
  if (!avx2) return;
  const auto& ref = kernels::scalar();
  Rng rng(22);
  for (std::size_t rows : {1u, 3u, 8u}) {
    for (std::size_t cols : {1u, 5u, 32u, 67u}) {
      std::vector<double> w = random_vec(rows * cols, rng);
      std::vector<double> y = random_vec(rows, rng);
      std::vector<double> x1(cols, 0.25), x2(cols, 0.25);
      ref.matvec_t_acc(w.data(), y.data(), x1.data(), rows, cols);
      avx2->matvec_t_acc(w.data(), y.data(), x2.data(), rows, cols);
      CHECK(x1 == x2);

      std::vector<double> b = random_vec(cols, rng);
      std::vector<double> w1 = w, w2 = w;
      ref.outer_acc(w1.data(), y.data(), b.data(), rows, cols);
      avx2->outer_acc(w2.data(), y.data(), b.data(), rows, cols);
      CHECK(w1 == w2);
    }
  }
}

TEST_CASE("avx2 reductions agree with scalar within tolerance") {
  const kernels::Backend* avx2 = kernels::avx2_backend();
  if (!avx2) return;
  const auto& ref = kernels::scalar();
  Rng rng(23);
  for (std::size_t n : kSizes) {
    std::vector<double> x = random_vec(n, rng);
    std::vector<double> y = random_vec(n, rng);
    CHECK(nearly(ref.dot(x.data(), y.data(), n), avx2->dot(x.data(), y.data(), n)));
    CHECK(nearly(ref.sum(x.data(), n), avx2->sum(x.data(), n)));
  }
  std::size_t rows = 9, cols = 41;
  std::vector<double> w = random_vec(rows * cols, rng);
  std::vector<double> x = random_vec(cols, rng);
  std::vector<double> y1(rows), y2(rows);
  ref.matvec(w.data(), x.data(), y1.data(), rows, cols);
  avx2->matvec(w.data(), x.data(), y2.data(), rows, cols);
  for (std::size_t r = 0; r < rows; ++r) CHECK(nearly(y1[r], y2[r]));
}

TEST_CASE("backend selection") {
  auto names = kernels::available();
  CHECK(names[0] == "scalar");
  CHECK(kernels::select("scalar"));
  CHECK(std::string(kernels::active().name) == "scalar");
  CHECK(kernels::select("auto"));
  CHECK_FALSE(kernels::select("never-heard-of-it"));
  if (kernels::avx2_backend()) {
    CHECK(kernels::select("avx2"));
    CHECK(std::string(kernels::active().name) == "avx2");
  } else {
    CHECK_FALSE(kernels::select("avx2"));
  }
  kernels::select("auto");
}
