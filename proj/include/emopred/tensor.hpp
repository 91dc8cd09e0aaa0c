#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace emopred {

// Dense row-major tensor of doubles. Rank 1 and 2 cover everything in this
// codebase; the shape vector stays general anyway.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(count(shape_), 0.0) {}

  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor zeros(std::vector<std::size_t> shape) {
    return Tensor(std::move(shape));
  }
  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor vector(std::vector<double> v);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t ndim() const { return shape_.size(); }

  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols(), cols()};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols(), cols()};
  }

  std::span<const double> values() const { return {data_.data(), data_.size()}; }

  void fill(double v) { data_.assign(data_.size(), v); }
  void zero() { fill(0.0); }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;

  std::string shape_str() const;

 private:
  static std::size_t count(const std::vector<std::size_t>& shape);

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// Throws std::invalid_argument naming both shapes when they differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace emopred
