#include "emopred/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace emopred {

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (count(shape_) != data_.size())
    throw std::invalid_argument("tensor shape " + shape_str() +
                                " does not match data length " +
                                std::to_string(data_.size()));
}

Tensor Tensor::vector(std::vector<double> v) {
  std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

std::size_t Tensor::count(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                a.shape_str() + " vs " + b.shape_str());
}

}  // namespace emopred
