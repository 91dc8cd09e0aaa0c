#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "emopred/tape.hpp"
#include "emopred/tensor.hpp"

namespace emopred {

// Applies Parameter::grad to Parameter::value. Parameter order must stay
// stable across steps; accumulator slots are keyed by position.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(std::span<Parameter* const> params) = 0;
  virtual const char* name() const = 0;
  std::size_t steps() const { return steps_; }

 protected:
  // Throws on NaN/Inf gradients, naming the parameter.
  static void require_finite_grads(std::span<Parameter* const> params);
  std::size_t steps_ = 0;
};

class Sgd : public Optimizer {
 public:
  explicit Sgd(double lr) : lr_(lr) {}
  void step(std::span<Parameter* const> params) override;
  const char* name() const override { return "sgd"; }

 private:
  double lr_;
};

class Adam : public Optimizer {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(std::span<Parameter* const> params) override;
  const char* name() const override { return "adam"; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<Tensor> m_, v_;
};

// "sgd" or "adam"; throws std::invalid_argument otherwise.
std::unique_ptr<Optimizer> make_optimizer(const std::string& name, double lr);

}  // namespace emopred
