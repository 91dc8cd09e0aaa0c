#include "emopred/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "emopred/kernels.hpp"

namespace emopred {

void Optimizer::require_finite_grads(std::span<Parameter* const> params) {
  for (const Parameter* p : params) {
    if (!p->grad.all_finite())
      throw std::runtime_error("optimizer: non-finite gradient in parameter '" +
                               p->name + "'");
  }
}

void Sgd::step(std::span<Parameter* const> params) {
  require_finite_grads(params);
  for (Parameter* p : params)
    kernels::active().axpy(-lr_, p->grad.data(), p->value.data(),
                           p->value.size());
  ++steps_;
}

void Adam::step(std::span<Parameter* const> params) {
  require_finite_grads(params);
  if (m_.empty()) {
    for (Parameter* p : params) {
      m_.emplace_back(p->value.shape());
      v_.emplace_back(p->value.shape());
    }
  }
  if (m_.size() != params.size())
    throw std::runtime_error("adam: parameter list changed between steps");

  ++steps_;
  double t = static_cast<double>(steps_);
  double corr1 = 1.0 - std::pow(beta1_, t);
  double corr2 = 1.0 - std::pow(beta2_, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      double g = p.grad[j];
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
      double mhat = m[j] / corr1;
      double vhat = v[j] / corr2;
      p.value[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

std::unique_ptr<Optimizer> make_optimizer(const std::string& name, double lr) {
  if (name == "sgd") return std::make_unique<Sgd>(lr);
  if (name == "adam") return std::make_unique<Adam>(lr);
  throw std::invalid_argument("unknown optimizer '" + name + "'");
}

}  // namespace emopred
