#include "emopred/mathfn.hpp"

#include <cmath>
#include <stdexcept>

#include "emopred/kernels.hpp"

namespace emopred {

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  double m = kernels::active().max(logits.data(), logits.size());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

double nll_loss(std::span<const double> probs, int gold) {
  if (gold < 0 || static_cast<std::size_t>(gold) >= probs.size())
    throw std::invalid_argument("nll_loss: gold index " + std::to_string(gold) +
                                " out of range for " +
                                std::to_string(probs.size()) + " classes");
  double p = probs[static_cast<std::size_t>(gold)];
  if (p < 1e-12) p = 1e-12;
  return -std::log(p);
}

double sigmoid_stable(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cosine_similarity: length mismatch");
  const auto& k = kernels::active();
  double na = k.dot(a.data(), a.data(), a.size());
  double nb = k.dot(b.data(), b.data(), b.size());
  if (na == 0.0 || nb == 0.0) return 0.0;
  return k.dot(a.data(), b.data(), a.size()) / std::sqrt(na * nb);
}

}  // namespace emopred
