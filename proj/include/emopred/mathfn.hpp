#pragma once

#include <span>
#include <vector>

namespace emopred {

// Max-subtracted softmax; output is non-negative and sums to 1 within 1e-9.
std::vector<double> softmax(std::span<const double> logits);

// -ln(probs[gold]) with a 1e-12 probability floor.
double nll_loss(std::span<const double> probs, int gold);

double sigmoid_stable(double x);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace emopred
