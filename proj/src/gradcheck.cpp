#include "emopred/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace emopred {

GradCheckReport grad_check(const std::function<double()>& forward,
                           const std::function<double()>& forward_backward,
                           const std::vector<Parameter*>& params, double eps,
                           std::size_t max_coords, Rng rng) {
  double f1 = forward();
  double f2 = forward();
  if (f1 != f2)
    throw std::runtime_error(
        "grad_check: forward pass is non-deterministic (two evaluations "
        "differ)");

  for (Parameter* p : params) p->zero_grad();
  forward_backward();

  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad);

  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t pi = 0; pi < params.size(); ++pi)
    for (std::size_t ci = 0; ci < params[pi]->value.size(); ++ci)
      coords.emplace_back(pi, ci);

  if (max_coords > 0 && coords.size() > max_coords) {
    rng.shuffle(coords);
    coords.resize(max_coords);
    std::sort(coords.begin(), coords.end());
  }

  GradCheckReport report;
  report.coords_checked = coords.size();
  for (auto [pi, ci] : coords) {
    Parameter& p = *params[pi];
    double saved = p.value[ci];
    double a = analytic[pi][ci];

    double rel = std::numeric_limits<double>::infinity();
    for (double h : {eps, 30.0 * eps}) {
      p.value[ci] = saved + h;
      double fp = forward();
      p.value[ci] = saved - h;
      double fm = forward();
      p.value[ci] = saved;

      double numeric = (fp - fm) / (2.0 * h);
      double denom = std::max(1e-8, std::abs(a) + std::abs(numeric));
      rel = std::min(rel, std::abs(a - numeric) / denom);
    }
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_param = p.name;
      report.worst_coord = ci;
    }
  }
  return report;
}

}  // namespace emopred
