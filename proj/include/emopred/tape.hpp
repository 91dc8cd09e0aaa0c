#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emopred/tensor.hpp"

namespace emopred {

// A learnable tensor. Gradients accumulate here across a whole tape
// backward pass; the training loop zeroes them between steps, so leaves that
// never join a tape keep a zero gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { grad.zero(); }
};

using VarId = std::int32_t;

// Reverse-mode tape. Forward calls append nodes in topological order;
// backward() walks them once in reverse. One tape per training step, owned
// by a single thread.
class Tape {
 public:
  // Leaves.
  VarId constant(Tensor v);
  VarId param(Parameter& p);
  VarId embed(Parameter& table, std::size_t row);  // one row, sparse gradient

  // Primitives. Shape mismatches throw, naming both shapes.
  VarId add(VarId a, VarId b);
  VarId sub(VarId a, VarId b);
  VarId mul(VarId a, VarId b);  // elementwise
  VarId scale(VarId a, double c);
  VarId matvec(VarId w, VarId x);  // w: MxN, x: N -> M
  VarId matmul(VarId a, VarId b);  // a: MxK, b: KxN -> MxN
  VarId concat(VarId a, VarId b);
  VarId slice(VarId a, std::size_t offset, std::size_t len);
  VarId relu(VarId a);
  VarId sigmoid(VarId a);
  VarId tanh(VarId a);
  VarId sum(VarId a);
  // Stable fused -log softmax(logits)[gold]; value floored at prob 1e-12.
  VarId nll_of_softmax(VarId logits, int gold);
  VarId mean_scalars(const std::vector<VarId>& xs);

  const Tensor& value(VarId id) const { return node(id).value; }
  const Tensor& grad(VarId id) const { return node(id).grad; }

  // Gradient of a scalar loss w.r.t. every leaf; accumulates into
  // Parameter::grad for param/embed leaves.
  void backward(VarId loss);

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  enum class Op : std::uint8_t {
    kConstant, kParam, kEmbed,
    kAdd, kSub, kMul, kScale, kMatvec, kMatmul, kConcat, kSlice,
    kRelu, kSigmoid, kTanh, kSum, kNllSoftmax, kMean,
  };

  struct Node {
    Op op;
    VarId a = -1, b = -1;
    Tensor value;
    Tensor grad;
    Parameter* param = nullptr;   // kParam / kEmbed
    std::size_t index = 0;        // kEmbed row / kSlice offset
    int gold = -1;                // kNllSoftmax
    double c = 0.0;               // kScale
    std::vector<double> cache;    // kNllSoftmax probabilities
    std::vector<VarId> many;      // kMean children
  };

  Node& node(VarId id);
  const Node& node(VarId id) const;
  VarId push(Node n);
  void check(VarId id, const char* op) const;

  std::vector<Node> nodes_;
};

}  // namespace emopred
