#include "emopred/tape.hpp"

#include <cmath>
#include <stdexcept>

#include "emopred/kernels.hpp"
#include "emopred/mathfn.hpp"

namespace emopred {

namespace {
const double kProbFloor = 1e-12;
}

Tape::Node& Tape::node(VarId id) { return nodes_[static_cast<std::size_t>(id)]; }
const Tape::Node& Tape::node(VarId id) const {
  return nodes_[static_cast<std::size_t>(id)];
}

VarId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<VarId>(nodes_.size() - 1);
}

void Tape::check(VarId id, const char* op) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
    throw std::invalid_argument(std::string(op) + ": variable not on tape");
}

VarId Tape::constant(Tensor v) {
  Node n;
  n.op = Op::kConstant;
  n.value = std::move(v);
  return push(std::move(n));
}

VarId Tape::param(Parameter& p) {
  Node n;
  n.op = Op::kParam;
  n.value = p.value;
  n.param = &p;
  return push(std::move(n));
}

VarId Tape::embed(Parameter& table, std::size_t row) {
  if (row >= table.value.rows())
    throw std::invalid_argument("embed: row " + std::to_string(row) +
                                " out of range for " + table.value.shape_str());
  Node n;
  n.op = Op::kEmbed;
  auto r = table.value.row(row);
  n.value = Tensor::vector({r.begin(), r.end()});
  n.param = &table;
  n.index = row;
  return push(std::move(n));
}

VarId Tape::add(VarId a, VarId b) {
  check(a, "add");
  check(b, "add");
  require_same_shape(node(a).value, node(b).value, "add");
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.value = Tensor(node(a).value.shape());
  kernels::active().add(node(a).value.data(), node(b).value.data(),
                        n.value.data(), n.value.size());
  return push(std::move(n));
}

VarId Tape::sub(VarId a, VarId b) {
  check(a, "sub");
  check(b, "sub");
  require_same_shape(node(a).value, node(b).value, "sub");
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.value = Tensor(node(a).value.shape());
  kernels::active().sub(node(a).value.data(), node(b).value.data(),
                        n.value.data(), n.value.size());
  return push(std::move(n));
}

VarId Tape::mul(VarId a, VarId b) {
  check(a, "mul");
  check(b, "mul");
  require_same_shape(node(a).value, node(b).value, "mul");
  Node n;
  n.op = Op::kMul;
  n.a = a;
  n.b = b;
  n.value = Tensor(node(a).value.shape());
  kernels::active().mul(node(a).value.data(), node(b).value.data(),
                        n.value.data(), n.value.size());
  return push(std::move(n));
}

VarId Tape::scale(VarId a, double c) {
  check(a, "scale");
  Node n;
  n.op = Op::kScale;
  n.a = a;
  n.c = c;
  n.value = Tensor(node(a).value.shape());
  kernels::active().scale(node(a).value.data(), c, n.value.data(),
                          n.value.size());
  return push(std::move(n));
}

VarId Tape::matvec(VarId w, VarId x) {
  check(w, "matvec");
  check(x, "matvec");
  const Tensor& wv = node(w).value;
  const Tensor& xv = node(x).value;
  if (wv.ndim() != 2 || xv.ndim() != 1 || wv.cols() != xv.size())
    throw std::invalid_argument("matvec: shape mismatch " + wv.shape_str() +
                                " vs " + xv.shape_str());
  Node n;
  n.op = Op::kMatvec;
  n.a = w;
  n.b = x;
  n.value = Tensor({wv.rows()});
  kernels::active().matvec(wv.data(), xv.data(), n.value.data(), wv.rows(),
                           wv.cols());
  return push(std::move(n));
}

VarId Tape::matmul(VarId a, VarId b) {
  check(a, "matmul");
  check(b, "matmul");
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  if (av.ndim() != 2 || bv.ndim() != 2 || av.cols() != bv.rows())
    throw std::invalid_argument("matmul: shape mismatch " + av.shape_str() +
                                " vs " + bv.shape_str());
  Node n;
  n.op = Op::kMatmul;
  n.a = a;
  n.b = b;
  n.value = Tensor({av.rows(), bv.cols()});
  const auto& k = kernels::active();
  for (std::size_t m = 0; m < av.rows(); ++m)
    for (std::size_t kk = 0; kk < av.cols(); ++kk)
      k.axpy(av.at(m, kk), bv.row(kk).data(), n.value.row(m).data(),
             bv.cols());
  return push(std::move(n));
}

VarId Tape::concat(VarId a, VarId b) {
  check(a, "concat");
  check(b, "concat");
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  if (av.ndim() != 1 || bv.ndim() != 1)
    throw std::invalid_argument("concat: expected vectors, got " +
                                av.shape_str() + " and " + bv.shape_str());
  Node n;
  n.op = Op::kConcat;
  n.a = a;
  n.b = b;
  std::vector<double> all(av.values().begin(), av.values().end());
  all.insert(all.end(), bv.values().begin(), bv.values().end());
  n.value = Tensor::vector(std::move(all));
  return push(std::move(n));
}

VarId Tape::slice(VarId a, std::size_t offset, std::size_t len) {
  check(a, "slice");
  const Tensor& av = node(a).value;
  if (offset + len > av.size())
    throw std::invalid_argument("slice: [" + std::to_string(offset) + ", " +
                                std::to_string(offset + len) +
                                ") out of range for " + av.shape_str());
  Node n;
  n.op = Op::kSlice;
  n.a = a;
  n.index = offset;
  n.value = Tensor::vector(
      {av.values().begin() + offset, av.values().begin() + offset + len});
  return push(std::move(n));
}

VarId Tape::relu(VarId a) {
  check(a, "relu");
  Node n;
  n.op = Op::kRelu;
  n.a = a;
  n.value = Tensor(node(a).value.shape());
  kernels::active().relu(node(a).value.data(), n.value.data(), n.value.size());
  return push(std::move(n));
}

VarId Tape::sigmoid(VarId a) {
  check(a, "sigmoid");
  Node n;
  n.op = Op::kSigmoid;
  n.a = a;
  n.value = Tensor(node(a).value.shape());
  const Tensor& av = node(a).value;
  for (std::size_t i = 0; i < av.size(); ++i)
    n.value[i] = sigmoid_stable(av[i]);
  return push(std::move(n));
}

VarId Tape::tanh(VarId a) {
  check(a, "tanh");
  Node n;
  n.op = Op::kTanh;
  n.a = a;
  n.value = Tensor(node(a).value.shape());
  const Tensor& av = node(a).value;
  for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = std::tanh(av[i]);
  return push(std::move(n));
}

VarId Tape::sum(VarId a) {
  check(a, "sum");
  Node n;
  n.op = Op::kSum;
  n.a = a;
  n.value =
      Tensor::scalar(kernels::active().sum(node(a).value.data(),
                                           node(a).value.size()));
  return push(std::move(n));
}

VarId Tape::nll_of_softmax(VarId logits, int gold) {
  check(logits, "nll_of_softmax");
  const Tensor& lv = node(logits).value;
  if (lv.size() == 0)
    throw std::invalid_argument("nll_of_softmax: empty logits");
  if (gold < 0 || static_cast<std::size_t>(gold) >= lv.size())
    throw std::invalid_argument("nll_of_softmax: gold " + std::to_string(gold) +
                                " out of range for " + lv.shape_str());
  Node n;
  n.op = Op::kNllSoftmax;
  n.a = logits;
  n.gold = gold;
  n.cache = softmax(lv.values());
  double p = n.cache[static_cast<std::size_t>(gold)];
  n.value = Tensor::scalar(-std::log(p < kProbFloor ? kProbFloor : p));
  return push(std::move(n));
}

VarId Tape::mean_scalars(const std::vector<VarId>& xs) {
  if (xs.empty())
    throw std::invalid_argument("mean_scalars: empty input");
  double acc = 0.0;
  for (VarId x : xs) {
    check(x, "mean_scalars");
    if (node(x).value.size() != 1)
      throw std::invalid_argument("mean_scalars: inputs must be scalars");
    acc += node(x).value[0];
  }
  Node n;
  n.op = Op::kMean;
  n.many = xs;
  n.value = Tensor::scalar(acc / static_cast<double>(xs.size()));
  return push(std::move(n));
}

void Tape::backward(VarId loss) {
  check(loss, "backward");
  if (node(loss).value.size() != 1)
    throw std::invalid_argument("backward: loss must be a scalar, got " +
                                node(loss).value.shape_str());

  for (Node& n : nodes_) {
    n.grad = Tensor(n.value.shape());
  }
  node(loss).grad[0] = 1.0;

  const auto& k = kernels::active();
  for (std::size_t idx = nodes_.size(); idx-- > 0;) {
    Node& n = nodes_[idx];
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::kConstant:
        break;
      case Op::kParam:
        k.add(n.param->grad.data(), g.data(), n.param->grad.data(), g.size());
        break;
      case Op::kEmbed: {
        auto row = n.param->grad.row(n.index);
        k.axpy(1.0, g.data(), row.data(), row.size());
        break;
      }
      case Op::kAdd:
        k.axpy(1.0, g.data(), node(n.a).grad.data(), g.size());
        k.axpy(1.0, g.data(), node(n.b).grad.data(), g.size());
        break;
      case Op::kSub:
        k.axpy(1.0, g.data(), node(n.a).grad.data(), g.size());
        k.axpy(-1.0, g.data(), node(n.b).grad.data(), g.size());
        break;
      case Op::kMul: {
        Node& na = node(n.a);
        Node& nb = node(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          na.grad[i] += g[i] * nb.value[i];
          nb.grad[i] += g[i] * na.value[i];
        }
        break;
      }
      case Op::kScale:
        k.axpy(n.c, g.data(), node(n.a).grad.data(), g.size());
        break;
      case Op::kMatvec: {
        Node& w = node(n.a);
        Node& x = node(n.b);
        k.outer_acc(w.grad.data(), g.data(), x.value.data(), w.value.rows(),
                    w.value.cols());
        k.matvec_t_acc(w.value.data(), g.data(), x.grad.data(), w.value.rows(),
                       w.value.cols());
        break;
      }
      case Op::kMatmul: {
        Node& a = node(n.a);
        Node& b = node(n.b);
        // dA = g B^T, dB = A^T g
        for (std::size_t m = 0; m < a.value.rows(); ++m)
          for (std::size_t kk = 0; kk < a.value.cols(); ++kk) {
            a.grad.at(m, kk) +=
                k.dot(g.row(m).data(), b.value.row(kk).data(), g.cols());
            k.axpy(a.value.at(m, kk), g.row(m).data(), b.grad.row(kk).data(),
                   g.cols());
          }
        break;
      }
      case Op::kConcat: {
        Node& a = node(n.a);
        Node& b = node(n.b);
        k.axpy(1.0, g.data(), a.grad.data(), a.grad.size());
        k.axpy(1.0, g.data() + a.grad.size(), b.grad.data(), b.grad.size());
        break;
      }
      case Op::kSlice:
        k.axpy(1.0, g.data(), node(n.a).grad.data() + n.index, g.size());
        break;
      case Op::kRelu: {
        Node& a = node(n.a);
        for (std::size_t i = 0; i < g.size(); ++i)
          if (n.value[i] > 0.0) a.grad[i] += g[i];
        break;
      }
      case Op::kSigmoid: {
        Node& a = node(n.a);
        for (std::size_t i = 0; i < g.size(); ++i)
          a.grad[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
        break;
      }
      case Op::kTanh: {
        Node& a = node(n.a);
        for (std::size_t i = 0; i < g.size(); ++i)
          a.grad[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
        break;
      }
      case Op::kSum: {
        Node& a = node(n.a);
        for (std::size_t i = 0; i < a.grad.size(); ++i) a.grad[i] += g[0];
        break;
      }
      case Op::kNllSoftmax: {
        Node& a = node(n.a);
        for (std::size_t i = 0; i < a.grad.size(); ++i) {
          double onehot = (static_cast<int>(i) == n.gold) ? 1.0 : 0.0;
          a.grad[i] += g[0] * (n.cache[i] - onehot);
        }
        break;
      }
      case Op::kMean: {
        double share = g[0] / static_cast<double>(n.many.size());
        for (VarId c : n.many) node(c).grad[0] += share;
        break;
      }
    }
  }
}

}  // namespace emopred
