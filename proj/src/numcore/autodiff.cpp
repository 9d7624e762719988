#include "artigen/numcore/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "artigen/error.hpp"

namespace artigen::numcore {

const Tensor& Var::value() const {
  if (!tape_) throw InvalidArgument("use of an unbound Var");
  return tape_->value(*this);
}

Var Tape::constant(Tensor value) {
  if (!value.all_finite()) throw NumericalError("constant contains non-finite values");
  nodes_.push_back(Node{std::move(value), {}, false, false, {}, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(const ParamSet& params, const std::string& name) {
  Node node{params.value(name), {}, false, recording_, {}, name};
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::push(Tensor value, std::span<const Var> inputs, BackwardFn backward, const char* op) {
  if (!value.all_finite()) {
    throw NumericalError(std::string(op) + " produced a non-finite value");
  }
  bool needs = false;
  if (recording_) {
    for (const auto& in : inputs) {
      if (&in.tape() != this) throw InvalidArgument(std::string(op) + ": operands live on different tapes");
      needs = needs || nodes_[in.id()].needs_grad;
    }
  }
  Node node{std::move(value), {}, false, needs, needs ? std::move(backward) : BackwardFn{}, {}};
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad_of(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.grad_init) {
    n.grad = Tensor(n.value.shape(), 0.0);
    n.grad_init = true;
  }
  return n.grad;
}

Gradients Tape::backward(const Var& loss, const ParamSet& params) {
  if (&loss.tape() != this || loss.id() >= nodes_.size()) {
    throw InvalidArgument("backward: loss is not on this tape");
  }
  if (!recording_) throw InvalidArgument("backward: tape was not recording");
  const Node& root = nodes_[loss.id()];
  if (root.value.size() != 1) {
    throw ShapeError("backward: loss must be scalar, got shape " + shape_string(root.value.shape()));
  }
  for (auto& n : nodes_) {
    n.grad_init = false;
    n.grad = Tensor();
  }
  if (root.needs_grad) {
    grad_of(loss.id())[0] = 1.0;
    for (std::size_t id = loss.id() + 1; id-- > 0;) {
      Node& n = nodes_[id];
      if (!n.grad_init || !n.backward) continue;
      n.backward(*this, id);
    }
  }
  Gradients grads;
  for (const auto& [name, p] : params) grads.emplace(name, Tensor(p.value.shape(), 0.0));
  for (std::size_t id = 0; id <= loss.id(); ++id) {
    const Node& n = nodes_[id];
    if (n.param_name.empty() || !n.grad_init) continue;
    auto it = grads.find(n.param_name);
    if (it == grads.end()) continue;
    it->second = add(it->second, n.grad);
  }
  return grads;
}

namespace {

void accumulate(Tape& t, const Var& v, const Tensor& g) {
  if (!t.needs_grad(v.id())) return;
  Tensor& dst = t.grad_of(v.id());
  auto d = dst.data();
  auto s = g.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  const Var in[] = {a, b};
  return a.tape().push(matmul(a.value(), b.value()), in,
                       [a, b](Tape& t, std::size_t self) {
                         const Tensor& g = t.grad_of(self);
                         if (t.needs_grad(a.id())) accumulate(t, a, matmul_nt(g, b.value()));
                         if (t.needs_grad(b.id())) accumulate(t, b, matmul_tn(a.value(), g));
                       },
                       "matmul");
}

Var add(const Var& a, const Var& b) {
  const Var in[] = {a, b};
  return a.tape().push(add(a.value(), b.value()), in,
                       [a, b](Tape& t, std::size_t self) {
                         const Tensor g = t.grad_of(self);
                         accumulate(t, a, g);
                         accumulate(t, b, g);
                       },
                       "add");
}

Var mul(const Var& a, const Var& b) {
  const Var in[] = {a, b};
  return a.tape().push(mul(a.value(), b.value()), in,
                       [a, b](Tape& t, std::size_t self) {
                         const Tensor g = t.grad_of(self);
                         if (t.needs_grad(a.id())) accumulate(t, a, mul(g, b.value()));
                         if (t.needs_grad(b.id())) accumulate(t, b, mul(g, a.value()));
                       },
                       "mul");
}

Var relu(const Var& a) {
  const Var in[] = {a};
  return a.tape().push(relu(a.value()), in,
                       [a](Tape& t, std::size_t self) {
                         Tensor g = t.grad_of(self);
                         auto x = a.value().data();
                         auto d = g.data();
                         for (std::size_t i = 0; i < d.size(); ++i) {
                           if (!(x[i] > 0.0)) d[i] = 0.0;
                         }
                         accumulate(t, a, g);
                       },
                       "relu");
}

Var sigmoid(const Var& a) {
  const Var in[] = {a};
  return a.tape().push(sigmoid(a.value()), in,
                       [a](Tape& t, std::size_t self) {
                         Tensor g = t.grad_of(self);
                         auto y = t.value_at(self).data();
                         auto d = g.data();
                         for (std::size_t i = 0; i < d.size(); ++i) d[i] *= y[i] * (1.0 - y[i]);
                         accumulate(t, a, g);
                       },
                       "sigmoid");
}

Var sum(const Var& a) {
  const Var in[] = {a};
  return a.tape().push(Tensor::scalar(sum(a.value())), in,
                       [a](Tape& t, std::size_t self) {
                         const double g = t.grad_of(self)[0];
                         accumulate(t, a, Tensor(a.shape(), g));
                       },
                       "sum");
}

Var mean(const Var& a) {
  const Var in[] = {a};
  return a.tape().push(Tensor::scalar(mean(a.value())), in,
                       [a](Tape& t, std::size_t self) {
                         const double g = t.grad_of(self)[0] / static_cast<double>(a.value().size());
                         accumulate(t, a, Tensor(a.shape(), g));
                       },
                       "mean");
}

Var square(const Var& a) {
  const Var in[] = {a};
  return a.tape().push(square(a.value()), in,
                       [a](Tape& t, std::size_t self) {
                         Tensor g = t.grad_of(self);
                         auto x = a.value().data();
                         auto d = g.data();
                         for (std::size_t i = 0; i < d.size(); ++i) d[i] *= 2.0 * x[i];
                         accumulate(t, a, g);
                       },
                       "square");
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  std::vector<Tensor> values;
  values.reserve(parts.size());
  for (const auto& p : parts) values.push_back(p.value());
  std::vector<Var> inputs(parts.begin(), parts.end());
  Tape& tape = parts.front().tape();
  return tape.push(concat(values, axis), inputs,
                   [inputs, axis](Tape& t, std::size_t self) {
                     const Tensor g = t.grad_of(self);
                     std::size_t offset = 0;
                     for (const auto& in : inputs) {
                       const std::size_t extent = axis == 0 ? in.value().rows() : in.value().cols();
                       if (t.needs_grad(in.id())) accumulate(t, in, slice(g, axis, offset, offset + extent));
                       offset += extent;
                     }
                   },
                   "concat");
}

Var slice(const Var& a, std::size_t axis, std::size_t begin, std::size_t end) {
  const Var in[] = {a};
  return a.tape().push(slice(a.value(), axis, begin, end), in,
                       [a, axis, begin, end](Tape& t, std::size_t self) {
                         const Tensor g = t.grad_of(self);
                         if (!t.needs_grad(a.id())) return;
                         Tensor& dst = t.grad_of(a.id());
                         if (axis == 0) {
                           auto d = dst.data();
                           auto s = g.data();
                           const std::size_t off = begin * dst.cols();
                           for (std::size_t i = 0; i < s.size(); ++i) d[off + i] += s[i];
                         } else {
                           for (std::size_t r = 0; r < g.rows(); ++r) {
                             for (std::size_t c = 0; c < end - begin; ++c) dst(r, begin + c) += g(r, c);
                           }
                         }
                       },
                       "slice");
}

Var broadcast(const Var& a, const Shape& shape) {
  const Var in[] = {a};
  return a.tape().push(broadcast(a.value(), shape), in,
                       [a](Tape& t, std::size_t self) {
                         accumulate(t, a, reduce_to(t.grad_of(self), a.shape()));
                       },
                       "broadcast");
}

Var scale(const Var& a, double factor) {
  Var k = a.tape().constant(Tensor::scalar(factor));
  return mul(a, broadcast(k, a.shape()));
}

Var sub(const Var& a, const Var& b) { return add(a, scale(b, -1.0)); }

Var mse(const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("mse: shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  return mean(square(sub(a, b)));
}

Var mse(const Var& a, const Tensor& target) {
  if (a.shape() != target.shape()) {
    throw ShapeError("mse: shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(target.shape()));
  }
  return mean(square(add(a, a.tape().constant(scaled(target, -1.0)))));
}

Var affine(const Var& x, const Var& w, const Var& b) {
  Var xw = matmul(x, w);
  return add(xw, broadcast(b, xw.shape()));
}

}  // namespace artigen::numcore
