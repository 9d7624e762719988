#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "artigen/numcore/params.hpp"
#include "artigen/numcore/tensor.hpp"

namespace artigen::numcore {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Linear record of a forward computation. Entries are appended in evaluation
// order, which is already a topological order, so the reverse sweep is a plain
// backwards walk. One tape belongs to one thread.
//
// A tape built with recording=false still evaluates every op but keeps no
// backward closures; use it for inference.
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const noexcept { return recording_; }

  Var constant(Tensor value);
  // Leaf bound to a named entry of `params`; gradients are reported under that name.
  Var param(const ParamSet& params, const std::string& name);

  const Tensor& value(const Var& v) const { return nodes_.at(v.id()).value; }
  const Tensor& value_at(std::size_t id) const { return nodes_.at(id).value; }
  std::size_t size() const noexcept { return nodes_.size(); }

  // Reverse sweep from a scalar loss. Every parameter in `params` gets an
  // entry; parameters the loss does not reach get zeros.
  Gradients backward(const Var& loss, const ParamSet& params);

  using BackwardFn = std::function<void(Tape&, std::size_t self)>;
  // Appends an op result. `inputs` decide whether the result needs a gradient.
  Var push(Tensor value, std::span<const Var> inputs, BackwardFn backward, const char* op);

  Tensor& grad_of(std::size_t id);
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool grad_init = false;
    bool needs_grad = false;
    BackwardFn backward;
    std::string param_name;
  };
  std::vector<Node> nodes_;
  bool recording_;
};

// The traced op set. Anything else composes from these.
Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var sum(const Var& a);
Var mean(const Var& a);
Var square(const Var& a);
Var concat(std::span<const Var> parts, std::size_t axis);
Var slice(const Var& a, std::size_t axis, std::size_t begin, std::size_t end);
Var broadcast(const Var& a, const Shape& shape);

// Compositions.
Var scale(const Var& a, double factor);
Var sub(const Var& a, const Var& b);
Var mse(const Var& a, const Var& b);
Var mse(const Var& a, const Tensor& target);
// x * w + b with b broadcast over rows.
Var affine(const Var& x, const Var& w, const Var& b);

}  // namespace artigen::numcore
