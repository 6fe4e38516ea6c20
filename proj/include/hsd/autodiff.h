// Copyright 2026 The HSD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HSD_AUTODIFF_H_
#define HSD_AUTODIFF_H_

// Tape-based reverse-mode differentiation over dense tensors.
//
// Every op evaluates eagerly and appends a node holding its value and a
// backward rule to the tape of its inputs. Backward() walks the tape in
// reverse, accumulating gradients; nodes used by several consumers receive
// the sum of their contributions. Parameters enter the tape as leaves and
// have their gradient added to Parameter::grad.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hsd/rng.h"
#include "hsd/tensor.h"

namespace hsd {

// Trainable tensor with its accumulated gradient and Adam state.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value);

  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;
  int64_t step_count = 0;
  bool trainable = true;

  void ZeroGrad() { grad.Fill(0.0); }
};

class Tape;

// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Tensor value);
  // Leaf bound to a parameter. The parameter must outlive the tape.
  Var Param(Parameter& param);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  // Gradient of the last Backward() target with respect to v. Empty when v
  // did not influence the target.
  const Tensor& grad(Var v) const { return nodes_.at(v.id).grad; }

  // Seeds d(loss)/d(loss) = 1 and propagates to every node and parameter.
  // Throws NumericError if loss is not a scalar.
  void Backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

  // Low-level: records a node. inputs must already be on this tape.
  // backward receives the node's output gradient and must call
  // AccumulateGrad for each input it influences.
  using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;
  Var Record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);
  void AccumulateGrad(std::size_t id, const Tensor& g);
  // Grad buffer for id, allocated zeroed on first use.
  Tensor& MutableGrad(std::size_t id);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Parameter* param = nullptr;
  };
  std::vector<Node> nodes_;
};

// Elementwise arithmetic; shapes must match.
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double factor);
// x[..., n] + bias[n], broadcast over leading axes.
Var AddBias(Var x, Var bias);
// [m, k] x [k, n] -> [m, n].
Var MatMul(Var a, Var b);

Var Relu(Var x);
Var Sigmoid(Var x);
Var Tanh(Var x);
// clip(0.2 x + 0.5, 0, 1).
Var HardSigmoid(Var x);

Var Sum(Var x);
Var Mean(Var x);

// Mean binary cross-entropy. probs and labels share a shape; probs are
// clipped to [1e-7, 1 - 1e-7] before the log.
inline constexpr double kBceClip = 1e-7;
Var BinaryCrossEntropy(Var probs, const Tensor& labels);

// Inverted dropout. Identity when !training or rate == 0.
// Throws NumericError unless 0 <= rate < 1.
Var Dropout(Var x, double rate, bool training, Rng& rng);

Var Concat(std::span<const Var> parts, std::size_t axis);
Var Slice(Var x, std::size_t axis, std::size_t begin, std::size_t end);
Var Reshape(Var x, Shape shape);
// Maximum over one axis, which is removed. Gradient flows to the first
// maximal position.
Var MaxOverAxis(Var x, std::size_t axis);
// Rows of table [V, D] for each index -> [n, D]. Gradient scatters back.
Var Gather(Var table, std::span<const int> indices);
// Same, reading rows straight from a parameter so the full table is not
// copied onto the tape. The gradient scatters into table.grad when the
// parameter is trainable.
Var GatherRows(Tape& tape, Parameter& table, std::span<const int> indices);

}  // namespace hsd

#endif  // HSD_AUTODIFF_H_
