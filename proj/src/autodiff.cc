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

#include "hsd/autodiff.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "hsd/errors.h"

namespace hsd {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

Tape& TapeOf(Var a) {
  if (a.tape == nullptr) throw NumericError("variable is not on a tape");
  return *a.tape;
}

Tape& TapeOf(Var a, Var b) {
  if (a.tape != b.tape) throw NumericError("variables live on different tapes");
  return TapeOf(a);
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw NumericError(std::string(op) + ": shape mismatch " +
                       ShapeString(a.shape()) + " vs " + ShapeString(b.shape()));
  }
}

// Axis decomposition of a shape into outer x axis x inner blocks.
struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit SplitAt(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

Parameter::Parameter(std::string name, Tensor value)
    : name(std::move(name)),
      value(std::move(value)),
      grad(this->value.shape()),
      adam_m(this->value.shape()),
      adam_v(this->value.shape()) {}

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::Record(Tensor value, std::vector<std::size_t> inputs,
                 BackwardFn backward) {
  nodes_.push_back(Node{std::move(value), Tensor(), std::move(inputs),
                        std::move(backward), nullptr});
  return Var{this, nodes_.size() - 1};
}

Var Tape::Constant(Tensor value) { return Record(std::move(value), {}, {}); }

Var Tape::Param(Parameter& param) {
  Var v = Record(param.value, {}, {});
  nodes_.back().param = &param;
  return v;
}

Tensor& Tape::MutableGrad(std::size_t id) {
  Node& node = nodes_.at(id);
  if (node.grad.empty() && !node.value.empty()) {
    node.grad = Tensor(node.value.shape());
  } else if (node.grad.shape() != node.value.shape()) {
    node.grad = Tensor(node.value.shape());
  }
  return node.grad;
}

void Tape::AccumulateGrad(std::size_t id, const Tensor& g) {
  Tensor& dst = MutableGrad(id);
  if (dst.size() != g.size()) {
    throw NumericError("gradient shape " + ShapeString(g.shape()) +
                       " does not match node shape " + ShapeString(dst.shape()));
  }
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

void Tape::Backward(Var loss) {
  if (loss.tape != this) throw NumericError("loss is not on this tape");
  if (value(loss).size() != 1) {
    throw NumericError("backward requires a scalar loss, got shape " +
                       ShapeString(value(loss).shape()));
  }
  for (auto& node : nodes_) node.grad = Tensor();
  MutableGrad(loss.id)[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.grad.empty()) continue;
    if (node.backward) node.backward(*this, node.grad);
    if (node.param != nullptr && node.param->trainable) {
      Tensor& pg = node.param->grad;
      if (pg.shape() != node.value.shape()) pg = Tensor(node.value.shape());
      for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += node.grad[k];
    }
  }
}

Var Add(Var a, Var b) {
  Tape& tape = TapeOf(a, b);
  RequireSameShape(a.value(), b.value(), "add");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const std::size_t aid = a.id, bid = b.id;
  return tape.Record(std::move(out), {aid, bid},
                     [aid, bid](Tape& t, const Tensor& g) {
                       t.AccumulateGrad(aid, g);
                       t.AccumulateGrad(bid, g);
                     });
}

Var Sub(Var a, Var b) {
  Tape& tape = TapeOf(a, b);
  RequireSameShape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const std::size_t aid = a.id, bid = b.id;
  return tape.Record(std::move(out), {aid, bid},
                     [aid, bid](Tape& t, const Tensor& g) {
                       t.AccumulateGrad(aid, g);
                       Tensor& gb = t.MutableGrad(bid);
                       for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                     });
}

Var Mul(Var a, Var b) {
  Tape& tape = TapeOf(a, b);
  RequireSameShape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t aid = a.id, bid = b.id;
  return tape.Record(
      std::move(out), {aid, bid}, [aid, bid](Tape& t, const Tensor& g) {
        // Read values before touching grads of either input.
        const Tensor& av = t.value(Var{&t, aid});
        const Tensor& bv = t.value(Var{&t, bid});
        Tensor& ga = t.MutableGrad(aid);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        Tensor& gb = t.MutableGrad(bid);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
      });
}

Var Scale(Var a, double factor) {
  Tape& tape = TapeOf(a);
  Tensor out = a.value();
  for (double& v : out.values()) v *= factor;
  const std::size_t aid = a.id;
  return tape.Record(std::move(out), {aid},
                     [aid, factor](Tape& t, const Tensor& g) {
                       Tensor& ga = t.MutableGrad(aid);
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         ga[i] += factor * g[i];
                       }
                     });
}

Var AddBias(Var x, Var bias) {
  Tape& tape = TapeOf(x, bias);
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (bv.rank() != 1 || xv.rank() == 0 || xv.shape().back() != bv.size()) {
    throw NumericError("add_bias: shape mismatch " + ShapeString(xv.shape()) +
                       " vs " + ShapeString(bv.shape()));
  }
  Tensor out = xv;
  const std::size_t n = bv.size();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i % n];
  const std::size_t xid = x.id, bid = bias.id;
  return tape.Record(std::move(out), {xid, bid},
                     [xid, bid, n](Tape& t, const Tensor& g) {
                       t.AccumulateGrad(xid, g);
                       Tensor& gb = t.MutableGrad(bid);
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         gb[i % n] += g[i];
                       }
                     });
}

Var MatMul(Var a, Var b) {
  Tape& tape = TapeOf(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0)) {
    throw NumericError("matmul: incompatible shapes " +
                       ShapeString(av.shape()) + " x " +
                       ShapeString(bv.shape()));
  }
  const std::size_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  Tensor out({m, n});
  MatrixMap(out.data(), m, n).noalias() =
      ConstMatrixMap(av.data(), m, k) * ConstMatrixMap(bv.data(), k, n);
  const std::size_t aid = a.id, bid = b.id;
  return tape.Record(
      std::move(out), {aid, bid}, [aid, bid, m, k, n](Tape& t, const Tensor& g) {
        ConstMatrixMap gm(g.data(), m, n);
        {
          const Tensor& bv = t.value(Var{&t, bid});
          Tensor& ga = t.MutableGrad(aid);
          MatrixMap(ga.data(), m, k).noalias() +=
              gm * ConstMatrixMap(bv.data(), k, n).transpose();
        }
        {
          const Tensor& av = t.value(Var{&t, aid});
          Tensor& gb = t.MutableGrad(bid);
          MatrixMap(gb.data(), k, n).noalias() +=
              ConstMatrixMap(av.data(), m, k).transpose() * gm;
        }
      });
}

namespace {

// Elementwise op whose derivative is a function of (input, output).
template <typename F, typename DF>
Var Elementwise(Var x, F f, DF df) {
  Tape& tape = TapeOf(x);
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  const std::size_t xid = x.id;
  const std::size_t yid = tape.size();
  return tape.Record(std::move(out), {xid},
                     [xid, yid, df](Tape& t, const Tensor& g) {
                       const Tensor& xv = t.value(Var{&t, xid});
                       const Tensor& yv = t.value(Var{&t, yid});
                       Tensor& gx = t.MutableGrad(xid);
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         gx[i] += g[i] * df(xv[i], yv[i]);
                       }
                     });
}

double StableSigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var Relu(Var x) {
  return Elementwise(
      x, [](double v) { return v > 0 ? v : 0.0; },
      [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Var Sigmoid(Var x) {
  return Elementwise(x, StableSigmoid,
                     [](double, double y) { return y * (1.0 - y); });
}

Var Tanh(Var x) {
  return Elementwise(
      x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Var HardSigmoid(Var x) {
  return Elementwise(
      x, [](double v) { return std::clamp(0.2 * v + 0.5, 0.0, 1.0); },
      [](double v, double) { return (v > -2.5 && v < 2.5) ? 0.2 : 0.0; });
}

Var Sum(Var x) {
  Tape& tape = TapeOf(x);
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  const std::size_t xid = x.id;
  return tape.Record(Tensor::Scalar(total), {xid},
                     [xid](Tape& t, const Tensor& g) {
                       Tensor& gx = t.MutableGrad(xid);
                       for (double& v : gx.values()) v += g[0];
                     });
}

Var Mean(Var x) {
  const std::size_t n = x.value().size();
  if (n == 0) throw NumericError("mean of an empty tensor");
  return Scale(Sum(x), 1.0 / static_cast<double>(n));
}

Var BinaryCrossEntropy(Var probs, const Tensor& labels) {
  Tape& tape = TapeOf(probs);
  const Tensor& p = probs.value();
  if (p.shape() != labels.shape()) {
    throw NumericError("binary_cross_entropy: shape mismatch " +
                       ShapeString(p.shape()) + " vs " +
                       ShapeString(labels.shape()));
  }
  if (p.size() == 0) throw NumericError("binary_cross_entropy: no samples");
  const double n = static_cast<double>(p.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kBceClip, 1.0 - kBceClip);
    loss -= labels[i] * std::log(q) + (1.0 - labels[i]) * std::log(1.0 - q);
  }
  const std::size_t pid = probs.id;
  return tape.Record(
      Tensor::Scalar(loss / n), {pid},
      [pid, labels, n](Tape& t, const Tensor& g) {
        const Tensor& pv = t.value(Var{&t, pid});
        Tensor& gp = t.MutableGrad(pid);
        for (std::size_t i = 0; i < pv.size(); ++i) {
          const double q = pv[i];
          if (q < kBceClip || q > 1.0 - kBceClip) continue;
          const double y = labels[i];
          gp[i] += g[0] * (-y / q + (1.0 - y) / (1.0 - q)) / n;
        }
      });
}

Var Dropout(Var x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw NumericError("dropout rate must be in [0, 1), got " +
                       std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  Tensor mask(x.shape());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask.values()) m = rng.Uniform() < rate ? 0.0 : keep_scale;
  return Mul(x, TapeOf(x).Constant(std::move(mask)));
}

Var Concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw NumericError("concat of nothing");
  Tape& tape = TapeOf(parts[0]);
  const Shape base = parts[0].shape();
  if (axis >= base.size()) throw NumericError("concat: axis out of range");
  Shape out_shape = base;
  out_shape[axis] = 0;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> extents;
  for (const Var& p : parts) {
    TapeOf(parts[0], p);
    Shape s = p.shape();
    if (s.size() != base.size()) throw NumericError("concat: rank mismatch");
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != axis && s[d] != base[d]) {
        throw NumericError("concat: shape mismatch " + ShapeString(s) +
                           " vs " + ShapeString(base));
      }
    }
    out_shape[axis] += s[axis];
    ids.push_back(p.id);
    extents.push_back(s[axis]);
  }
  const AxisSplit split = SplitAt(out_shape, axis);
  Tensor out(out_shape);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = parts[k].value();
    const std::size_t block = extents[k] * split.inner;
    for (std::size_t o = 0; o < split.outer; ++o) {
      std::copy_n(pv.data() + o * block, block,
                  out.data() + (o * split.extent + offset) * split.inner);
    }
    offset += extents[k];
  }
  return tape.Record(
      std::move(out), ids, [ids, extents, split](Tape& t, const Tensor& g) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
          const std::size_t block = extents[k] * split.inner;
          Tensor& gp = t.MutableGrad(ids[k]);
          for (std::size_t o = 0; o < split.outer; ++o) {
            const double* src = g.data() + (o * split.extent + off) * split.inner;
            double* dst = gp.data() + o * block;
            for (std::size_t i = 0; i < block; ++i) dst[i] += src[i];
          }
          off += extents[k];
        }
      });
}

Var Slice(Var x, std::size_t axis, std::size_t begin, std::size_t end) {
  Tape& tape = TapeOf(x);
  const Shape in_shape = x.shape();
  if (axis >= in_shape.size() || begin > end || end > in_shape[axis]) {
    throw NumericError("slice [" + std::to_string(begin) + ", " +
                       std::to_string(end) + ") on axis " +
                       std::to_string(axis) + " out of range for " +
                       ShapeString(in_shape));
  }
  const AxisSplit split = SplitAt(in_shape, axis);
  Shape out_shape = in_shape;
  out_shape[axis] = end - begin;
  Tensor out(out_shape);
  const std::size_t block = (end - begin) * split.inner;
  const Tensor& xv = x.value();
  for (std::size_t o = 0; o < split.outer; ++o) {
    std::copy_n(xv.data() + (o * split.extent + begin) * split.inner, block,
                out.data() + o * block);
  }
  const std::size_t xid = x.id;
  return tape.Record(std::move(out), {xid},
                     [xid, split, begin, block](Tape& t, const Tensor& g) {
                       Tensor& gx = t.MutableGrad(xid);
                       for (std::size_t o = 0; o < split.outer; ++o) {
                         double* dst =
                             gx.data() + (o * split.extent + begin) * split.inner;
                         const double* src = g.data() + o * block;
                         for (std::size_t i = 0; i < block; ++i) dst[i] += src[i];
                       }
                     });
}

Var Reshape(Var x, Shape shape) {
  Tape& tape = TapeOf(x);
  if (ShapeSize(shape) != x.value().size()) {
    throw NumericError("reshape " + ShapeString(x.shape()) + " -> " +
                       ShapeString(shape) + " changes the element count");
  }
  const std::size_t xid = x.id;
  return tape.Record(x.value().Reshaped(std::move(shape)), {xid},
                     [xid](Tape& t, const Tensor& g) {
                       Tensor& gx = t.MutableGrad(xid);
                       for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                     });
}

Var MaxOverAxis(Var x, std::size_t axis) {
  Tape& tape = TapeOf(x);
  const Shape in_shape = x.shape();
  if (axis >= in_shape.size()) throw NumericError("max: axis out of range");
  if (in_shape[axis] == 0) throw NumericError("max over an empty axis");
  const AxisSplit split = SplitAt(in_shape, axis);
  Shape out_shape = in_shape;
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  Tensor out(out_shape);
  // Flat input offset of the winning element for each output element.
  std::vector<std::size_t> argmax(out.size());
  const Tensor& xv = x.value();
  for (std::size_t o = 0; o < split.outer; ++o) {
    for (std::size_t i = 0; i < split.inner; ++i) {
      std::size_t best = o * split.extent * split.inner + i;
      for (std::size_t e = 1; e < split.extent; ++e) {
        const std::size_t idx = (o * split.extent + e) * split.inner + i;
        if (xv[idx] > xv[best]) best = idx;
      }
      out[o * split.inner + i] = xv[best];
      argmax[o * split.inner + i] = best;
    }
  }
  const std::size_t xid = x.id;
  return tape.Record(std::move(out), {xid},
                     [xid, argmax = std::move(argmax)](Tape& t, const Tensor& g) {
                       Tensor& gx = t.MutableGrad(xid);
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         gx[argmax[i]] += g[i];
                       }
                     });
}

Var Gather(Var table, std::span<const int> indices) {
  Tape& tape = TapeOf(table);
  const Tensor& tv = table.value();
  if (tv.rank() != 2) throw NumericError("gather: table must be a matrix");
  const std::size_t rows = tv.dim(0), cols = tv.dim(1);
  std::vector<int> ids(indices.begin(), indices.end());
  Tensor out({ids.size(), cols});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= rows) {
      throw NumericError("gather: index " + std::to_string(ids[r]) +
                         " out of range for table with " +
                         std::to_string(rows) + " rows");
    }
    std::copy_n(tv.data() + ids[r] * cols, cols, out.data() + r * cols);
  }
  const std::size_t tid = table.id;
  return tape.Record(std::move(out), {tid},
                     [tid, cols, ids = std::move(ids)](Tape& t, const Tensor& g) {
                       Tensor& gt = t.MutableGrad(tid);
                       for (std::size_t r = 0; r < ids.size(); ++r) {
                         double* dst = gt.data() + ids[r] * cols;
                         const double* src = g.data() + r * cols;
                         for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
                       }
                     });
}

Var GatherRows(Tape& tape, Parameter& table, std::span<const int> indices) {
  const Tensor& tv = table.value;
  if (tv.rank() != 2) throw NumericError("gather: table must be a matrix");
  const std::size_t rows = tv.dim(0), cols = tv.dim(1);
  std::vector<int> ids(indices.begin(), indices.end());
  Tensor out({ids.size(), cols});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= rows) {
      throw NumericError("gather: index " + std::to_string(ids[r]) +
                         " out of range for table with " +
                         std::to_string(rows) + " rows");
    }
    std::copy_n(tv.data() + ids[r] * cols, cols, out.data() + r * cols);
  }
  Parameter* param = &table;
  return tape.Record(std::move(out), {},
                     [param, cols, ids = std::move(ids)](Tape&, const Tensor& g) {
                       if (!param->trainable) return;
                       Tensor& gt = param->grad;
                       if (gt.shape() != param->value.shape()) {
                         gt = Tensor(param->value.shape());
                       }
                       for (std::size_t r = 0; r < ids.size(); ++r) {
                         double* dst = gt.data() + ids[r] * cols;
                         const double* src = g.data() + r * cols;
                         for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
                       }
                     });
}

}  // namespace hsd
