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

#include "hsd/models.h"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "hsd/checkpoint.h"
#include "hsd/errors.h"

namespace hsd {
namespace {

constexpr const char* kModelMagic = "hsd-model";
constexpr int kModelVersion = 1;

int ParseInt(std::string_view key, std::string_view value) {
  int out = 0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw InputError("invalid integer for " + std::string(key) + ": '" +
                     std::string(value) + "'");
  }
  return out;
}

bool ParseBool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw InputError("invalid boolean for " + std::string(key) + ": '" +
                   std::string(value) + "'");
}

Tensor GlorotUniform(Shape shape, std::size_t fan_in, std::size_t fan_out,
                     Rng& rng) {
  Tensor t(std::move(shape));
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : t.values()) v = rng.Uniform(-limit, limit);
  return t;
}

// [rows, cols] matrix with orthonormal rows (rows <= cols) or columns.
Tensor Orthogonal(std::size_t rows, std::size_t cols, Rng& rng) {
  const std::size_t big = std::max(rows, cols), small = std::min(rows, cols);
  Eigen::MatrixXd a(big, small);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.Normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(small);
  for (std::size_t j = 0; j < small; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  if (rows < cols) q.transposeInPlace();
  Tensor t({rows, cols});
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) t.at(i, j) = q(i, j);
  }
  return t;
}

Var Dense(Var x, Var weight, Var bias) { return AddBias(MatMul(x, weight), bias); }

}  // namespace

std::string_view ArchitectureName(Architecture arch) {
  switch (arch) {
    case Architecture::kCnn1d:
      return "cnn1d";
    case Architecture::kLstm:
      return "lstm";
    case Architecture::kBiLstm:
      return "bilstm";
  }
  return "unknown";
}

std::string_view ArchitectureLabel(Architecture arch) {
  switch (arch) {
    case Architecture::kCnn1d:
      return "CNN-1D";
    case Architecture::kLstm:
      return "LSTM";
    case Architecture::kBiLstm:
      return "BiLSTM";
  }
  return "unknown";
}

Architecture ParseArchitecture(std::string_view name) {
  for (auto arch :
       {Architecture::kCnn1d, Architecture::kLstm, Architecture::kBiLstm}) {
    if (name == ArchitectureName(arch)) return arch;
  }
  throw InputError("unknown architecture '" + std::string(name) +
                   "'; valid names: cnn1d, lstm, bilstm");
}

void ModelSpec::Validate() const {
  if (embedding_dim < 1) throw InputError("embedding_dim must be positive");
  if (max_len < 1) throw InputError("max_len must be positive");
  if (architecture == Architecture::kCnn1d) {
    if (filter_sizes.empty()) throw InputError("filter_sizes must not be empty");
    for (int h : filter_sizes) {
      if (h < 1 || h > max_len) {
        throw InputError("filter size " + std::to_string(h) +
                         " must be in [1, max_len = " +
                         std::to_string(max_len) + "]");
      }
    }
    if (filters_per_size < 1) throw InputError("filters_per_size must be positive");
  } else if (lstm_units < 1) {
    throw InputError("lstm_units must be positive");
  }
  if (!(dropout_rate >= 0 && dropout_rate < 1)) {
    throw InputError("dropout_rate must be in [0, 1)");
  }
  if (!(recurrent_dropout_rate >= 0 && recurrent_dropout_rate < 1)) {
    throw InputError("recurrent_dropout_rate must be in [0, 1)");
  }
  if (batch_size < 1) throw InputError("batch_size must be positive");
  if (epochs < 0) throw InputError("epochs must be non-negative");
  if (!(learning_rate > 0)) throw InputError("learning_rate must be positive");
}

int ModelSpec::PooledWidth() const {
  switch (architecture) {
    case Architecture::kCnn1d:
      return filters_per_size * static_cast<int>(filter_sizes.size());
    case Architecture::kLstm:
      return lstm_units;
    case Architecture::kBiLstm:
      return 2 * lstm_units;
  }
  return 0;
}

std::vector<std::pair<std::string, std::string>> ModelSpec::ToKeyValues() const {
  std::string sizes;
  for (std::size_t i = 0; i < filter_sizes.size(); ++i) {
    if (i > 0) sizes += ",";
    sizes += std::to_string(filter_sizes[i]);
  }
  return {
      {"architecture", std::string(ArchitectureName(architecture))},
      {"embedding_dim", std::to_string(embedding_dim)},
      {"filter_sizes", sizes},
      {"filters_per_size", std::to_string(filters_per_size)},
      {"lstm_units", std::to_string(lstm_units)},
      {"dropout_rate", FormatExact(dropout_rate)},
      {"recurrent_dropout_rate", FormatExact(recurrent_dropout_rate)},
      {"batch_size", std::to_string(batch_size)},
      {"epochs", std::to_string(epochs)},
      {"max_len", std::to_string(max_len)},
      {"embeddings_trainable", embeddings_trainable ? "true" : "false"},
      {"learning_rate", FormatExact(learning_rate)},
      {"seed", std::to_string(seed)},
  };
}

void ModelSpec::Set(std::string_view key, std::string_view value) {
  if (key == "architecture") {
    architecture = ParseArchitecture(value);
  } else if (key == "embedding_dim") {
    embedding_dim = ParseInt(key, value);
  } else if (key == "filter_sizes") {
    filter_sizes.clear();
    std::string item;
    std::istringstream in{std::string(value)};
    while (std::getline(in, item, ',')) filter_sizes.push_back(ParseInt(key, item));
  } else if (key == "filters_per_size") {
    filters_per_size = ParseInt(key, value);
  } else if (key == "lstm_units") {
    lstm_units = ParseInt(key, value);
  } else if (key == "dropout_rate") {
    dropout_rate = ParseDouble(value);
  } else if (key == "recurrent_dropout_rate") {
    recurrent_dropout_rate = ParseDouble(value);
  } else if (key == "batch_size") {
    batch_size = ParseInt(key, value);
  } else if (key == "epochs") {
    epochs = ParseInt(key, value);
  } else if (key == "max_len") {
    max_len = ParseInt(key, value);
  } else if (key == "embeddings_trainable") {
    embeddings_trainable = ParseBool(key, value);
  } else if (key == "learning_rate") {
    learning_rate = ParseDouble(value);
  } else if (key == "seed") {
    uint64_t s = 0;
    auto res = std::from_chars(value.data(), value.data() + value.size(), s);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
      throw InputError("invalid seed '" + std::string(value) + "'");
    }
    seed = s;
  } else {
    throw InputError("unknown model setting '" + std::string(key) + "'");
  }
}

Var Conv1D(Var seq, Var weight, Var bias) {
  const Shape in = seq.shape();
  const Shape w = weight.shape();
  if (in.size() != 2 && in.size() != 3) {
    throw NumericError("conv1d: input must be [L, D] or [B, L, D]");
  }
  const bool batched = in.size() == 3;
  const std::size_t batch = batched ? in[0] : 1;
  const std::size_t len = in[in.size() - 2], dim = in.back();
  if (w.size() != 3 || w[1] != dim) {
    throw NumericError("conv1d: weight shape " + ShapeString(w) +
                       " does not match input " + ShapeString(in));
  }
  const std::size_t h = w[0], filters = w[2];
  if (len < h) {
    throw NumericError("conv1d: sequence length " + std::to_string(len) +
                       " is shorter than filter size " + std::to_string(h));
  }
  const std::size_t steps = len - h + 1;
  Var x = batched ? seq : Reshape(seq, {1, len, dim});
  Var acc;
  for (std::size_t j = 0; j < h; ++j) {
    Var window = Reshape(Slice(x, 1, j, j + steps), {batch * steps, dim});
    Var tap = Reshape(Slice(weight, 0, j, j + 1), {dim, filters});
    Var term = MatMul(window, tap);
    acc = j == 0 ? term : Add(acc, term);
  }
  Var out = AddBias(acc, bias);
  return batched ? Reshape(out, {batch, steps, filters})
                 : Reshape(out, {steps, filters});
}

Var GlobalMaxPool(Var features) {
  const Shape s = features.shape();
  if (s.size() != 2 && s.size() != 3) {
    throw NumericError("global max pool expects [T, F] or [B, T, F]");
  }
  if (s[s.size() - 2] == 0) throw NumericError("global max pool over zero steps");
  return MaxOverAxis(features, s.size() - 2);
}

LstmState LstmStepProjected(Var projected, const LstmState& prev,
                            const LstmWeights& cell, Var rec_mask) {
  const std::size_t units = prev.h.shape().back();
  Var h_in = rec_mask.tape != nullptr ? Mul(prev.h, rec_mask) : prev.h;
  Var z = Add(projected, MatMul(h_in, cell.recurrent));
  Var i = HardSigmoid(Slice(z, 1, 0, units));
  Var f = HardSigmoid(Slice(z, 1, units, 2 * units));
  Var g = Tanh(Slice(z, 1, 2 * units, 3 * units));
  Var o = HardSigmoid(Slice(z, 1, 3 * units, 4 * units));
  Var c = Add(Mul(f, prev.c), Mul(i, g));
  Var h = Mul(o, Tanh(c));
  return {h, c};
}

LstmState LstmStep(Var x_t, const LstmState& prev, const LstmWeights& cell,
                   Var rec_mask) {
  if (x_t.shape().size() != 2 || prev.h.shape().size() != 2) {
    throw NumericError("lstm step expects [B, D] input and [B, H] state");
  }
  return LstmStepProjected(AddBias(MatMul(x_t, cell.kernel), cell.bias), prev,
                           cell, rec_mask);
}

Var LstmSequence(Var seq, const LstmWeights& cell, bool training,
                 double recurrent_dropout, Rng& rng, bool reverse) {
  Tape& tape = *seq.tape;
  const Shape in = seq.shape();
  if (in.size() != 3) throw NumericError("lstm expects [B, L, D] input");
  const std::size_t batch = in[0], len = in[1], dim = in[2];
  const std::size_t units = cell.recurrent.shape().at(0);
  if (cell.kernel.shape() != Shape{dim, 4 * units}) {
    throw NumericError("lstm kernel shape " + ShapeString(cell.kernel.shape()) +
                       " does not match input width " + std::to_string(dim));
  }
  // Input projections for all steps in one product.
  Var projected = Reshape(
      AddBias(MatMul(Reshape(seq, {batch * len, dim}), cell.kernel), cell.bias),
      {batch, len, 4 * units});
  Var mask;
  if (training && recurrent_dropout > 0) {
    mask = Dropout(tape.Constant(Tensor({batch, units}, 1.0)), recurrent_dropout,
                   true, rng);
  }
  LstmState state{tape.Constant(Tensor({batch, units})),
                  tape.Constant(Tensor({batch, units}))};
  std::vector<Var> outputs(len);
  for (std::size_t k = 0; k < len; ++k) {
    const std::size_t t = reverse ? len - 1 - k : k;
    Var step = Reshape(Slice(projected, 1, t, t + 1), {batch, 4 * units});
    state = LstmStepProjected(step, state, cell, mask);
    outputs[t] = Reshape(state.h, {batch, 1, units});
  }
  return Concat(outputs, 1);
}

Var BiLstm(Var seq, const LstmWeights& forward, const LstmWeights& backward,
           bool training, double recurrent_dropout, Rng& rng) {
  Var fwd = LstmSequence(seq, forward, training, recurrent_dropout, rng, false);
  Var bwd = LstmSequence(seq, backward, training, recurrent_dropout, rng, true);
  const Var parts[] = {fwd, bwd};
  return Concat(parts, 2);
}

LstmWeights LstmCellParams::Bind(Tape& tape) {
  return {tape.Param(kernel), tape.Param(recurrent), tape.Param(bias)};
}

ClassifierModel::ClassifierModel(ModelSpec spec, Vocabulary vocab)
    : spec_(std::move(spec)), vocab_(std::move(vocab)) {
  spec_.Validate();
  Allocate();
}

ClassifierModel::ClassifierModel(ModelSpec spec, const EmbeddingMatrix& emb)
    : ClassifierModel(std::move(spec), emb.vocab) {
  Initialize(emb);
}

void ClassifierModel::Allocate() {
  const std::size_t v = vocab_.size();
  const std::size_t d = spec_.embedding_dim;
  embedding_ = Parameter("embedding", Tensor({v, d}));
  embedding_.trainable = spec_.embeddings_trainable;
  conv_weights_.clear();
  conv_biases_.clear();
  const std::size_t units = spec_.lstm_units;
  switch (spec_.architecture) {
    case Architecture::kCnn1d:
      for (int h : spec_.filter_sizes) {
        const std::string prefix = "conv" + std::to_string(h);
        conv_weights_.emplace_back(
            prefix + ".weight",
            Tensor({std::size_t(h), d, std::size_t(spec_.filters_per_size)}));
        conv_biases_.emplace_back(prefix + ".bias",
                                  Tensor({std::size_t(spec_.filters_per_size)}));
      }
      break;
    case Architecture::kBiLstm:
      backward_cell_ = {Parameter("lstm_bwd.kernel", Tensor({d, 4 * units})),
                        Parameter("lstm_bwd.recurrent", Tensor({units, 4 * units})),
                        Parameter("lstm_bwd.bias", Tensor({4 * units}))};
      [[fallthrough]];
    case Architecture::kLstm:
      forward_cell_ = {Parameter("lstm_fwd.kernel", Tensor({d, 4 * units})),
                       Parameter("lstm_fwd.recurrent", Tensor({units, 4 * units})),
                       Parameter("lstm_fwd.bias", Tensor({4 * units}))};
      break;
  }
  const std::size_t width = spec_.PooledWidth();
  dense_weight_ = Parameter("dense.weight", Tensor({width, 1}));
  dense_bias_ = Parameter("dense.bias", Tensor({1}));
}

void ClassifierModel::Initialize(const EmbeddingMatrix& emb) {
  if (emb.dim() != static_cast<std::size_t>(spec_.embedding_dim)) {
    throw InputError("embedding dimension " + std::to_string(emb.dim()) +
                     " does not match model embedding_dim " +
                     std::to_string(spec_.embedding_dim));
  }
  embedding_.value = emb.vectors;
  std::fill_n(embedding_.value.data(), emb.dim(), 0.0);  // PAD row

  Rng rng(DeriveSeed(spec_.seed, "init"));
  const std::size_t d = spec_.embedding_dim;
  for (std::size_t k = 0; k < conv_weights_.size(); ++k) {
    const std::size_t h = conv_weights_[k].value.dim(0);
    const std::size_t f = conv_weights_[k].value.dim(2);
    conv_weights_[k].value =
        GlorotUniform(conv_weights_[k].value.shape(), h * d, h * f, rng);
  }
  auto init_cell = [&](LstmCellParams& cell) {
    const std::size_t units = cell.recurrent.value.dim(0);
    cell.kernel.value = GlorotUniform(cell.kernel.value.shape(), d, 4 * units, rng);
    cell.recurrent.value = Orthogonal(units, 4 * units, rng);
    cell.bias.value.Fill(0.0);
    for (std::size_t u = units; u < 2 * units; ++u) cell.bias.value[u] = 1.0;
  };
  if (spec_.architecture != Architecture::kCnn1d) init_cell(forward_cell_);
  if (spec_.architecture == Architecture::kBiLstm) init_cell(backward_cell_);
  dense_weight_.value =
      GlorotUniform(dense_weight_.value.shape(), dense_weight_.value.dim(0), 1, rng);
}

std::vector<Parameter*> ClassifierModel::Parameters() {
  std::vector<Parameter*> params{&embedding_};
  for (std::size_t k = 0; k < conv_weights_.size(); ++k) {
    params.push_back(&conv_weights_[k]);
    params.push_back(&conv_biases_[k]);
  }
  if (spec_.architecture != Architecture::kCnn1d) {
    params.insert(params.end(), {&forward_cell_.kernel, &forward_cell_.recurrent,
                                 &forward_cell_.bias});
  }
  if (spec_.architecture == Architecture::kBiLstm) {
    params.insert(params.end(), {&backward_cell_.kernel,
                                 &backward_cell_.recurrent, &backward_cell_.bias});
  }
  params.push_back(&dense_weight_);
  params.push_back(&dense_bias_);
  return params;
}

std::vector<const Parameter*> ClassifierModel::Parameters() const {
  auto mutable_params = const_cast<ClassifierModel*>(this)->Parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

Var ClassifierModel::Forward(Tape& tape,
                             const std::vector<std::vector<int>>& batch,
                             bool training, Rng& rng, ForwardTrace* trace) {
  if (batch.empty()) throw NumericError("forward pass over an empty batch");
  const std::size_t len = spec_.max_len;
  const std::size_t d = spec_.embedding_dim;
  std::vector<int> ids;
  ids.reserve(batch.size() * len);
  for (const auto& seq : batch) {
    if (seq.size() != len) {
      throw NumericError("encoded sequence has length " +
                         std::to_string(seq.size()) + ", expected max_len " +
                         std::to_string(len));
    }
    ids.insert(ids.end(), seq.begin(), seq.end());
  }
  const std::size_t b = batch.size();
  Var embedded = Reshape(GatherRows(tape, embedding_, ids), {b, len, d});

  Var pooled;
  if (spec_.architecture == Architecture::kCnn1d) {
    std::vector<Var> maps;
    for (std::size_t k = 0; k < conv_weights_.size(); ++k) {
      Var fm = Relu(Conv1D(embedded, tape.Param(conv_weights_[k]),
                           tape.Param(conv_biases_[k])));
      maps.push_back(GlobalMaxPool(fm));
    }
    pooled = Concat(maps, 1);
  } else if (spec_.architecture == Architecture::kLstm) {
    pooled = GlobalMaxPool(LstmSequence(embedded, forward_cell_.Bind(tape),
                                        training, spec_.recurrent_dropout_rate,
                                        rng));
  } else {
    pooled = GlobalMaxPool(BiLstm(embedded, forward_cell_.Bind(tape),
                                  backward_cell_.Bind(tape), training,
                                  spec_.recurrent_dropout_rate, rng));
  }
  const int width = static_cast<int>(pooled.shape().back());
  if (width != spec_.PooledWidth()) {
    throw NumericError("pooled feature width " + std::to_string(width) +
                       " differs from the expected " +
                       std::to_string(spec_.PooledWidth()));
  }
  if (trace) trace->pooled_width = width;
  Var dropped = Dropout(pooled, spec_.dropout_rate, training, rng);
  return Sigmoid(Dense(dropped, tape.Param(dense_weight_), tape.Param(dense_bias_)));
}

std::vector<double> ClassifierModel::Predict(
    const std::vector<std::vector<int>>& encoded) {
  std::vector<double> probs;
  probs.reserve(encoded.size());
  Rng unused(0);
  const std::size_t step = spec_.batch_size;
  for (std::size_t start = 0; start < encoded.size(); start += step) {
    const std::size_t end = std::min(encoded.size(), start + step);
    std::vector<std::vector<int>> batch(encoded.begin() + start,
                                        encoded.begin() + end);
    Tape tape;
    Var out = Forward(tape, batch, /*training=*/false, unused);
    for (double p : out.value().values()) probs.push_back(p);
  }
  return probs;
}

std::vector<std::vector<int>> ClassifierModel::EncodeAll(
    const std::vector<Document>& docs) const {
  std::vector<std::vector<int>> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) out.push_back(Encode(doc, vocab_, spec_.max_len));
  return out;
}

void ClassifierModel::Save(std::ostream& out) const {
  out << kModelMagic << ' ' << kModelVersion << '\n';
  for (const auto& [key, value] : spec_.ToKeyValues()) {
    out << "spec " << key << '=' << value << '\n';
  }
  out << "vocab " << vocab_.size() << '\n';
  for (const auto& token : vocab_.tokens()) out << token << '\n';
  std::vector<NamedTensor> tensors;
  for (const Parameter* p : Parameters()) tensors.push_back({p->name, p->value});
  WriteTensors(out, tensors);
}

void ClassifierModel::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write model file: " + path);
  Save(out);
  if (!out) throw InputError("failed writing model file: " + path);
}

ClassifierModel ClassifierModel::Load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line != std::string(kModelMagic) + " " + std::to_string(kModelVersion)) {
    throw InputError("not a model checkpoint (bad header)");
  }
  ModelSpec spec;
  std::size_t vocab_size = 0;
  while (std::getline(in, line)) {
    if (line.rfind("spec ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw InputError("malformed spec line: " + line);
      spec.Set(std::string_view(line).substr(5, eq - 5),
               std::string_view(line).substr(eq + 1));
    } else if (line.rfind("vocab ", 0) == 0) {
      vocab_size = static_cast<std::size_t>(std::stoull(line.substr(6)));
      break;
    } else {
      throw InputError("unexpected checkpoint line: " + line);
    }
  }
  std::vector<std::string> tokens;
  tokens.reserve(vocab_size);
  while (tokens.size() < vocab_size && std::getline(in, line)) {
    tokens.push_back(line);
  }
  if (tokens.size() != vocab_size) throw InputError("truncated vocabulary");
  ClassifierModel model(spec, Vocabulary::FromTokens(std::move(tokens)));
  std::map<std::string, Tensor> stored;
  for (auto& t : ReadTensors(in)) stored.emplace(t.name, std::move(t.value));
  auto params = model.Parameters();
  if (stored.size() != params.size()) {
    throw InputError("checkpoint holds " + std::to_string(stored.size()) +
                     " tensors but the spec needs " +
                     std::to_string(params.size()));
  }
  for (Parameter* p : params) {
    auto it = stored.find(p->name);
    if (it == stored.end()) {
      throw InputError("checkpoint is missing tensor '" + p->name + "'");
    }
    if (it->second.shape() != p->value.shape()) {
      throw InputError("tensor '" + p->name + "' has shape " +
                       ShapeString(it->second.shape()) + " but the spec needs " +
                       ShapeString(p->value.shape()));
    }
    p->value = std::move(it->second);
  }
  return model;
}

ClassifierModel ClassifierModel::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model file: " + path);
  return Load(in);
}

}  // namespace hsd
