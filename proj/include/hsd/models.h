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

#ifndef HSD_MODELS_H_
#define HSD_MODELS_H_

// CNN-1D, LSTM and BiLSTM sentence classifiers. All three embed the token
// indices, encode the sequence, take a global max over time, apply dropout
// and finish with a single sigmoid unit.

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hsd/autodiff.h"
#include "hsd/corpus.h"
#include "hsd/embeddings.h"
#include "hsd/rng.h"

namespace hsd {

enum class Architecture { kCnn1d, kLstm, kBiLstm };

// "cnn1d", "lstm", "bilstm".
std::string_view ArchitectureName(Architecture arch);
// "CNN-1D", "LSTM", "BiLSTM".
std::string_view ArchitectureLabel(Architecture arch);
// Throws InputError listing the valid names.
Architecture ParseArchitecture(std::string_view name);

struct ModelSpec {
  Architecture architecture = Architecture::kCnn1d;
  int embedding_dim = 300;
  std::vector<int> filter_sizes{2, 3, 4};
  int filters_per_size = 64;
  int lstm_units = 100;
  double dropout_rate = 0.5;
  double recurrent_dropout_rate = 0.2;
  int batch_size = 64;
  int epochs = 5;
  int max_len = 64;
  bool embeddings_trainable = true;
  double learning_rate = 0.001;
  uint64_t seed = 1;

  // Throws InputError on inconsistent values.
  void Validate() const;
  // Width of the vector after global max pooling (and concatenation).
  int PooledWidth() const;

  std::vector<std::pair<std::string, std::string>> ToKeyValues() const;
  // Unknown keys are rejected.
  void Set(std::string_view key, std::string_view value);

  bool operator==(const ModelSpec&) const = default;
};

// Valid cross-correlation over time; weight is [h, D, F] and bias [F].
// seq is [B, L, D] (or [L, D]); the result is [B, L - h + 1, F]
// (or [L - h + 1, F]). Throws NumericError when L < h.
Var Conv1D(Var seq, Var weight, Var bias);

// Per-channel maximum over the time axis: [B, T, F] -> [B, F] or
// [T, F] -> [F]. Throws NumericError when T == 0.
Var GlobalMaxPool(Var features);

// Tape handles of one LSTM cell. kernel is [D, 4H], recurrent [H, 4H] and
// bias [4H]; the four column blocks are the input, forget, candidate and
// output gates in that order.
struct LstmWeights {
  Var kernel;
  Var recurrent;
  Var bias;
};

struct LstmState {
  Var h;
  Var c;
};

// One step for a batch: x_t [B, D], h_prev/c_prev/rec_mask [B, H].
//   i, f, o = hard_sigmoid(x W + (h_prev * mask) U + b)
//   g = tanh(...),  c = f c_prev + i g,  h = o tanh(c)
LstmState LstmStep(Var x_t, const LstmState& prev, const LstmWeights& cell,
                   Var rec_mask);

// Runs the cell over [B, L, D] from zero state and returns every hidden
// state, [B, L, H]. When reverse is set the cell reads the sequence from the
// last step to the first and the outputs are stored back in original time
// order. In training mode one recurrent-dropout mask per sequence is drawn
// and reused at every step.
Var LstmSequence(Var seq, const LstmWeights& cell, bool training,
                 double recurrent_dropout, Rng& rng, bool reverse = false);

// Forward and reversed-direction LSTMs concatenated per step:
// [B, L, D] -> [B, L, 2H].
Var BiLstm(Var seq, const LstmWeights& forward, const LstmWeights& backward,
           bool training, double recurrent_dropout, Rng& rng);

struct LstmCellParams {
  Parameter kernel;
  Parameter recurrent;
  Parameter bias;

  LstmWeights Bind(Tape& tape);
};

struct ForwardTrace {
  int pooled_width = 0;
};

class ClassifierModel {
 public:
  // Fresh model. The embedding table is copied from emb (PAD row zeroed);
  // other weights use Glorot-uniform, orthogonal recurrent matrices and a
  // forget-gate bias of 1, all drawn from spec.seed.
  ClassifierModel(ModelSpec spec, const EmbeddingMatrix& emb);

  ClassifierModel(ClassifierModel&&) = default;
  ClassifierModel& operator=(ClassifierModel&&) = default;

  const ModelSpec& spec() const { return spec_; }
  const Vocabulary& vocab() const { return vocab_; }

  // All parameters in a fixed order.
  std::vector<Parameter*> Parameters();
  std::vector<const Parameter*> Parameters() const;
  Parameter& embedding() { return embedding_; }

  // Batched forward pass over encoded sequences of length spec.max_len.
  // Returns probabilities of shape [B, 1].
  Var Forward(Tape& tape, const std::vector<std::vector<int>>& batch,
              bool training, Rng& rng, ForwardTrace* trace = nullptr);

  // Inference-mode probabilities, evaluated in batches of spec.batch_size.
  std::vector<double> Predict(const std::vector<std::vector<int>>& encoded);

  // Encodes docs with the model vocabulary and spec.max_len.
  std::vector<std::vector<int>> EncodeAll(const std::vector<Document>& docs) const;

  // Checkpoint: "hsd-model 1", the spec as "spec key=value" lines, the
  // vocabulary ("vocab V" then one token per line) and the parameter
  // container from checkpoint.h.
  void Save(std::ostream& out) const;
  void Save(const std::string& path) const;
  // Validates every tensor's name and shape against the stored spec.
  static ClassifierModel Load(std::istream& in);
  static ClassifierModel Load(const std::string& path);

 private:
  ClassifierModel(ModelSpec spec, Vocabulary vocab);
  void Allocate();
  void Initialize(const EmbeddingMatrix& emb);

  ModelSpec spec_;
  Vocabulary vocab_;
  Parameter embedding_;
  std::vector<Parameter> conv_weights_;
  std::vector<Parameter> conv_biases_;
  LstmCellParams forward_cell_;
  LstmCellParams backward_cell_;
  Parameter dense_weight_;
  Parameter dense_bias_;
};

}  // namespace hsd

#endif  // HSD_MODELS_H_
