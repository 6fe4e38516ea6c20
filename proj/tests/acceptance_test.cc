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

// Acceptance checks for the toolkit. Prints one PASS/FAIL line per
// criterion and exits non-zero when any criterion fails.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "hsd/autodiff.h"
#include "hsd/cli.h"
#include "hsd/embeddings.h"
#include "hsd/evaluation.h"
#include "hsd/models.h"
#include "hsd/optim.h"
#include "json.hpp"
#include "test_util.h"

namespace hsd {
namespace {

namespace fs = std::filesystem;
using testing::CheckGradients;
using testing::GradCheckResult;
using testing::RandomParameter;

struct Outcome {
  bool pass = true;
  std::string detail;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

std::string Format(const char* fmt, double v) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::string ReadAll(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteAll(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

int RunTool(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = RunCli(args, o, e);
  if (out) *out = o.str();
  if (code != kExitOk) std::fprintf(stderr, "  hsd %s: %s", args[0].c_str(), e.str().c_str());
  return code;
}

// ---------------------------------------------------------------------------
// 1. Gradient soundness.

constexpr int kCoordsPerTensor = 20;
constexpr double kGradTolerance = 1e-4;

void CheckOp(Outcome& o, const std::string& name, const testing::LossFn& loss,
             const std::vector<Parameter*>& params, double& worst) {
  const GradCheckResult r = CheckGradients(loss, params, kCoordsPerTensor, 17);
  int expected = 0;
  for (const Parameter* p : params) {
    expected += static_cast<int>(std::min<std::size_t>(kCoordsPerTensor, p->value.size()));
  }
  worst = std::max(worst, r.max_rel_error);
  o.Require(r.coordinates >= expected, name + ": too few coordinates");
  o.Require(r.max_rel_error < kGradTolerance,
            name + ": rel error " + Format("%.3g", r.max_rel_error) + " at " + r.worst);
}

Outcome GradientSoundness() {
  Outcome o;
  double worst = 0.0;
  Rng rng(101);
  // Random fixed weights make every output element matter.
  auto project = [](Tape& t, Var y, uint64_t seed) {
    Rng r(seed);
    Tensor w(y.shape());
    for (double& v : w.values()) v = r.Uniform(-1, 1);
    return Sum(Mul(y, t.Constant(w)));
  };

  Parameter a = RandomParameter("a", {4, 6}, rng);
  Parameter b = RandomParameter("b", {4, 6}, rng);
  Parameter wide = RandomParameter("wide", {4, 6}, rng, 4.0);
  Parameter m = RandomParameter("m", {6, 5}, rng);
  Parameter bias = RandomParameter("bias", {24}, rng);
  Parameter row = RandomParameter("row", {3, 24}, rng);
  Parameter cube = RandomParameter("cube", {3, 5, 4}, rng);
  Parameter cube2 = RandomParameter("cube2", {3, 2, 4}, rng);
  Parameter table = RandomParameter("table", {6, 4}, rng);
  Parameter logits = RandomParameter("logits", {24, 1}, rng, 3.0);
  Tensor labels({24, 1});
  for (std::size_t i = 0; i < 24; ++i) labels[i] = i % 3 == 0;
  const std::vector<int> ids = {5, 0, 5, 2, 3, 3, 1, 4};

  CheckOp(o, "add", [&](Tape& t) { return project(t, Add(t.Param(a), t.Param(b)), 1); }, {&a, &b}, worst);
  CheckOp(o, "sub", [&](Tape& t) { return project(t, Sub(t.Param(a), t.Param(b)), 2); }, {&a, &b}, worst);
  CheckOp(o, "mul", [&](Tape& t) { return project(t, Mul(t.Param(a), t.Param(b)), 3); }, {&a, &b}, worst);
  CheckOp(o, "scale", [&](Tape& t) { return project(t, Scale(t.Param(a), 1.7), 4); }, {&a}, worst);
  CheckOp(o, "add_bias", [&](Tape& t) { return project(t, AddBias(t.Param(row), t.Param(bias)), 5); }, {&row, &bias}, worst);
  CheckOp(o, "matmul", [&](Tape& t) { return project(t, MatMul(t.Param(a), t.Param(m)), 6); }, {&a, &m}, worst);
  CheckOp(o, "relu", [&](Tape& t) { return project(t, Relu(t.Param(wide)), 7); }, {&wide}, worst);
  CheckOp(o, "sigmoid", [&](Tape& t) { return project(t, Sigmoid(t.Param(wide)), 8); }, {&wide}, worst);
  CheckOp(o, "tanh", [&](Tape& t) { return project(t, Tanh(t.Param(wide)), 9); }, {&wide}, worst);
  CheckOp(o, "hard_sigmoid", [&](Tape& t) { return project(t, HardSigmoid(t.Param(wide)), 10); }, {&wide}, worst);
  CheckOp(o, "sum", [&](Tape& t) { return Sum(Mul(t.Param(a), t.Param(a))); }, {&a}, worst);
  CheckOp(o, "mean", [&](Tape& t) { return Mean(Mul(t.Param(a), t.Param(b))); }, {&a, &b}, worst);
  CheckOp(o, "bce", [&](Tape& t) { return BinaryCrossEntropy(Sigmoid(t.Param(logits)), labels); }, {&logits}, worst);
  CheckOp(o, "dropout", [&](Tape& t) {
    Rng mask(5);
    return project(t, Dropout(t.Param(a), 0.4, true, mask), 11);
  }, {&a}, worst);
  CheckOp(o, "concat", [&](Tape& t) {
    const Var parts[] = {t.Param(cube), t.Param(cube2)};
    return project(t, Concat(parts, 1), 12);
  }, {&cube, &cube2}, worst);
  CheckOp(o, "slice", [&](Tape& t) { return project(t, Slice(t.Param(cube), 1, 1, 4), 13); }, {&cube}, worst);
  CheckOp(o, "reshape", [&](Tape& t) { return project(t, Reshape(t.Param(cube), {15, 4}), 14); }, {&cube}, worst);
  CheckOp(o, "global_max_pool", [&](Tape& t) { return project(t, GlobalMaxPool(t.Param(cube)), 15); }, {&cube}, worst);
  CheckOp(o, "gather", [&](Tape& t) { return project(t, Gather(t.Param(table), ids), 16); }, {&table}, worst);
  CheckOp(o, "gather_rows", [&](Tape& t) { return project(t, GatherRows(t, table, ids), 17); }, {&table}, worst);
  {
    Parameter seq = RandomParameter("seq", {2, 6, 3}, rng);
    Parameter w = RandomParameter("w", {3, 3, 4}, rng);
    Parameter cb = RandomParameter("cb", {4}, rng);
    CheckOp(o, "conv1d", [&](Tape& t) {
      return project(t, Conv1D(t.Param(seq), t.Param(w), t.Param(cb)), 18);
    }, {&seq, &w, &cb}, worst);
    LstmCellParams cell{RandomParameter("kernel", {3, 12}, rng),
                        RandomParameter("recurrent", {3, 12}, rng),
                        RandomParameter("lstm_bias", {12}, rng)};
    CheckOp(o, "lstm_sequence", [&](Tape& t) {
      Rng r(3);
      return project(t, LstmSequence(t.Param(seq), cell.Bind(t), true, 0.3, r), 19);
    }, {&seq, &cell.kernel, &cell.recurrent, &cell.bias}, worst);
  }

  // Full architectures at max_len 5, dim 4, 2 filters / 3 units.
  const auto docs = testing::SeparableCorpus(8, 3);
  const auto emb = testing::RandomEmbeddings(docs, 4, 4, 0.5);
  for (Architecture arch : {Architecture::kCnn1d, Architecture::kLstm, Architecture::kBiLstm}) {
    ModelSpec spec;
    spec.architecture = arch;
    spec.embedding_dim = 4;
    spec.max_len = 5;
    spec.filters_per_size = 2;
    spec.lstm_units = 3;
    spec.dropout_rate = 0.0;
    spec.recurrent_dropout_rate = 0.0;
    ClassifierModel model(spec, emb);
    Rng init(8);
    for (Parameter* p : model.Parameters()) {
      for (double& v : p->value.values()) v += 0.3 * init.Normal();
    }
    const auto encoded = model.EncodeAll(docs);
    Tensor y({docs.size(), 1});
    for (std::size_t i = 0; i < docs.size(); ++i) y[i] = *docs[i].label;
    CheckOp(o, std::string(ArchitectureName(arch)), [&](Tape& t) {
      Rng r(1);
      return BinaryCrossEntropy(model.Forward(t, encoded, true, r), y);
    }, model.Parameters(), worst);
  }
  if (o.pass) o.detail = "max relative error " + Format("%.2e", worst);
  return o;
}

// ---------------------------------------------------------------------------
// 2. Optimizer oracle.

Outcome OptimizerOracle() {
  Outcome o;
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  const double grads[3] = {1.0, -0.5, 2.0};
  // Scalar Adam written from the update equations.
  double w = 0.5, m = 0, v = 0;
  Parameter p("p", Tensor::Vector({0.5}));
  double worst = 0.0;
  for (int t = 1; t <= 3; ++t) {
    const double g = grads[t - 1];
    m = cfg.beta1 * m + (1 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
    const double mhat = m / (1 - std::pow(cfg.beta1, t));
    const double vhat = v / (1 - std::pow(cfg.beta2, t));
    w -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    AdamStep(p, Tensor::Vector({g}), cfg);
    worst = std::max(worst, std::abs(p.value[0] - w));
  }
  o.Require(worst <= 1e-12, "trajectory differs by " + Format("%.3g", worst));
  if (o.pass) o.detail = "max deviation " + Format("%.1e", worst);
  return o;
}

// ---------------------------------------------------------------------------
// 3. Overfit capability.

Outcome OverfitCapability() {
  Outcome o;
  const auto docs = testing::SeparableCorpus(64, 1);
  const auto emb = testing::RandomEmbeddings(docs, 300, 2, 0.1);
  std::string summary;
  for (Architecture arch : {Architecture::kCnn1d, Architecture::kLstm, Architecture::kBiLstm}) {
    const auto start = std::chrono::steady_clock::now();
    ModelSpec spec;
    spec.architecture = arch;
    spec.epochs = 30;
    spec.learning_rate = 0.001;
    int first_perfect = 0;
    TrainingLog log;
    log.after_epoch = [&](int epoch, ClassifierModel& model) {
      if (first_perfect) return;
      const auto probs = model.Predict(model.EncodeAll(docs));
      int correct = 0;
      for (std::size_t i = 0; i < docs.size(); ++i) {
        correct += (probs[i] >= 0.5) == (*docs[i].label == 1);
      }
      if (correct == static_cast<int>(docs.size())) first_perfect = epoch;
    };
    TrainModel(spec, docs, emb, 1, &log);
    const double secs = Seconds(start);
    const std::string name(ArchitectureLabel(arch));
    o.Require(first_perfect > 0, name + " never reached 100% in 30 epochs");
    o.Require(secs < 120.0, name + " took " + Format("%.1f s", secs));
    summary += (summary.empty() ? "" : ", ") + name + " epoch " +
               std::to_string(first_perfect) + " (" + Format("%.0f s", secs) + ")";
  }
  if (o.pass) o.detail = "100% training accuracy: " + summary;
  return o;
}

// ---------------------------------------------------------------------------
// 4. Metrics oracle.

Outcome MetricsOracle() {
  Outcome o;
  Rng rng(4);
  int zero_cases = 0, mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.UniformInt(200);
    const double pos_rate = trial % 10 == 0 ? 0.0 : rng.Uniform();
    std::vector<double> probs(n);
    std::vector<int> gold(n);
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = rng.Bernoulli(pos_rate);
      probs[i] = trial % 7 == 0 ? 0.0 : trial % 11 == 0 ? 1.0 : rng.Uniform();
    }
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool pred = probs[i] >= 0.5;
      tp += pred && gold[i];
      fp += pred && !gold[i];
      fn += !pred && gold[i];
      tn += !pred && !gold[i];
    }
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    const Metrics expected{100.0 * p, 100.0 * r,
                           p + r > 0 ? 100.0 * (2 * p * r / (p + r)) : 0.0,
                           100.0 * ((tp + tn) / static_cast<double>(n))};
    if (tp + fp == 0 || tp + fn == 0) ++zero_cases;
    const MetricsResult got = ComputeMetrics(probs, gold);
    if (!(got.metrics == expected) || got.confusion.tp != tp || got.confusion.fp != fp ||
        got.confusion.fn != fn || got.confusion.tn != tn) {
      ++mismatches;
    }
  }
  o.Require(mismatches == 0, std::to_string(mismatches) + " of 1000 cases differ");
  o.Require(zero_cases > 0, "no zero-denominator case generated");
  if (o.pass) {
    o.detail = "1000 cases exact, " + std::to_string(zero_cases) + " with a zero denominator";
  }
  return o;
}

// ---------------------------------------------------------------------------
// 5. Fold invariants.

bool FoldsSound(const std::vector<int>& labels, int k, uint64_t seed, std::string* why) {
  const FoldAssignment folds = StratifiedKFold(labels, k, seed);
  std::vector<int> seen(labels.size(), 0);
  std::vector<std::array<int, 2>> per_class(k, {0, 0});
  for (int f = 0; f < k; ++f) {
    for (std::size_t i : folds.Members(f)) {
      ++seen[i];
      ++per_class[f][labels[i]];
    }
  }
  for (int s : seen) {
    if (s != 1) {
      *why = "not a partition";
      return false;
    }
  }
  for (int c = 0; c < 2; ++c) {
    int lo = INT32_MAX, hi = 0;
    for (const auto& counts : per_class) {
      lo = std::min(lo, counts[c]);
      hi = std::max(hi, counts[c]);
    }
    if (hi - lo > 1) {
      *why = "class imbalance " + std::to_string(hi - lo);
      return false;
    }
  }
  return true;
}

Outcome FoldInvariants() {
  Outcome o;
  Rng rng(5);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 10 + rng.UniformInt(4991);
    const double rate = rng.Uniform(0.1, 0.5);
    std::vector<int> labels(n);
    for (int& l : labels) l = rng.Bernoulli(rate);
    for (int k = 2; k <= 10; ++k) {
      std::string why;
      if (!FoldsSound(labels, k, rng.Next(), &why)) {
        o.Require(false, "n=" + std::to_string(n) + " k=" + std::to_string(k) + ": " + why);
      }
      ++checked;
    }
  }
  std::vector<int> labels(3849, 0);
  std::fill(labels.begin(), labels.begin() + 1436, 1);
  const FoldAssignment folds = StratifiedKFold(labels, 10, 1);
  std::string counts;
  for (int f = 0; f < 10; ++f) {
    int pos = 0;
    for (std::size_t i : folds.Members(f)) pos += labels[i];
    o.Require(pos == 143 || pos == 144, "fold " + std::to_string(f) + " has " +
                                            std::to_string(pos) + " positives");
    counts += (counts.empty() ? "" : "/") + std::to_string(pos);
  }
  std::string why;
  o.Require(FoldsSound(labels, 10, 1, &why), "3849-label folds: " + why);
  if (o.pass) {
    o.detail = std::to_string(checked) + " random assignments sound; 3849/1436 positives per fold " + counts;
  }
  return o;
}

// ---------------------------------------------------------------------------
// 6. SGNS separation.

Outcome SkipGramSeparation() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  SkipGramConfig cfg;
  cfg.epochs = 25;
  cfg.seed = 1;
  const EmbeddingMatrix emb = TrainEmbeddings(testing::TwoClusterSentences(2000, 7), cfg);
  auto c = [&](const char* a, const char* b) {
    return CosineSimilarity(emb.Row(a), emb.Row(b));
  };
  const double within = (c("a", "b") + c("x", "y")) / 2.0;
  const double across = (c("a", "x") + c("a", "y") + c("b", "x") + c("b", "y")) / 4.0;
  const double secs = Seconds(start);
  o.Require(within - across >= 0.2, "margin " + Format("%.3f", within - across));
  o.Require(secs < 120.0, "took " + Format("%.1f s", secs));
  if (o.pass) {
    o.detail = "within " + Format("%.3f", within) + " vs across " + Format("%.3f", across) +
               " after 25 epochs";
  }
  return o;
}

// ---------------------------------------------------------------------------
// 7. Format fidelity.

Outcome FormatFidelity(const fs::path& work) {
  Outcome o;
  // Embedding file round trip, including values across many magnitudes.
  {
    const auto docs = testing::SeparableCorpus(30, 9);
    EmbeddingMatrix emb = testing::RandomEmbeddings(docs, 16, 10);
    Rng rng(11);
    for (std::size_t i = 32; i < emb.vectors.size(); i += 3) {
      emb.vectors[i] *= std::pow(10.0, rng.Uniform(-12, 12));
    }
    const std::string path = (work / "emb.txt").string();
    SaveEmbeddings(emb, path);
    const EmbeddingMatrix back = LoadEmbeddings(path);
    bool same = back.vocab.tokens() == emb.vocab.tokens() &&
                back.vectors.shape() == emb.vectors.shape();
    for (std::size_t i = 0; same && i < emb.vectors.size(); ++i) {
      same = std::bit_cast<uint64_t>(back.vectors[i]) == std::bit_cast<uint64_t>(emb.vectors[i]);
    }
    o.Require(same, "embedding round trip not bitwise");
  }
  // Model checkpoints.
  {
    const auto docs = testing::SeparableCorpus(40, 12);
    const auto emb = testing::RandomEmbeddings(docs, 16, 13);
    for (Architecture arch : {Architecture::kCnn1d, Architecture::kLstm, Architecture::kBiLstm}) {
      ModelSpec spec;
      spec.architecture = arch;
      spec.embedding_dim = 16;
      spec.max_len = 16;
      spec.epochs = 2;
      ClassifierModel model = TrainModel(spec, docs, emb, 3);
      const std::string path = (work / "model.ckpt").string();
      model.Save(path);
      ClassifierModel back = ClassifierModel::Load(path);
      const auto p1 = model.Predict(model.EncodeAll(docs));
      const auto p2 = back.Predict(back.EncodeAll(docs));
      bool same = p1.size() == p2.size();
      for (std::size_t i = 0; same && i < p1.size(); ++i) {
        same = std::bit_cast<uint64_t>(p1[i]) == std::bit_cast<uint64_t>(p2[i]);
      }
      o.Require(same, std::string(ArchitectureName(arch)) + " checkpoint predictions differ");
    }
  }
  // Report CSV.
  {
    Rng rng(14);
    CVReport report;
    for (const char* name : {"CNN-1D", "LSTM", "BiLSTM"}) {
      ArchitectureResult r;
      r.name = name;
      for (int f = 0; f < 10; ++f) {
        FoldResult fold;
        fold.fold = f;
        fold.metrics = {rng.Uniform(0, 100), rng.Uniform(0, 100), rng.Uniform(0, 100),
                        rng.Uniform(0, 100)};
        r.folds.push_back(fold);
      }
      r.mean = {83.34, 78.51, 80.85, 82.62};
      report.architectures.push_back(r);
    }
    const std::string csv = RenderReport(report, ReportFormat::kCsv);
    const auto lines = Lines(csv);
    o.Require(!lines.empty() && lines[0] == "architecture,fold,P,R,F,A", "CSV header");
    const std::regex row(R"(^[^,]+,(\d+|mean),\d+\.\d\d,\d+\.\d\d,\d+\.\d\d,\d+\.\d\d$)");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      o.Require(std::regex_match(lines[i], row), "row not two-decimal: " + lines[i]);
    }
    o.Require(lines.size() == 1 + 3 * 11, "row count");
    const auto parsed = ParseReportCsv(csv);
    bool exact = parsed.size() == 33;
    std::size_t idx = 0;
    for (auto& arch : report.architectures) {
      for (auto& f : arch.folds) {
        const Metrics& m = parsed[idx++].metrics;
        exact = exact && std::abs(m.precision - f.metrics.precision) <= 0.005 + 1e-9 &&
                std::abs(m.accuracy - f.metrics.accuracy) <= 0.005 + 1e-9;
        f.metrics = m;
      }
      exact = exact && parsed[idx++].metrics == arch.mean;
    }
    o.Require(exact, "parsed values differ from the report");
    o.Require(RenderReport(report, ReportFormat::kCsv) == csv, "re-rendered CSV differs");
    o.Require(parsed.empty() || parsed[10].metrics == Metrics{83.34, 78.51, 80.85, 82.62},
              "mean row");
  }
  if (o.pass) o.detail = "embeddings bitwise, checkpoints bitwise (3 architectures), CSV exact";
  return o;
}

// ---------------------------------------------------------------------------
// 8. End-to-end smoke run.

Outcome EndToEndSmoke(const fs::path& work) {
  Outcome o;
  const auto docs = testing::SeparableCorpus(200, 42, 0.37);
  WriteAll(work / "corpus.jsonl", SerializeCorpus(docs));
  if (RunTool({"train-embeddings", "--corpus", (work / "corpus.jsonl").string(), "--seed",
               "1", "--out", (work / "emb").string()}) != kExitOk) {
    o.Require(false, "train-embeddings failed");
    return o;
  }
  auto cross_validate = [&](const std::string& out) {
    return RunTool({"cross-validate", "--corpus", (work / "corpus.jsonl").string(),
                    "--embeddings", (work / "emb" / "embeddings.txt").string(), "--arch",
                    "cnn1d,lstm,bilstm", "--k", "10", "--max-len", "24", "--seed", "1",
                    "--out", (work / out).string()});
  };
  const auto start = std::chrono::steady_clock::now();
  const int first = cross_validate("run1");
  const double secs = Seconds(start);
  o.Require(first == kExitOk, "cross-validate failed");
  o.Require(secs < 600.0, "took " + Format("%.0f s", secs));
  const int second = cross_validate("run2");
  o.Require(second == kExitOk, "second cross-validate failed");
  if (!o.pass) return o;

  for (const char* file : {"cv_report.csv", "cv_report.txt", "cv_metadata.json"}) {
    o.Require(ReadAll(work / "run1" / file) == ReadAll(work / "run2" / file),
              std::string(file) + " differs between runs");
  }
  const auto rows = ParseReportCsv(ReadAll(work / "run1" / "cv_report.csv"));
  o.Require(rows.size() == 33, "expected 3 x (10 folds + mean) rows");
  const auto meta = nlohmann::json::parse(ReadAll(work / "run1" / "cv_metadata.json"));
  const std::map<std::string, int> widths = {{"CNN-1D", 192}, {"LSTM", 100}, {"BiLSTM", 200}};
  for (const auto& arch : meta["architectures"]) {
    const std::string name = arch["architecture"];
    o.Require(widths.count(name) && arch["pooled_width"] == widths.at(name),
              name + " pooled width " + arch["pooled_width"].dump());
  }
  o.Require(meta["architectures"].size() == 3, "metadata lists 3 architectures");
  if (o.pass) {
    o.detail = "3 architectures x 10 folds in " + Format("%.0f s", secs) +
               ", reruns byte-identical, pooled widths 192/100/200";
  }
  return o;
}

// ---------------------------------------------------------------------------
// 9. Reproduction path on user-format data.

Outcome ReproductionPath(const fs::path& work, const fs::path& fixtures) {
  Outcome o;
  const std::string labeled = (fixtures / "labeled.jsonl").string();
  std::string stats_out;
  o.Require(RunTool({"stats", "--corpus", labeled, "--lexicon",
                     (fixtures / "hindi_lexicon.txt").string(), "--out",
                     (work / "stats").string()},
                    &stats_out) == kExitOk,
            "stats failed");
  o.Require(Lines(stats_out).size() == 5, "stats table rows");

  o.Require(RunTool({"train-embeddings", "--corpus", (fixtures / "unlabeled.jsonl").string(),
                     "--out", (work / "domain").string()}) == kExitOk,
            "train-embeddings failed");
  const std::string domain = (work / "domain" / "embeddings.txt").string();
  o.Require(RunTool({"probe", "--embeddings", domain, "--embeddings-general",
                     (fixtures / "general_embeddings.txt").string(), "--reference", "women",
                     "--groups", (fixtures / "groups.txt").string(), "--out",
                     (work / "probe").string()}) == kExitOk,
            "probe failed");
  o.Require(RunTool({"cross-validate", "--corpus", labeled, "--embeddings", domain,
                     "--max-len", "24", "--out", (work / "cv").string()}) == kExitOk,
            "cross-validate failed");
  if (!o.pass) return o;

  // Table 2 shape: one row per group with both similarity columns.
  const auto sim = Lines(ReadAll(work / "probe" / "similarity.csv"));
  o.Require(sim.size() == 4 && sim[0] == "group_name,domain_similarity,general_similarity",
            "similarity.csv header/rows");
  const std::regex sim_row(R"(^(muslim|dalit|lgbt),-?\d\.\d{6},-?\d\.\d{6}$)");
  for (std::size_t i = 1; i < sim.size(); ++i) {
    o.Require(std::regex_match(sim[i], sim_row), "similarity row: " + sim[i]);
  }
  // Table 3 shape: one row per architecture with P, R, F, A.
  const auto table = Lines(ReadAll(work / "cv" / "cv_report.txt"));
  o.Require(table.size() == 4, "cv_report.txt rows");
  if (table.size() == 4) {
    o.Require(table[0].find("P (%)") != std::string::npos &&
                  table[0].find("A (%)") != std::string::npos,
              "table header");
    const std::regex table_row(R"(^(CNN-1D|LSTM|BiLSTM)\s+(\d+\.\d\d\s+){3}\d+\.\d\d$)");
    for (std::size_t i = 1; i < 4; ++i) {
      o.Require(std::regex_match(table[i], table_row), "table row: " + table[i]);
    }
  }
  o.Require(ParseReportCsv(ReadAll(work / "cv" / "cv_report.csv")).size() == 33,
            "cv_report.csv rows");
  if (o.pass) o.detail = "corpus stats, 3-group similarity table and 3-architecture CV table";
  return o;
}

}  // namespace
}  // namespace hsd

int main(int argc, char** argv) {
  using namespace hsd;
  const fs::path fixtures = argc > 1 ? fs::path(argv[1]) : fs::path(HSD_FIXTURE_DIR);
  const fs::path work = fs::temp_directory_path() / "hsd_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"gradient soundness", GradientSoundness},
      {"optimizer oracle", OptimizerOracle},
      {"overfit capability", OverfitCapability},
      {"metrics oracle", MetricsOracle},
      {"fold invariants", FoldInvariants},
      {"skip-gram separation", SkipGramSeparation},
      {"format fidelity", [&] { return FormatFidelity(work); }},
      {"end-to-end smoke", [&] { return EndToEndSmoke(work); }},
      {"reproduction path", [&] { return ReproductionPath(work, fixtures); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %zu. %s (%.1f s): %s\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].name, secs, outcome.detail.c_str());
    std::fflush(stdout);
    failed += !outcome.pass;
  }
  fs::remove_all(work);
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
