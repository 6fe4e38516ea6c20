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

#include "hsd/evaluation.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "hsd/errors.h"
#include "hsd/optim.h"
#include "hsd/rng.h"
#include "json.hpp"

namespace hsd {
namespace {

template <typename T>
void Shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.UniformInt(i)]);
  }
}

std::string Fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::vector<int> LabelsOf(const std::vector<Document>& docs) {
  std::vector<int> labels;
  labels.reserve(docs.size());
  for (const auto& doc : docs) {
    if (!doc.label) {
      throw InputError("document '" + doc.id + "' has no label");
    }
    labels.push_back(*doc.label);
  }
  return labels;
}

class NeuralClassifier : public Classifier {
 public:
  NeuralClassifier(ModelSpec spec, const EmbeddingMatrix& emb, uint64_t seed)
      : spec_(std::move(spec)), emb_(emb), seed_(seed) {}

  void Fit(const std::vector<Document>& train) override {
    model_ = std::make_unique<ClassifierModel>(
        TrainModel(spec_, train, emb_, seed_));
  }

  std::vector<double> PredictProba(const std::vector<Document>& docs) override {
    if (!model_) throw Error("classifier used before Fit");
    return model_->Predict(model_->EncodeAll(docs));
  }

 private:
  ModelSpec spec_;
  const EmbeddingMatrix& emb_;
  uint64_t seed_;
  std::unique_ptr<ClassifierModel> model_;
};

Metrics MeanOf(const std::vector<FoldResult>& folds) {
  Metrics mean;
  if (folds.empty()) return mean;
  for (const auto& f : folds) {
    mean.precision += f.metrics.precision;
    mean.recall += f.metrics.recall;
    mean.f_score += f.metrics.f_score;
    mean.accuracy += f.metrics.accuracy;
  }
  const double n = static_cast<double>(folds.size());
  mean.precision /= n;
  mean.recall /= n;
  mean.f_score /= n;
  mean.accuracy /= n;
  return mean;
}

std::string CsvRow(const std::string& arch, const std::string& fold,
                   const Metrics& m) {
  return arch + "," + fold + "," + Fixed2(m.precision) + "," + Fixed2(m.recall) +
         "," + Fixed2(m.f_score) + "," + Fixed2(m.accuracy) + "\n";
}

nlohmann::ordered_json MetricsJson(const Metrics& m) {
  nlohmann::ordered_json j;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f_score"] = m.f_score;
  j["accuracy"] = m.accuracy;
  return j;
}

}  // namespace

Metrics MetricsFromConfusion(const ConfusionMatrix& cm,
                             std::vector<std::string>* warnings) {
  auto warn = [&](const char* what) {
    if (warnings) warnings->push_back(what);
  };
  // Ratios first, scaled to percent last.
  double p = 0.0, r = 0.0, f = 0.0, a = 0.0;
  if (cm.tp + cm.fp > 0) {
    p = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  } else {
    warn("precision is ill-defined (no predicted positives); set to 0");
  }
  if (cm.tp + cm.fn > 0) {
    r = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  } else {
    warn("recall is ill-defined (no gold positives); set to 0");
  }
  if (p > 0 && r > 0) {
    f = 2.0 * p * r / (p + r);
  } else {
    warn("f-score is ill-defined (precision or recall is 0); set to 0");
  }
  if (cm.total() > 0) {
    a = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  }
  Metrics m;
  m.precision = 100.0 * p;
  m.recall = 100.0 * r;
  m.f_score = 100.0 * f;
  m.accuracy = 100.0 * a;
  return m;
}

MetricsResult ComputeMetrics(std::span<const double> probs,
                             std::span<const int> gold, double threshold) {
  if (probs.size() != gold.size()) {
    throw InputError("metrics: " + std::to_string(probs.size()) +
                     " predictions for " + std::to_string(gold.size()) +
                     " gold labels");
  }
  if (probs.empty()) throw InputError("metrics: no samples");
  MetricsResult result;
  ConfusionMatrix& cm = result.confusion;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool predicted = probs[i] >= threshold;
    const bool actual = gold[i] == 1;
    if (predicted && actual) {
      ++cm.tp;
    } else if (predicted) {
      ++cm.fp;
    } else if (actual) {
      ++cm.fn;
    } else {
      ++cm.tn;
    }
  }
  result.metrics = MetricsFromConfusion(cm, &result.warnings);
  return result;
}

std::vector<std::size_t> FoldAssignment::Members(int fold) const {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) members.push_back(i);
  }
  return members;
}

FoldAssignment StratifiedKFold(std::span<const int> labels, int k,
                               uint64_t seed) {
  if (k < 2) throw InputError("k must be at least 2");
  if (static_cast<std::size_t>(k) > labels.size()) {
    throw InputError("k = " + std::to_string(k) + " exceeds the " +
                     std::to_string(labels.size()) + " samples");
  }
  FoldAssignment folds;
  folds.k = k;
  folds.seed = seed;
  folds.fold_of.assign(labels.size(), -1);
  Rng rng(DeriveSeed(seed, "folds"));
  std::size_t next = 0;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    Shuffle(members, rng);
    for (std::size_t idx : members) {
      folds.fold_of[idx] = static_cast<int>(next % k);
      ++next;
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (folds.fold_of[i] < 0) {
      throw InputError("label at index " + std::to_string(i) +
                       " is not 0 or 1");
    }
  }
  return folds;
}

double EvaluateLoss(ClassifierModel& model,
                    const std::vector<std::vector<int>>& encoded,
                    std::span<const int> labels) {
  const auto probs = model.Predict(encoded);
  Tape tape;
  std::vector<double> y(labels.begin(), labels.end());
  const std::size_t n = y.size();
  Var loss = BinaryCrossEntropy(tape.Constant(Tensor({n, 1}, probs)),
                                Tensor({n, 1}, std::move(y)));
  return loss.value()[0];
}

void Fit(ClassifierModel& model, const std::vector<std::vector<int>>& encoded,
         std::span<const int> labels, uint64_t seed, TrainingLog* log) {
  if (encoded.empty()) throw InputError("empty training set");
  if (encoded.size() != labels.size()) {
    throw InputError("training set has " + std::to_string(encoded.size()) +
                     " sequences but " + std::to_string(labels.size()) +
                     " labels");
  }
  const ModelSpec& spec = model.spec();
  AdamConfig adam;
  adam.learning_rate = spec.learning_rate;
  adam.Validate();
  Rng shuffle_rng(DeriveSeed(seed, "shuffle"));
  Rng dropout_rng(DeriveSeed(seed, "dropout"));
  std::vector<Parameter*> params = model.Parameters();
  for (Parameter* p : params) p->ZeroGrad();

  std::vector<std::size_t> order(encoded.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch_size = spec.batch_size;
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    Shuffle(order, shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      std::vector<std::vector<int>> batch;
      std::vector<double> y;
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(encoded[order[i]]);
        y.push_back(labels[order[i]]);
      }
      const std::size_t n = batch.size();
      Tape tape;
      Var probs = model.Forward(tape, batch, /*training=*/true, dropout_rng);
      Var loss = BinaryCrossEntropy(probs, Tensor({n, 1}, std::move(y)));
      tape.Backward(loss);
      AdamUpdate(params, adam);
      loss_sum += loss.value()[0] * static_cast<double>(n);
    }
    if (log) {
      log->epoch_loss.push_back(loss_sum / order.size());
      if (log->after_epoch) log->after_epoch(epoch + 1, model);
    }
  }
}

ClassifierModel TrainModel(ModelSpec spec, const std::vector<Document>& train,
                           const EmbeddingMatrix& emb, uint64_t seed,
                           TrainingLog* log) {
  if (train.empty()) throw InputError("empty training set");
  const std::vector<int> labels = LabelsOf(train);
  spec.seed = seed;
  ClassifierModel model(std::move(spec), emb);
  Fit(model, model.EncodeAll(train), labels, seed, log);
  return model;
}

ClassifierFactory NeuralClassifierFactory(const ModelSpec& spec,
                                          const EmbeddingMatrix& emb) {
  return [spec, &emb](int, uint64_t fold_seed) -> std::unique_ptr<Classifier> {
    return std::make_unique<NeuralClassifier>(spec, emb, fold_seed);
  };
}

ArchitectureResult CrossValidate(const std::vector<Document>& docs,
                                 const std::string& name,
                                 const ClassifierFactory& factory,
                                 const CrossValidationOptions& options) {
  const std::vector<int> labels = LabelsOf(docs);
  const FoldAssignment folds = StratifiedKFold(labels, options.k, options.seed);

  ArchitectureResult result;
  result.name = name;
  result.folds.resize(options.k);
  result.out_of_fold_probs.assign(docs.size(), 0.0);
  result.evaluation_count.assign(docs.size(), 0);

  auto run_fold = [&](int fold) {
    std::vector<Document> train, test;
    std::vector<std::size_t> test_index;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (folds.fold_of[i] == fold) {
        test.push_back(docs[i]);
        test_index.push_back(i);
      } else {
        train.push_back(docs[i]);
      }
    }
    auto classifier = factory(fold, DeriveSeed(options.seed, "fold", fold));
    classifier->Fit(train);
    const std::vector<double> probs = classifier->PredictProba(test);
    if (probs.size() != test.size()) {
      throw Error("classifier returned " + std::to_string(probs.size()) +
                  " scores for " + std::to_string(test.size()) + " documents");
    }
    std::vector<int> gold;
    for (std::size_t j = 0; j < test.size(); ++j) {
      gold.push_back(*test[j].label);
      result.out_of_fold_probs[test_index[j]] = probs[j];
      ++result.evaluation_count[test_index[j]];
    }
    const MetricsResult m = ComputeMetrics(probs, gold, options.threshold);
    result.folds[fold] = FoldResult{fold, train.size(), test.size(),
                                    m.confusion, m.metrics};
  };

  const int jobs = std::clamp(options.jobs, 1, options.k);
  if (jobs == 1) {
    for (int fold = 0; fold < options.k; ++fold) run_fold(fold);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (int fold = next++; fold < options.k; fold = next++) {
          try {
            run_fold(fold);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
  }

  result.mean = MeanOf(result.folds);
  for (const auto& f : result.folds) result.pooled_confusion += f.confusion;
  result.pooled = MetricsFromConfusion(result.pooled_confusion);
  return result;
}

std::string RenderReport(const CVReport& report, ReportFormat format,
                         Aggregation aggregation) {
  const bool pooled = aggregation == Aggregation::kPooled;
  if (format == ReportFormat::kCsv) {
    std::string out = "architecture,fold,P,R,F,A\n";
    for (const auto& arch : report.architectures) {
      for (const auto& f : arch.folds) {
        out += CsvRow(arch.name, std::to_string(f.fold + 1), f.metrics);
      }
      out += CsvRow(arch.name, pooled ? "pooled" : "mean",
                    pooled ? arch.pooled : arch.mean);
    }
    return out;
  }
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "%-12s %8s %8s %8s %8s\n", "Model",
                "P (%)", "R (%)", "F (%)", "A (%)");
  out += line;
  for (const auto& arch : report.architectures) {
    const Metrics& m = pooled ? arch.pooled : arch.mean;
    std::snprintf(line, sizeof(line), "%-12s %8s %8s %8s %8s\n",
                  arch.name.c_str(), Fixed2(m.precision).c_str(),
                  Fixed2(m.recall).c_str(), Fixed2(m.f_score).c_str(),
                  Fixed2(m.accuracy).c_str());
    out += line;
  }
  return out;
}

std::vector<ReportCsvRow> ParseReportCsv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "architecture,fold,P,R,F,A") {
    throw InputError("report CSV: missing header");
  }
  std::vector<ReportCsvRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream cells(line);
    while (std::getline(cells, field, ',')) fields.push_back(field);
    if (fields.size() != 6) {
      throw InputError("report CSV line " + std::to_string(line_no) +
                       ": expected 6 fields");
    }
    ReportCsvRow row;
    row.architecture = fields[0];
    row.fold = fields[1];
    row.metrics.precision = ParseDouble(fields[2]);
    row.metrics.recall = ParseDouble(fields[3]);
    row.metrics.f_score = ParseDouble(fields[4]);
    row.metrics.accuracy = ParseDouble(fields[5]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string RenderMetadataJson(const CVReport& report) {
  nlohmann::ordered_json j;
  const RunMetadata& meta = report.metadata;
  j["toolkit_version"] = meta.toolkit_version;
  j["seed"] = meta.seed;
  j["k"] = meta.k;
  j["stratified"] = meta.stratified;
  j["corpus_checksum"] = meta.corpus_checksum;
  nlohmann::ordered_json settings = nlohmann::ordered_json::object();
  for (const auto& [key, value] : meta.settings) settings[key] = value;
  j["settings"] = settings;
  nlohmann::ordered_json archs = nlohmann::ordered_json::array();
  for (const auto& arch : report.architectures) {
    nlohmann::ordered_json a;
    a["architecture"] = arch.name;
    a["pooled_width"] = arch.pooled_width;
    a["fold_seeds"] = nlohmann::ordered_json::array();
    for (const auto& f : arch.folds) {
      a["fold_seeds"].push_back(DeriveSeed(meta.seed, "fold", f.fold));
    }
    a["mean"] = MetricsJson(arch.mean);
    a["pooled"] = MetricsJson(arch.pooled);
    archs.push_back(a);
  }
  j["architectures"] = archs;
  return j.dump(2) + "\n";
}

}  // namespace hsd
