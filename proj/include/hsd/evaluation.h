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

#ifndef HSD_EVALUATION_H_
#define HSD_EVALUATION_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hsd/corpus.h"
#include "hsd/embeddings.h"
#include "hsd/models.h"

namespace hsd {

inline constexpr const char* kToolkitVersion = "1.0.0";

struct ConfusionMatrix {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  int64_t tn = 0;

  int64_t total() const { return tp + fp + fn + tn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const ConfusionMatrix&) const = default;
};

// Percentages in [0, 100].
struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  double accuracy = 0.0;

  bool operator==(const Metrics&) const = default;
};

struct MetricsResult {
  ConfusionMatrix confusion;
  Metrics metrics;
  // One entry per metric that hit a zero denominator and was set to 0.
  std::vector<std::string> warnings;
};

// Predicts positive iff prob >= threshold. Precision, recall and F-score
// with a zero denominator are reported as 0 and produce a warning.
// Throws InputError on length mismatch or empty input.
MetricsResult ComputeMetrics(std::span<const double> probs,
                             std::span<const int> gold, double threshold = 0.5);
Metrics MetricsFromConfusion(const ConfusionMatrix& cm,
                             std::vector<std::string>* warnings = nullptr);

struct FoldAssignment {
  int k = 0;
  uint64_t seed = 0;
  std::vector<int> fold_of;  // per sample index

  std::vector<std::size_t> Members(int fold) const;
};

// Shuffles each class with the seeded generator and deals its members
// round-robin over the folds, continuing from where the previous class
// stopped. Per-class fold counts then differ by at most one, and so do the
// fold sizes. Throws InputError for k < 2 or k > labels.size().
FoldAssignment StratifiedKFold(std::span<const int> labels, int k,
                               uint64_t seed);

struct TrainingLog {
  std::vector<double> epoch_loss;  // mean training-mode BCE per epoch
  // Called after every epoch with its 1-based index, when set.
  std::function<void(int epoch, ClassifierModel& model)> after_epoch;
};

// Runs spec.epochs epochs of shuffled mini-batch Adam over the encoded
// sequences. Randomness (shuffling, dropout) derives from seed.
void Fit(ClassifierModel& model, const std::vector<std::vector<int>>& encoded,
         std::span<const int> labels, uint64_t seed,
         TrainingLog* log = nullptr);

// Builds a model from emb (initialised from seed) and fits it to the labeled
// training documents. Throws InputError on an empty or unlabeled set.
ClassifierModel TrainModel(ModelSpec spec, const std::vector<Document>& train,
                           const EmbeddingMatrix& emb, uint64_t seed,
                           TrainingLog* log = nullptr);

// Inference-mode mean BCE.
double EvaluateLoss(ClassifierModel& model,
                    const std::vector<std::vector<int>>& encoded,
                    std::span<const int> labels);

// Anything that can be trained on documents and score new ones.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual void Fit(const std::vector<Document>& train) = 0;
  virtual std::vector<double> PredictProba(const std::vector<Document>& docs) = 0;
};

// Creates a fresh classifier for one fold. Must be safe to call from
// several threads.
using ClassifierFactory =
    std::function<std::unique_ptr<Classifier>(int fold, uint64_t fold_seed)>;

// Factory for the neural models; emb must outlive the factory.
ClassifierFactory NeuralClassifierFactory(const ModelSpec& spec,
                                          const EmbeddingMatrix& emb);

struct FoldResult {
  int fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  ConfusionMatrix confusion;
  Metrics metrics;
};

struct ArchitectureResult {
  std::string name;
  int pooled_width = 0;  // features entering the output layer
  std::vector<FoldResult> folds;
  Metrics mean;    // arithmetic mean of fold metrics
  Metrics pooled;  // metrics of all out-of-fold predictions together
  ConfusionMatrix pooled_confusion;
  std::vector<double> out_of_fold_probs;  // per document
  std::vector<int> evaluation_count;      // per document, 1 when sound
};

struct CrossValidationOptions {
  int k = 10;
  uint64_t seed = 1;
  int jobs = 1;
  double threshold = 0.5;
};

// Trains on k-1 folds and scores the held-out fold, for every fold. Each
// fold gets a seed derived from options.seed and its index, so results do
// not depend on options.jobs. Throws InputError on unlabeled documents.
ArchitectureResult CrossValidate(const std::vector<Document>& docs,
                                 const std::string& name,
                                 const ClassifierFactory& factory,
                                 const CrossValidationOptions& options);

struct RunMetadata {
  uint64_t seed = 0;
  int k = 0;
  bool stratified = true;
  std::string corpus_checksum;
  std::string toolkit_version = kToolkitVersion;
  std::vector<std::pair<std::string, std::string>> settings;
};

struct CVReport {
  std::vector<ArchitectureResult> architectures;
  RunMetadata metadata;
};

enum class ReportFormat { kTable, kCsv };
enum class Aggregation { kMeanOfFolds, kPooled };

// Table: one row per architecture with P, R, F, A in percent, two decimals.
// CSV: header "architecture,fold,P,R,F,A", the fold rows of every
// architecture and a summary row whose fold field is "mean" (or "pooled").
std::string RenderReport(const CVReport& report, ReportFormat format,
                         Aggregation aggregation = Aggregation::kMeanOfFolds);

struct ReportCsvRow {
  std::string architecture;
  std::string fold;
  Metrics metrics;
};

// Parses the CSV produced by RenderReport. Throws InputError when malformed.
std::vector<ReportCsvRow> ParseReportCsv(const std::string& csv);

// JSON document with the run metadata and the mean/pooled metrics.
std::string RenderMetadataJson(const CVReport& report);

}  // namespace hsd

#endif  // HSD_EVALUATION_H_
