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

#ifndef HSD_EMBEDDINGS_H_
#define HSD_EMBEDDINGS_H_

// Skip-gram negative-sampling word embeddings and similarity probes.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hsd/corpus.h"
#include "hsd/tensor.h"

namespace hsd {

// Vocabulary-aligned [V, dim] matrix. Row i is the vector of
// vocab.Token(i); the reserved PAD/UNK rows are zero after training.
struct EmbeddingMatrix {
  Vocabulary vocab;
  Tensor vectors;

  std::size_t dim() const { return vectors.rank() == 2 ? vectors.dim(1) : 0; }
  std::span<const double> Row(int index) const;
  // Throws InputError when the token is out of vocabulary.
  std::span<const double> Row(std::string_view token) const;
};

struct SkipGramConfig {
  int dim = 300;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  int min_count = 5;
  double learning_rate = 0.025;  // decays linearly towards 1e-4 of itself
  double subsample_threshold = 1e-3;
  uint64_t seed = 1;

  void Validate() const;
};

struct SkipGramLog {
  // Negative-sampling loss after each epoch, averaged over a fixed sample of
  // (center, context, negatives) triples drawn once before training.
  std::vector<double> epoch_loss;
  std::size_t train_words = 0;
};

// Trains center vectors with skip-gram and negative sampling:
//   maximize log s(u_c . v_w) + sum_neg log s(-u_n . v_w)
// Negatives come from the unigram distribution raised to 0.75, frequent
// words are subsampled, and the context window is shrunk by a random
// amount at every position. Deterministic for a given seed.
// Throws InputError when nothing survives min_count filtering.
EmbeddingMatrix TrainEmbeddings(const std::vector<Document>& docs,
                                const SkipGramConfig& cfg,
                                SkipGramLog* log = nullptr);
EmbeddingMatrix TrainEmbeddings(
    const std::vector<std::vector<std::string>>& sentences,
    const SkipGramConfig& cfg, SkipGramLog* log = nullptr);

// dot(a, b) / (|a| |b|). Throws NumericError("undefined similarity") for a
// zero vector and on dimension mismatch.
double CosineSimilarity(std::span<const double> a, std::span<const double> b);

struct GroupSimilarity {
  double mean = 0.0;
  std::vector<std::string> used;
  std::vector<std::string> skipped;  // out of vocabulary
};

// Mean cosine similarity between reference and each in-vocabulary group
// word. Throws InputError when reference or every group word is OOV.
GroupSimilarity ComputeGroupSimilarity(std::string_view reference,
                                       const std::vector<std::string>& group,
                                       const EmbeddingMatrix& emb);

struct Coverage {
  std::vector<std::string> present;
  std::vector<std::string> missing;
};

Coverage CheckCoverage(const std::vector<std::string>& words,
                       const EmbeddingMatrix& emb);

// Top-k words by cosine similarity to word, excluding the word itself and
// zero rows; descending, ties by token. Throws InputError for an OOV word or
// k >= vocabulary size.
std::vector<std::pair<std::string, double>> NearestNeighbors(
    std::string_view word, int k, const EmbeddingMatrix& emb);

// Text format: header "V d", then per row the token and d numbers.
void WriteEmbeddings(std::ostream& out, const EmbeddingMatrix& emb);
EmbeddingMatrix ReadEmbeddings(std::istream& in);
void SaveEmbeddings(const EmbeddingMatrix& emb, const std::string& path);
EmbeddingMatrix LoadEmbeddings(const std::string& path);

struct WordGroup {
  std::string name;
  std::vector<std::string> words;
};

// One group per line: "name: word word ...". '#' starts a comment.
std::vector<WordGroup> ParseWordGroups(std::istream& in);
std::vector<WordGroup> LoadWordGroups(const std::string& path);

struct SimilarityRow {
  std::string group_name;
  double domain_similarity = 0.0;
  std::optional<double> general_similarity;
};

struct SimilarityReport {
  std::string reference_word;
  std::vector<SimilarityRow> rows;
};

// Group similarities under the domain embeddings and, when supplied, a
// second (general-purpose) embedding.
SimilarityReport ProbeSimilarity(std::string_view reference,
                                 const std::vector<WordGroup>& groups,
                                 const EmbeddingMatrix& domain,
                                 const EmbeddingMatrix* general = nullptr);

// CSV: group_name,domain_similarity,general_similarity (6 decimals; empty
// general cell when absent).
std::string RenderSimilarityCsv(const SimilarityReport& report);

}  // namespace hsd

#endif  // HSD_EMBEDDINGS_H_
