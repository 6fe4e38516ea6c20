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

#ifndef HSD_TESTS_TEST_UTIL_H_
#define HSD_TESTS_TEST_UTIL_H_

// Test-only helpers: a central finite-difference gradient oracle and
// synthetic corpora. Nothing here calls Backward().

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hsd/autodiff.h"
#include "hsd/corpus.h"
#include "hsd/embeddings.h"
#include "hsd/rng.h"

namespace hsd::testing {

// |a - n| / max(|a|, |n|, floor). The floor keeps coordinates whose true
// gradient is ~0 from dividing rounding noise by ~0.
inline double RelativeError(double analytic, double numeric,
                            double floor = 1e-6) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "param[index]"
  int coordinates = 0;
};

// Builds the scalar loss on a fresh tape.
using LossFn = std::function<Var(Tape&)>;

inline double EvalLoss(const LossFn& loss) {
  Tape tape;
  return loss(tape).value()[0];
}

// Compares backward gradients of every parameter with central differences
// (step h) on `per_tensor` distinct random coordinates of each tensor, or on
// all of them when the tensor is smaller.
inline GradCheckResult CheckGradients(const LossFn& loss,
                                      const std::vector<Parameter*>& params,
                                      int per_tensor, uint64_t seed,
                                      double h = 1e-5) {
  for (Parameter* p : params) p->grad = Tensor(p->value.shape());
  {
    Tape tape;
    Var l = loss(tape);
    tape.Backward(l);
  }
  GradCheckResult result;
  Rng rng(seed);
  for (Parameter* p : params) {
    const std::size_t n = p->value.size();
    std::vector<std::size_t> coords;
    if (static_cast<std::size_t>(per_tensor) >= n) {
      for (std::size_t i = 0; i < n; ++i) coords.push_back(i);
    } else {
      // Distinct coordinates via a partial shuffle.
      std::vector<std::size_t> all(n);
      for (std::size_t i = 0; i < n; ++i) all[i] = i;
      for (int c = 0; c < per_tensor; ++c) {
        std::swap(all[c], all[c + rng.UniformInt(n - c)]);
        coords.push_back(all[c]);
      }
    }
    for (std::size_t i : coords) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = EvalLoss(loss);
      p->value[i] = saved - h;
      const double down = EvalLoss(loss);
      p->value[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double err = RelativeError(p->grad[i], numeric);
      ++result.coordinates;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = p->name + "[" + std::to_string(i) + "] analytic=" +
                       std::to_string(p->grad[i]) +
                       " numeric=" + std::to_string(numeric);
      }
    }
  }
  return result;
}

inline Parameter RandomParameter(const std::string& name, Shape shape, Rng& rng,
                                 double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = scale * rng.Uniform(-1.0, 1.0);
  return Parameter(name, std::move(t));
}

// Code-mixed short texts whose label is decided by which word pool they
// draw from; the two pools do not overlap.
inline std::vector<Document> SeparableCorpus(int n, uint64_t seed,
                                             double positive_rate = 0.5) {
  static const std::vector<std::string> kHate = {
      "kutta", "gundo", "nafrat", "hate", "saale", "kameene", "bewakoof",
      "ghatiya"};
  static const std::vector<std::string> kCalm = {
      "acha", "movie", "pyaar", "khana", "dost", "weekend", "cricket",
      "chai"};
  static const std::vector<std::string> kShared = {"hai", "ye", "the", "is",
                                                   "aur", "to"};
  Rng rng(seed);
  std::vector<Document> docs;
  const int positives = static_cast<int>(std::lround(n * positive_rate));
  for (int i = 0; i < n; ++i) {
    const bool hate = i < positives;
    const auto& pool = hate ? kHate : kCalm;
    std::string text = rng.Bernoulli(0.3) ? "@user " : "";
    const int len = 4 + static_cast<int>(rng.UniformInt(5));
    for (int w = 0; w < len; ++w) {
      const bool shared = rng.Bernoulli(0.4);
      const auto& src = shared ? kShared : pool;
      text += src[rng.UniformInt(src.size())];
      text += ' ';
    }
    if (rng.Bernoulli(0.2)) text += "!!";
    Document doc;
    doc.id = "d" + std::to_string(i);
    doc.text = text;
    doc.label = hate ? 1 : 0;
    doc.is_retweet = rng.Bernoulli(0.25);
    docs.push_back(std::move(doc));
  }
  // Interleave classes so the order carries no signal.
  Rng shuffle(seed + 1);
  for (std::size_t i = docs.size(); i > 1; --i) {
    std::swap(docs[i - 1], docs[shuffle.UniformInt(i)]);
  }
  return docs;
}

// Embedding matrix over every token of docs with N(0, scale^2) entries.
inline EmbeddingMatrix RandomEmbeddings(const std::vector<Document>& docs,
                                        int dim, uint64_t seed,
                                        double scale = 0.1) {
  EmbeddingMatrix emb;
  emb.vocab = BuildVocabulary(docs, 1);
  emb.vectors = Tensor({emb.vocab.size(), static_cast<std::size_t>(dim)});
  Rng rng(seed);
  for (std::size_t i = 2 * dim; i < emb.vectors.size(); ++i) {
    emb.vectors[i] = scale * rng.Normal();
  }
  return emb;
}

// Sentences drawn only from {a, b} or only from {x, y}.
inline std::vector<std::vector<std::string>> TwoClusterSentences(
    int n, uint64_t seed, int length = 8) {
  Rng rng(seed);
  std::vector<std::vector<std::string>> sentences;
  for (int i = 0; i < n; ++i) {
    const bool first = i % 2 == 0;
    std::vector<std::string> s;
    for (int w = 0; w < length; ++w) {
      const bool pick = rng.Bernoulli(0.5);
      s.push_back(first ? (pick ? "a" : "b") : (pick ? "x" : "y"));
    }
    sentences.push_back(std::move(s));
  }
  return sentences;
}

}  // namespace hsd::testing

#endif  // HSD_TESTS_TEST_UTIL_H_
