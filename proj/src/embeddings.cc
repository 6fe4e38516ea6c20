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

#include "hsd/embeddings.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "hsd/errors.h"
#include "hsd/rng.h"

namespace hsd {
namespace {

constexpr std::size_t kMonitorPairs = 20000;

double LogSigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Negative-sampling distribution over vocabulary ids, proportional to
// count^0.75. Reserved ids have zero mass.
class NegativeSampler {
 public:
  explicit NegativeSampler(const Vocabulary& vocab) {
    cumulative_.reserve(vocab.size());
    double total = 0.0;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      total += std::pow(static_cast<double>(vocab.Count(int(i))), 0.75);
      cumulative_.push_back(total);
    }
  }

  int Sample(Rng& rng) const {
    const double r = rng.Uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
    if (it == cumulative_.end()) --it;
    return static_cast<int>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

std::string Fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::span<const double> EmbeddingMatrix::Row(int index) const {
  const std::size_t d = dim();
  return {vectors.data() + static_cast<std::size_t>(index) * d, d};
}

std::span<const double> EmbeddingMatrix::Row(std::string_view token) const {
  auto idx = vocab.Find(token);
  if (!idx) throw InputError("'" + std::string(token) + "' is not in the vocabulary");
  return Row(*idx);
}

void SkipGramConfig::Validate() const {
  if (dim < 1 || window < 1 || negatives < 1 || epochs < 1 || min_count < 1) {
    throw InputError(
        "skip-gram dim, window, negatives, epochs and min_count must be "
        "positive");
  }
  if (!(learning_rate > 0)) throw InputError("learning rate must be positive");
  if (!(subsample_threshold >= 0)) {
    throw InputError("subsample threshold must be non-negative");
  }
}

EmbeddingMatrix TrainEmbeddings(const std::vector<Document>& docs,
                                const SkipGramConfig& cfg, SkipGramLog* log) {
  if (docs.empty()) throw InputError("empty corpus");
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(docs.size());
  for (const auto& doc : docs) sentences.push_back(Tokenize(doc.text));
  return TrainEmbeddings(sentences, cfg, log);
}

EmbeddingMatrix TrainEmbeddings(
    const std::vector<std::vector<std::string>>& sentences,
    const SkipGramConfig& cfg, SkipGramLog* log) {
  cfg.Validate();
  Vocabulary vocab = BuildVocabulary(sentences, cfg.min_count);
  if (vocab.size() <= 2) {
    throw InputError("empty corpus after min_count filtering (min_count = " +
                     std::to_string(cfg.min_count) + ")");
  }
  const std::size_t v_size = vocab.size();
  const std::size_t dim = static_cast<std::size_t>(cfg.dim);

  // Rare words are dropped before windowing.
  std::vector<std::vector<int>> corpus;
  corpus.reserve(sentences.size());
  std::size_t train_words = 0;
  for (const auto& sentence : sentences) {
    std::vector<int> ids;
    for (const auto& token : sentence) {
      if (auto id = vocab.Find(token); id && *id >= 2) ids.push_back(*id);
    }
    train_words += ids.size();
    corpus.push_back(std::move(ids));
  }

  Rng rng(DeriveSeed(cfg.seed, "sgns"));
  Tensor input({v_size, dim});
  for (std::size_t r = 2; r < v_size; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      input[r * dim + c] = (rng.Uniform() - 0.5) / static_cast<double>(dim);
    }
  }
  std::vector<double> output(v_size * dim, 0.0);

  // Keep probability per id (word2vec subsampling formula).
  std::vector<double> keep(v_size, 1.0);
  if (cfg.subsample_threshold > 0) {
    const double threshold = cfg.subsample_threshold * train_words;
    for (std::size_t i = 2; i < v_size; ++i) {
      const double count = static_cast<double>(vocab.Count(int(i)));
      keep[i] = (std::sqrt(count / threshold) + 1.0) * threshold / count;
    }
  }

  const NegativeSampler sampler(vocab);

  // Fixed probe pairs with fixed negatives, scored after every epoch so the
  // logged loss does not depend on the epoch's own random draws.
  struct Probe {
    int center, context;
    std::vector<int> negatives;
  };
  std::vector<Probe> probes;
  {
    Rng probe_rng(DeriveSeed(cfg.seed, "sgns-monitor"));
    std::vector<std::pair<std::size_t, int>> positions;
    for (std::size_t s = 0; s < corpus.size(); ++s) {
      for (int pos = 0; pos < static_cast<int>(corpus[s].size()); ++pos) {
        positions.push_back({s, pos});
      }
    }
    const std::size_t n_probes = std::min<std::size_t>(kMonitorPairs, 4 * train_words);
    for (std::size_t i = 0; log && i < n_probes && !positions.empty(); ++i) {
      const auto [s, pos] = positions[probe_rng.UniformInt(positions.size())];
      const auto& ids = corpus[s];
      if (ids.size() < 2) continue;
      int ctx = pos;
      while (ctx == pos) {
        const int lo = std::max(0, pos - cfg.window);
        const int hi = std::min(static_cast<int>(ids.size()) - 1, pos + cfg.window);
        ctx = lo + static_cast<int>(probe_rng.UniformInt(hi - lo + 1));
      }
      Probe probe{ids[pos], ids[ctx], {}};
      for (int d = 0; d < cfg.negatives; ++d) {
        const int target = sampler.Sample(probe_rng);
        if (target != probe.context) probe.negatives.push_back(target);
      }
      probes.push_back(std::move(probe));
    }
  }
  auto probe_loss = [&] {
    double sum = 0.0;
    for (const Probe& p : probes) {
      const double* u = input.data() + static_cast<std::size_t>(p.center) * dim;
      auto dot = [&](int target) {
        const double* v = output.data() + static_cast<std::size_t>(target) * dim;
        double f = 0.0;
        for (std::size_t c = 0; c < dim; ++c) f += u[c] * v[c];
        return f;
      };
      sum -= LogSigmoid(dot(p.context));
      for (int n : p.negatives) sum -= LogSigmoid(-dot(n));
    }
    return probes.empty() ? 0.0 : sum / static_cast<double>(probes.size());
  };
  const double total = static_cast<double>(cfg.epochs) * train_words + 1.0;
  std::size_t processed = 0;
  std::vector<double> hidden_grad(dim);
  std::vector<int> kept;
  if (log) {
    log->epoch_loss.clear();
    log->train_words = train_words;
  }

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& ids : corpus) {
      kept.clear();
      for (int id : ids) {
        if (keep[id] >= 1.0 || rng.Uniform() < keep[id]) kept.push_back(id);
      }
      processed += ids.size();
      const double alpha =
          cfg.learning_rate * std::max(1e-4, 1.0 - processed / total);
      const int n = static_cast<int>(kept.size());
      for (int pos = 0; pos < n; ++pos) {
        const int span = 1 + static_cast<int>(rng.UniformInt(cfg.window));
        const int center = kept[pos];
        double* u = input.data() + static_cast<std::size_t>(center) * dim;
        for (int ctx = std::max(0, pos - span);
             ctx <= std::min(n - 1, pos + span); ++ctx) {
          if (ctx == pos) continue;
          const int context = kept[ctx];
          std::fill(hidden_grad.begin(), hidden_grad.end(), 0.0);
          for (int d = 0; d <= cfg.negatives; ++d) {
            int target;
            double label;
            if (d == 0) {
              target = context;
              label = 1.0;
            } else {
              target = sampler.Sample(rng);
              if (target == context) continue;
              label = 0.0;
            }
            double* v = output.data() + static_cast<std::size_t>(target) * dim;
            double f = 0.0;
            for (std::size_t c = 0; c < dim; ++c) f += u[c] * v[c];
            const double g = (label - Sigmoid(f)) * alpha;
            for (std::size_t c = 0; c < dim; ++c) hidden_grad[c] += g * v[c];
            for (std::size_t c = 0; c < dim; ++c) v[c] += g * u[c];
          }
          for (std::size_t c = 0; c < dim; ++c) u[c] += hidden_grad[c];
        }
      }
    }
    if (log) log->epoch_loss.push_back(probe_loss());
  }
  return EmbeddingMatrix{std::move(vocab), std::move(input)};
}

double CosineSimilarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw NumericError("cosine similarity of vectors with dimensions " +
                       std::to_string(a.size()) + " and " +
                       std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw NumericError("undefined similarity");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

GroupSimilarity ComputeGroupSimilarity(std::string_view reference,
                                       const std::vector<std::string>& group,
                                       const EmbeddingMatrix& emb) {
  if (!emb.vocab.Contains(reference)) {
    throw InputError("reference word '" + std::string(reference) +
                     "' is not in the vocabulary");
  }
  const auto ref = emb.Row(reference);
  GroupSimilarity result;
  double sum = 0.0;
  for (const auto& word : group) {
    if (!emb.vocab.Contains(word)) {
      result.skipped.push_back(word);
      continue;
    }
    sum += CosineSimilarity(ref, emb.Row(word));
    result.used.push_back(word);
  }
  if (result.used.empty()) {
    throw InputError("no word of the group is in the vocabulary");
  }
  result.mean = sum / static_cast<double>(result.used.size());
  return result;
}

Coverage CheckCoverage(const std::vector<std::string>& words,
                       const EmbeddingMatrix& emb) {
  Coverage coverage;
  for (const auto& word : words) {
    (emb.vocab.Contains(word) ? coverage.present : coverage.missing)
        .push_back(word);
  }
  return coverage;
}

std::vector<std::pair<std::string, double>> NearestNeighbors(
    std::string_view word, int k, const EmbeddingMatrix& emb) {
  auto idx = emb.vocab.Find(word);
  if (!idx) {
    throw InputError("'" + std::string(word) + "' is not in the vocabulary");
  }
  if (k < 1 || static_cast<std::size_t>(k) >= emb.vocab.size()) {
    throw InputError("k must be in [1, vocabulary size)");
  }
  const auto query = emb.Row(*idx);
  std::vector<std::pair<std::string, double>> scored;
  for (std::size_t i = 0; i < emb.vocab.size(); ++i) {
    if (static_cast<int>(i) == *idx) continue;
    const auto row = emb.Row(int(i));
    if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) {
      continue;
    }
    scored.emplace_back(emb.vocab.Token(int(i)), CosineSimilarity(query, row));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (scored.size() > static_cast<std::size_t>(k)) scored.resize(k);
  return scored;
}

void WriteEmbeddings(std::ostream& out, const EmbeddingMatrix& emb) {
  if (!emb.vectors.AllFinite()) {
    throw NumericError("refusing to save non-finite embeddings");
  }
  const std::size_t d = emb.dim();
  out << emb.vocab.size() << ' ' << d << '\n';
  for (std::size_t i = 0; i < emb.vocab.size(); ++i) {
    out << emb.vocab.Token(int(i));
    for (double v : emb.Row(int(i))) out << ' ' << FormatExact(v);
    out << '\n';
  }
}

EmbeddingMatrix ReadEmbeddings(std::istream& in) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) {
    throw InputError("line 1: missing header \"V d\"");
  }
  std::size_t rows = 0, dim = 0;
  {
    std::istringstream header(line);
    long long r = -1, d = -1;
    std::string extra;
    if (!(header >> r >> d) || (header >> extra) || r < 0 || d < 1) {
      throw InputError("line 1: malformed header '" + line +
                       "', expected \"V d\"");
    }
    rows = static_cast<std::size_t>(r);
    dim = static_cast<std::size_t>(d);
  }
  std::vector<std::string> tokens;
  std::vector<double> data;
  data.reserve(rows * dim);
  std::unordered_set<std::string> seen;
  while (tokens.size() < rows && std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) {
      throw InputError("line " + std::to_string(line_no) + ": empty row");
    }
    if (!seen.insert(token).second) {
      throw InputError("line " + std::to_string(line_no) +
                       ": duplicate token '" + token + "'");
    }
    std::string value;
    std::size_t count = 0;
    while (fields >> value) {
      ++count;
      if (count > dim) break;
      try {
        data.push_back(ParseDouble(value));
      } catch (const InputError& e) {
        throw InputError("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (count != dim) {
      throw InputError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(dim) + " values for '" + token +
                       "', found " + (count > dim ? "more" : std::to_string(count)));
    }
    tokens.push_back(token);
  }
  if (tokens.size() != rows) {
    throw InputError("header promises " + std::to_string(rows) +
                     " rows but the file has " + std::to_string(tokens.size()));
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw InputError("line " + std::to_string(line_no) +
                       ": unexpected row beyond the header count");
    }
  }

  // Files written by other tools lack the reserved rows; prepend zero rows.
  const bool has_reserved =
      rows >= 2 && tokens[0] == kPadToken && tokens[1] == kUnkToken;
  if (!has_reserved) {
    for (const auto& t : tokens) {
      if (t == kPadToken || t == kUnkToken) {
        throw InputError("reserved token '" + t +
                         "' must appear only as the first two rows");
      }
    }
    tokens.insert(tokens.begin(), {std::string(kPadToken), std::string(kUnkToken)});
    data.insert(data.begin(), 2 * dim, 0.0);
  }
  const std::size_t v = tokens.size();
  EmbeddingMatrix emb;
  emb.vocab = Vocabulary::FromTokens(std::move(tokens));
  emb.vectors = Tensor({v, dim}, std::move(data));
  return emb;
}

void SaveEmbeddings(const EmbeddingMatrix& emb, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write embeddings file: " + path);
  WriteEmbeddings(out, emb);
  if (!out) throw InputError("failed writing embeddings file: " + path);
}

EmbeddingMatrix LoadEmbeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open embeddings file: " + path);
  try {
    return ReadEmbeddings(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::vector<WordGroup> ParseWordGroups(std::istream& in) {
  std::vector<WordGroup> groups;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw InputError("line " + std::to_string(line_no) +
                       ": expected \"name: word word ...\"");
    }
    WordGroup group;
    std::istringstream name(line.substr(0, colon));
    name >> group.name;
    std::istringstream words(line.substr(colon + 1));
    std::string word;
    while (words >> word) group.words.push_back(word);
    if (group.name.empty() || group.words.empty()) {
      throw InputError("line " + std::to_string(line_no) +
                       ": group needs a name and at least one word");
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

std::vector<WordGroup> LoadWordGroups(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open group word-list file: " + path);
  return ParseWordGroups(in);
}

SimilarityReport ProbeSimilarity(std::string_view reference,
                                 const std::vector<WordGroup>& groups,
                                 const EmbeddingMatrix& domain,
                                 const EmbeddingMatrix* general) {
  SimilarityReport report;
  report.reference_word = std::string(reference);
  for (const auto& group : groups) {
    SimilarityRow row;
    row.group_name = group.name;
    row.domain_similarity =
        ComputeGroupSimilarity(reference, group.words, domain).mean;
    if (general != nullptr) {
      row.general_similarity =
          ComputeGroupSimilarity(reference, group.words, *general).mean;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string RenderSimilarityCsv(const SimilarityReport& report) {
  std::string out = "group_name,domain_similarity,general_similarity\n";
  for (const auto& row : report.rows) {
    out += row.group_name + "," + Fixed6(row.domain_similarity) + ",";
    if (row.general_similarity) out += Fixed6(*row.general_similarity);
    out += "\n";
  }
  return out;
}

}  // namespace hsd
