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

#ifndef HSD_CORPUS_H_
#define HSD_CORPUS_H_

// Text ingestion: documents, tokenization, vocabularies, index encoding and
// corpus statistics.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hsd {

// One short text. label is 1 for hate, 0 for non-hate.
struct Document {
  std::string id;
  std::string text;
  std::optional<int> label;
  std::optional<bool> is_retweet;
};

inline constexpr std::string_view kMentionToken = "<mention>";
inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";

// Lowercases and splits a tweet-like text. Mentions collapse to <mention>,
// URLs to <url>, hashtags lose their '#', and runs of punctuation become
// separate tokens. Joining the output with spaces and tokenizing again
// yields the same list.
std::vector<std::string> Tokenize(std::string_view text);

// True when the token contains no word characters.
bool IsPunctuation(std::string_view token);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  // Vocabulary holding only the reserved entries.
  Vocabulary();

  // Builds from the given token list in index order; the first two entries
  // must be the reserved tokens. Throws InputError on duplicates.
  static Vocabulary FromTokens(std::vector<std::string> tokens,
                               std::vector<int64_t> counts = {});

  // Index of token, or kUnk when absent.
  int Lookup(std::string_view token) const;
  bool Contains(std::string_view token) const;
  std::optional<int> Find(std::string_view token) const;

  const std::string& Token(int index) const { return index_to_token_.at(index); }
  int64_t Count(int index) const { return counts_.at(index); }
  std::size_t size() const { return index_to_token_.size(); }
  const std::vector<std::string>& tokens() const { return index_to_token_; }
  const std::vector<int64_t>& counts() const { return counts_; }

  bool operator==(const Vocabulary& other) const {
    return index_to_token_ == other.index_to_token_ && counts_ == other.counts_;
  }

 private:
  std::vector<std::string> index_to_token_;
  std::vector<int64_t> counts_;
  std::unordered_map<std::string, int> token_to_index_;
};

// Vocabulary of every token occurring at least min_count times. Non-reserved
// indices are ordered by descending count, ties lexicographically.
// Throws InputError("empty corpus") when docs is empty.
Vocabulary BuildVocabulary(const std::vector<Document>& docs, int min_count);

// Same, over already tokenized sentences.
Vocabulary BuildVocabulary(const std::vector<std::vector<std::string>>& sentences,
                           int min_count);

// Maps tokens through vocab (missing -> UNK), truncating at the right and
// right-padding with PAD to exactly max_len entries.
std::vector<int> Encode(const std::vector<std::string>& tokens,
                        const Vocabulary& vocab, int max_len);
std::vector<int> Encode(const Document& doc, const Vocabulary& vocab,
                        int max_len);

// Decides whether a word token is Hindi. Implementations may consult a
// lexicon, a model or a remote service.
class LanguageIdentifier {
 public:
  virtual ~LanguageIdentifier() = default;
  virtual bool IsHindi(std::string_view token) const = 0;
};

// Static set of romanized Hindi word forms.
class LanguageLexicon : public LanguageIdentifier {
 public:
  LanguageLexicon() = default;
  // Entries are lowercased; entries containing whitespace are rejected.
  explicit LanguageLexicon(const std::vector<std::string>& entries);

  bool IsHindi(std::string_view token) const override;
  void Add(std::string_view entry);
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_set<std::string> entries_;
};

// One lowercase word per line; blank lines and '#' comments ignored.
LanguageLexicon ParseLexicon(std::istream& in);
LanguageLexicon LoadLexicon(const std::string& path);

// Fraction of word tokens identified as Hindi. <mention>, <url> and
// punctuation tokens are not counted. 0 when there are no word tokens.
double HindiProportion(const std::vector<std::string>& tokens,
                       const LanguageIdentifier& lexicon);

struct CorpusStats {
  std::size_t num_documents = 0;
  std::size_t num_retweets = 0;
  std::size_t total_tokens = 0;
  // Excludes the reserved PAD/UNK entries.
  std::size_t vocab_size = 0;
  double pct_hindi_tokens_mean = 0.0;
};

CorpusStats ComputeCorpusStats(const std::vector<Document>& docs,
                               const Vocabulary& vocab,
                               const LanguageIdentifier& lexicon);

// JSON lines: {"id": "...", "text": "...", "label": 0|1, "retweet": bool}.
// label and retweet are optional. Errors carry the 1-based line number.
std::vector<Document> ParseCorpus(std::istream& in);
std::vector<Document> LoadCorpus(const std::string& path);

// Writes documents in the same JSON-lines format.
std::string SerializeCorpus(const std::vector<Document>& docs);

}  // namespace hsd

#endif  // HSD_CORPUS_H_
