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

#include "hsd/corpus.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "hsd/errors.h"
#include "json.hpp"

namespace hsd {
namespace {

bool IsWordByte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

bool IsSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

char ToLower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), ToLower);
  return out;
}

bool StartsWithNoCase(std::string_view text, std::size_t pos,
                      std::string_view prefix) {
  if (text.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (ToLower(text[pos + i]) != prefix[i]) return false;
  }
  return true;
}

// Length of a special token (<mention>, <url>) starting at pos, or 0.
std::size_t SpecialAt(std::string_view text, std::size_t pos) {
  for (std::string_view special : {kMentionToken, kUrlToken}) {
    if (StartsWithNoCase(text, pos, special)) return special.size();
  }
  return 0;
}

bool UrlAt(std::string_view text, std::size_t pos) {
  return StartsWithNoCase(text, pos, "http://") ||
         StartsWithNoCase(text, pos, "https://") ||
         StartsWithNoCase(text, pos, "www.");
}

// '@' or '#' directly followed by a word character.
bool MarkerAt(std::string_view text, std::size_t pos) {
  return (text[pos] == '@' || text[pos] == '#') && pos + 1 < text.size() &&
         IsWordByte(text[pos + 1]);
}

std::size_t SkipWord(std::string_view text, std::size_t pos) {
  while (pos < text.size() && IsWordByte(text[pos])) ++pos;
  return pos;
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const unsigned char c = text[i];
    if (IsSpace(c)) {
      ++i;
      continue;
    }
    if (std::size_t len = SpecialAt(text, i); len > 0) {
      tokens.push_back(Lower(text.substr(i, len)));
      i += len;
      continue;
    }
    if (UrlAt(text, i)) {
      // A URL runs to the next whitespace.
      while (i < n && !IsSpace(text[i])) ++i;
      tokens.emplace_back(kUrlToken);
      continue;
    }
    if (MarkerAt(text, i)) {
      const std::size_t end = SkipWord(text, i + 1);
      if (c == '@') {
        tokens.emplace_back(kMentionToken);
      } else {
        tokens.push_back(Lower(text.substr(i + 1, end - i - 1)));
      }
      i = end;
      continue;
    }
    if (IsWordByte(c)) {
      const std::size_t end = SkipWord(text, i);
      tokens.push_back(Lower(text.substr(i, end - i)));
      i = end;
      continue;
    }
    // Punctuation run.
    const std::size_t start = i;
    ++i;
    while (i < n && !IsSpace(text[i]) && !IsWordByte(text[i]) &&
           SpecialAt(text, i) == 0 && !MarkerAt(text, i)) {
      ++i;
    }
    tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

bool IsPunctuation(std::string_view token) {
  return std::none_of(token.begin(), token.end(),
                      [](char c) { return IsWordByte(c); });
}

Vocabulary::Vocabulary()
    : index_to_token_{std::string(kPadToken), std::string(kUnkToken)},
      counts_{0, 0} {
  token_to_index_.emplace(kPadToken, kPad);
  token_to_index_.emplace(kUnkToken, kUnk);
}

Vocabulary Vocabulary::FromTokens(std::vector<std::string> tokens,
                                  std::vector<int64_t> counts) {
  if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken) {
    throw InputError("vocabulary must start with the reserved tokens " +
                     std::string(kPadToken) + " and " + std::string(kUnkToken));
  }
  if (counts.empty()) counts.assign(tokens.size(), 0);
  if (counts.size() != tokens.size()) {
    throw InputError("vocabulary counts do not match token list");
  }
  Vocabulary vocab;
  vocab.index_to_token_ = std::move(tokens);
  vocab.counts_ = std::move(counts);
  vocab.token_to_index_.clear();
  for (std::size_t i = 0; i < vocab.index_to_token_.size(); ++i) {
    auto [it, inserted] =
        vocab.token_to_index_.emplace(vocab.index_to_token_[i], int(i));
    if (!inserted) {
      throw InputError("duplicate vocabulary token '" +
                       vocab.index_to_token_[i] + "'");
    }
  }
  return vocab;
}

std::optional<int> Vocabulary::Find(std::string_view token) const {
  auto it = token_to_index_.find(std::string(token));
  if (it == token_to_index_.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::Lookup(std::string_view token) const {
  return Find(token).value_or(kUnk);
}

bool Vocabulary::Contains(std::string_view token) const {
  return Find(token).has_value();
}

Vocabulary BuildVocabulary(
    const std::vector<std::vector<std::string>>& sentences, int min_count) {
  if (sentences.empty()) throw InputError("empty corpus");
  if (min_count < 1) throw InputError("min_count must be positive");
  std::map<std::string, int64_t> counts;
  for (const auto& sentence : sentences) {
    for (const auto& token : sentence) ++counts[token];
  }
  std::vector<std::pair<std::string, int64_t>> kept;
  for (auto& [token, count] : counts) {
    if (count >= min_count && token != kPadToken && token != kUnkToken) {
      kept.emplace_back(token, count);
    }
  }
  // counts is lexicographic already; a stable sort by count keeps ties in
  // that order.
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  std::vector<std::string> tokens{std::string(kPadToken),
                                  std::string(kUnkToken)};
  std::vector<int64_t> token_counts{0, 0};
  for (auto& [token, count] : kept) {
    tokens.push_back(token);
    token_counts.push_back(count);
  }
  return Vocabulary::FromTokens(std::move(tokens), std::move(token_counts));
}

Vocabulary BuildVocabulary(const std::vector<Document>& docs, int min_count) {
  if (docs.empty()) throw InputError("empty corpus");
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(docs.size());
  for (const auto& doc : docs) sentences.push_back(Tokenize(doc.text));
  return BuildVocabulary(sentences, min_count);
}

std::vector<int> Encode(const std::vector<std::string>& tokens,
                        const Vocabulary& vocab, int max_len) {
  if (max_len < 1) throw InputError("max_len must be at least 1");
  std::vector<int> ids(static_cast<std::size_t>(max_len), Vocabulary::kPad);
  const std::size_t n = std::min(tokens.size(), ids.size());
  for (std::size_t i = 0; i < n; ++i) ids[i] = vocab.Lookup(tokens[i]);
  return ids;
}

std::vector<int> Encode(const Document& doc, const Vocabulary& vocab,
                        int max_len) {
  return Encode(Tokenize(doc.text), vocab, max_len);
}

LanguageLexicon::LanguageLexicon(const std::vector<std::string>& entries) {
  for (const auto& entry : entries) Add(entry);
}

void LanguageLexicon::Add(std::string_view entry) {
  if (entry.empty() ||
      std::any_of(entry.begin(), entry.end(),
                  [](char c) { return IsSpace(c); })) {
    throw InputError("lexicon entry '" + std::string(entry) +
                     "' is empty or contains whitespace");
  }
  entries_.insert(Lower(entry));
}

bool LanguageLexicon::IsHindi(std::string_view token) const {
  return entries_.count(std::string(token)) > 0;
}

LanguageLexicon ParseLexicon(std::istream& in) {
  LanguageLexicon lexicon;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    lexicon.Add(std::string_view(line).substr(first, last - first + 1));
  }
  return lexicon;
}

LanguageLexicon LoadLexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open lexicon file: " + path);
  return ParseLexicon(in);
}

double HindiProportion(const std::vector<std::string>& tokens,
                       const LanguageIdentifier& lexicon) {
  std::size_t words = 0;
  std::size_t hindi = 0;
  for (const auto& token : tokens) {
    if (token == kMentionToken || token == kUrlToken || IsPunctuation(token)) {
      continue;
    }
    ++words;
    if (lexicon.IsHindi(token)) ++hindi;
  }
  return words == 0 ? 0.0 : static_cast<double>(hindi) / words;
}

CorpusStats ComputeCorpusStats(const std::vector<Document>& docs,
                               const Vocabulary& vocab,
                               const LanguageIdentifier& lexicon) {
  if (docs.empty()) throw InputError("empty corpus");
  CorpusStats stats;
  stats.num_documents = docs.size();
  stats.vocab_size = vocab.size() - 2;
  double pct_sum = 0.0;
  for (const auto& doc : docs) {
    if (doc.is_retweet.value_or(false)) ++stats.num_retweets;
    const auto tokens = Tokenize(doc.text);
    stats.total_tokens += tokens.size();
    pct_sum += 100.0 * HindiProportion(tokens, lexicon);
  }
  stats.pct_hindi_tokens_mean = pct_sum / docs.size();
  return stats;
}

std::vector<Document> ParseCorpus(std::istream& in) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(where + "invalid JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw InputError(where + "expected a JSON object");
    Document doc;
    if (!obj.contains("id")) throw InputError(where + "missing \"id\"");
    if (obj["id"].is_string()) {
      doc.id = obj["id"].get<std::string>();
    } else if (obj["id"].is_number_integer()) {
      doc.id = std::to_string(obj["id"].get<int64_t>());
    } else {
      throw InputError(where + "\"id\" must be a string");
    }
    if (doc.id.empty()) throw InputError(where + "empty \"id\"");
    if (!seen.insert(doc.id).second) {
      throw InputError(where + "duplicate id '" + doc.id + "'");
    }
    if (!obj.contains("text") || !obj["text"].is_string()) {
      throw InputError(where + "missing or non-string \"text\"");
    }
    doc.text = obj["text"].get<std::string>();
    if (obj.contains("label") && !obj["label"].is_null()) {
      const auto& label = obj["label"];
      if (!label.is_number_integer() ||
          (label.get<int64_t>() != 0 && label.get<int64_t>() != 1)) {
        throw InputError(where + "\"label\" must be 0 or 1");
      }
      doc.label = label.get<int>();
    }
    if (obj.contains("retweet") && !obj["retweet"].is_null()) {
      if (!obj["retweet"].is_boolean()) {
        throw InputError(where + "\"retweet\" must be true or false");
      }
      doc.is_retweet = obj["retweet"].get<bool>();
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> LoadCorpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus file: " + path);
  return ParseCorpus(in);
}

std::string SerializeCorpus(const std::vector<Document>& docs) {
  std::string out;
  for (const auto& doc : docs) {
    nlohmann::ordered_json obj;
    obj["id"] = doc.id;
    obj["text"] = doc.text;
    if (doc.label) obj["label"] = *doc.label;
    if (doc.is_retweet) obj["retweet"] = *doc.is_retweet;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

}  // namespace hsd
