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

#include "hsd/cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "hsd/corpus.h"
#include "hsd/embeddings.h"
#include "hsd/errors.h"
#include "hsd/evaluation.h"
#include "hsd/models.h"
#include "hsd/rng.h"

namespace hsd {
namespace {

namespace fs = std::filesystem;

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string ReadFile(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(std::string("cannot open ") + what + ": " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
  if (!out) throw InputError("failed writing " + path.string());
}

fs::path PrepareOutDir(const std::string& dir) {
  if (dir.empty()) throw InputError("--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir);
  return fs::path(dir);
}

void RequireFile(const std::string& path, const char* flag) {
  if (path.empty()) throw InputError(std::string(flag) + " is required");
  if (!fs::exists(path)) {
    throw InputError(std::string("file not found for ") + flag + ": " + path);
  }
}

uint64_t ParseSeed(const std::string& text) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(text, &pos);
    if (pos == text.size() && !text.empty() && text[0] != '-') return v;
  } catch (const std::exception&) {
  }
  throw InputError("invalid seed '" + text + "'");
}

int ParsePositive(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(text, &pos);
    if (pos == text.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw InputError("invalid value for " + key + ": '" + text + "'");
}

std::string Fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

// Flags shared by several subcommands. Values given on the command line
// override the --config file.
struct Flags {
  std::string corpus;
  std::string lexicon;
  std::string embeddings;
  std::string embeddings_general;
  std::vector<std::string> arch;
  std::string k;
  std::string seed;
  std::string jobs;
  std::string out;
  std::string config;
  std::string max_len;
  bool freeze_embeddings = false;
  bool pooled = false;
  std::string reference;
  std::string groups;
  std::string model;
};

RunConfig Resolve(const Flags& flags) {
  RunConfig cfg = flags.config.empty() ? RunConfig() : RunConfig::Load(flags.config);
  auto set = [&](const char* key, const std::string& value) {
    if (!value.empty()) cfg.Set(key, value);
  };
  set("corpus", flags.corpus);
  set("lexicon", flags.lexicon);
  set("embeddings", flags.embeddings);
  set("embeddings_general", flags.embeddings_general);
  set("k", flags.k);
  set("seed", flags.seed);
  set("jobs", flags.jobs);
  set("out", flags.out);
  set("model.max_len", flags.max_len);
  set("reference", flags.reference);
  set("groups", flags.groups);
  set("model", flags.model);
  if (!flags.arch.empty()) {
    std::string joined;
    for (const auto& a : flags.arch) joined += (joined.empty() ? "" : ",") + a;
    cfg.Set("arch", joined);
  }
  if (flags.freeze_embeddings) cfg.Set("model.embeddings_trainable", "false");
  if (flags.pooled) cfg.Set("aggregation", "pooled");
  if (!cfg.Has("seed")) cfg.Set("seed", "1");
  return cfg;
}

ModelSpec SpecFrom(const RunConfig& cfg) {
  ModelSpec spec;
  for (const auto& [key, value] : cfg.values()) {
    if (key.rfind("model.", 0) == 0) spec.Set(key.substr(6), value);
  }
  spec.Validate();
  return spec;
}

SkipGramConfig SkipGramFrom(const RunConfig& cfg) {
  SkipGramConfig sg;
  for (const auto& [key, value] : cfg.values()) {
    if (key.rfind("sgns.", 0) != 0) continue;
    const std::string name = key.substr(5);
    if (name == "dim") {
      sg.dim = ParsePositive(key, value);
    } else if (name == "window") {
      sg.window = ParsePositive(key, value);
    } else if (name == "negatives") {
      sg.negatives = ParsePositive(key, value);
    } else if (name == "epochs") {
      sg.epochs = ParsePositive(key, value);
    } else if (name == "min_count") {
      sg.min_count = ParsePositive(key, value);
    } else if (name == "learning_rate") {
      sg.learning_rate = ParseDouble(value);
    } else if (name == "subsample_threshold") {
      sg.subsample_threshold = ParseDouble(value);
    } else {
      throw InputError("unknown setting '" + key + "'");
    }
  }
  sg.seed = DeriveSeed(ParseSeed(cfg.Get("seed")), "embeddings");
  sg.Validate();
  return sg;
}

std::vector<Architecture> ArchitecturesFrom(const RunConfig& cfg) {
  const std::string list = cfg.Get("arch", "cnn1d,lstm,bilstm");
  std::vector<Architecture> archs;
  std::istringstream in(list);
  std::string name;
  while (std::getline(in, name, ',')) archs.push_back(ParseArchitecture(Trim(name)));
  if (archs.empty()) throw InputError("no architecture given");
  return archs;
}

int CmdStats(const RunConfig& cfg, std::ostream& out) {
  RequireFile(cfg.Get("corpus"), "--corpus");
  RequireFile(cfg.Get("lexicon"), "--lexicon");
  const auto docs = LoadCorpus(cfg.Get("corpus"));
  if (docs.empty()) throw InputError("empty corpus");
  const auto lexicon = LoadLexicon(cfg.Get("lexicon"));
  const auto vocab = BuildVocabulary(docs, 1);
  const CorpusStats stats = ComputeCorpusStats(docs, vocab, lexicon);
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"Number of Tweets", std::to_string(stats.num_documents)},
      {"Number of Retweets", std::to_string(stats.num_retweets)},
      {"Total Number of Words", std::to_string(stats.total_tokens)},
      {"Size of Vocabulary", std::to_string(stats.vocab_size)},
      {"% Hindi Words per Tweet", Fixed(stats.pct_hindi_tokens_mean, 2)},
  };
  std::string table, csv = "statistic,value\n";
  char line[128];
  for (const auto& [name, value] : rows) {
    std::snprintf(line, sizeof(line), "%-26s %s\n", name.c_str(), value.c_str());
    table += line;
    csv += name + "," + value + "\n";
  }
  out << table;
  if (cfg.Has("out")) {
    const fs::path dir = PrepareOutDir(cfg.Get("out"));
    WriteFile(dir / "corpus_stats.csv", csv);
    WriteFile(dir / "effective_config.txt", cfg.Render());
  }
  return kExitOk;
}

int CmdTrainEmbeddings(const RunConfig& cfg, std::ostream& out) {
  RequireFile(cfg.Get("corpus"), "--corpus");
  const SkipGramConfig sg = SkipGramFrom(cfg);
  const fs::path dir = PrepareOutDir(cfg.Get("out"));
  const auto docs = LoadCorpus(cfg.Get("corpus"));
  if (docs.empty()) throw InputError("empty corpus");
  SkipGramLog log;
  const EmbeddingMatrix emb = TrainEmbeddings(docs, sg, &log);
  SaveEmbeddings(emb, (dir / "embeddings.txt").string());
  WriteFile(dir / "effective_config.txt", cfg.Render());
  out << "vocabulary " << emb.vocab.size() << ", dim " << emb.dim()
      << ", training words " << log.train_words << "\n";
  for (std::size_t e = 0; e < log.epoch_loss.size(); ++e) {
    out << "epoch " << e + 1 << " loss " << Fixed(log.epoch_loss[e], 6) << "\n";
  }
  out << "wrote " << (dir / "embeddings.txt").string() << "\n";
  return kExitOk;
}

int CmdProbe(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  RequireFile(cfg.Get("embeddings"), "--embeddings");
  RequireFile(cfg.Get("groups"), "--groups");
  if (!cfg.Has("reference")) throw InputError("--reference is required");
  const std::string reference = cfg.Get("reference");
  const EmbeddingMatrix domain = LoadEmbeddings(cfg.Get("embeddings"));
  std::optional<EmbeddingMatrix> general;
  if (cfg.Has("embeddings_general")) {
    RequireFile(cfg.Get("embeddings_general"), "--embeddings-general");
    general = LoadEmbeddings(cfg.Get("embeddings_general"));
  }
  const auto groups = LoadWordGroups(cfg.Get("groups"));
  if (!domain.vocab.Contains(reference)) {
    throw InputError("reference word '" + reference +
                     "' is not in the domain embeddings");
  }
  if (general && !general->vocab.Contains(reference)) {
    throw InputError("reference word '" + reference +
                     "' is not in the general embeddings");
  }
  for (const auto& group : groups) {
    const auto cov = CheckCoverage(group.words, domain);
    for (const auto& w : cov.missing) {
      err << "note: group " << group.name << ": '" << w
          << "' missing from domain embeddings\n";
    }
  }
  const SimilarityReport report = ProbeSimilarity(
      reference, groups, domain, general ? &*general : nullptr);
  const std::string csv = RenderSimilarityCsv(report);
  out << csv;
  if (cfg.Has("out")) {
    const fs::path dir = PrepareOutDir(cfg.Get("out"));
    WriteFile(dir / "similarity.csv", csv);
    WriteFile(dir / "effective_config.txt", cfg.Render());
  }
  return kExitOk;
}

int CmdCrossValidate(const RunConfig& cfg, std::ostream& out) {
  RequireFile(cfg.Get("corpus"), "--corpus");
  RequireFile(cfg.Get("embeddings"), "--embeddings");
  const auto archs = ArchitecturesFrom(cfg);
  ModelSpec base = SpecFrom(cfg);
  const int k = ParsePositive("k", cfg.Get("k", "10"));
  const int jobs = ParsePositive("jobs", cfg.Get("jobs", "1"));
  const uint64_t seed = ParseSeed(cfg.Get("seed"));
  const bool pooled = cfg.Get("aggregation", "mean") == "pooled";
  const fs::path dir = PrepareOutDir(cfg.Get("out"));

  const std::string corpus_bytes = ReadFile(cfg.Get("corpus"), "corpus file");
  std::istringstream corpus_in(corpus_bytes);
  const auto docs = ParseCorpus(corpus_in);
  if (docs.empty()) throw InputError("empty corpus");
  const EmbeddingMatrix emb = LoadEmbeddings(cfg.Get("embeddings"));
  base.embedding_dim = static_cast<int>(emb.dim());

  CVReport report;
  report.metadata.seed = seed;
  report.metadata.k = k;
  char checksum[32];
  std::snprintf(checksum, sizeof(checksum), "fnv1a64:%016llx",
                static_cast<unsigned long long>(Fnv1a64(corpus_bytes)));
  report.metadata.corpus_checksum = checksum;
  report.metadata.settings = {{"aggregation", pooled ? "pooled" : "mean"},
                              {"threshold", "0.5"},
                              {"bce_clip", FormatExact(kBceClip)}};
  for (const auto& [key, value] : base.ToKeyValues()) {
    if (key != "architecture" && key != "seed") {
      report.metadata.settings.emplace_back("model." + key, value);
    }
  }

  CrossValidationOptions options;
  options.k = k;
  options.seed = seed;
  options.jobs = jobs;
  for (Architecture arch : archs) {
    ModelSpec spec = base;
    spec.architecture = arch;
    spec.Validate();
    report.architectures.push_back(
        CrossValidate(docs, std::string(ArchitectureLabel(arch)),
                      NeuralClassifierFactory(spec, emb), options));
    report.architectures.back().pooled_width = spec.PooledWidth();
  }
  const Aggregation agg = pooled ? Aggregation::kPooled : Aggregation::kMeanOfFolds;
  const std::string table = RenderReport(report, ReportFormat::kTable, agg);
  WriteFile(dir / "cv_report.csv", RenderReport(report, ReportFormat::kCsv, agg));
  WriteFile(dir / "cv_report.txt", table);
  WriteFile(dir / "cv_metadata.json", RenderMetadataJson(report));
  WriteFile(dir / "effective_config.txt", cfg.Render());
  out << table;
  return kExitOk;
}

int CmdTrain(const RunConfig& cfg, std::ostream& out) {
  RequireFile(cfg.Get("corpus"), "--corpus");
  RequireFile(cfg.Get("embeddings"), "--embeddings");
  const auto archs = ArchitecturesFrom(cfg);
  if (archs.size() != 1) throw InputError("train needs exactly one --arch");
  ModelSpec spec = SpecFrom(cfg);
  spec.architecture = archs.front();
  const uint64_t seed = DeriveSeed(ParseSeed(cfg.Get("seed")), "train");
  const fs::path dir = PrepareOutDir(cfg.Get("out"));
  const auto docs = LoadCorpus(cfg.Get("corpus"));
  if (docs.empty()) throw InputError("empty corpus");
  const EmbeddingMatrix emb = LoadEmbeddings(cfg.Get("embeddings"));
  spec.embedding_dim = static_cast<int>(emb.dim());
  TrainingLog log;
  const ClassifierModel model = TrainModel(spec, docs, emb, seed, &log);
  model.Save((dir / "model.ckpt").string());
  WriteFile(dir / "effective_config.txt", cfg.Render());
  for (std::size_t e = 0; e < log.epoch_loss.size(); ++e) {
    out << "epoch " << e + 1 << " loss " << Fixed(log.epoch_loss[e], 6) << "\n";
  }
  out << "wrote " << (dir / "model.ckpt").string() << "\n";
  return kExitOk;
}

int CmdPredict(const RunConfig& cfg, std::ostream& out) {
  RequireFile(cfg.Get("model"), "--model");
  RequireFile(cfg.Get("corpus"), "--corpus");
  ClassifierModel model = ClassifierModel::Load(cfg.Get("model"));
  const auto docs = LoadCorpus(cfg.Get("corpus"));
  const auto probs = model.Predict(model.EncodeAll(docs));
  std::string csv = "id,probability,prediction\n";
  for (std::size_t i = 0; i < docs.size(); ++i) {
    csv += docs[i].id + "," + FormatExact(probs[i]) + "," +
           (probs[i] >= 0.5 ? "1" : "0") + "\n";
  }
  if (cfg.Has("out")) {
    const fs::path dir = PrepareOutDir(cfg.Get("out"));
    WriteFile(dir / "predictions.csv", csv);
  } else {
    out << csv;
  }
  return kExitOk;
}

}  // namespace

RunConfig RunConfig::Parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(line_no) +
                       ": expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    if (key.empty()) {
      throw InputError("config line " + std::to_string(line_no) + ": empty key");
    }
    cfg.Set(key, Trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::Load(const std::string& path) {
  return Parse(ReadFile(path, "config file"));
}

std::string RunConfig::Get(const std::string& key,
                           const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string RunConfig::Render() const {
  std::string out;
  for (const auto& [key, value] : values_) out += key + " = " + value + "\n";
  return out;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Hate-speech detection toolkit for code-mixed short texts",
               "hsd"};
  app.require_subcommand(1);
  Flags flags;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config, "key = value settings file");
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--out", flags.out, "output directory");
  };
  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("--corpus", flags.corpus, "labeled JSONL corpus");
    cmd->add_option("--embeddings", flags.embeddings, "embedding text file");
    cmd->add_option("--arch", flags.arch, "cnn1d|lstm|bilstm (repeatable)")
        ->delimiter(',');
    cmd->add_option("--max-len", flags.max_len, "sequence length");
    cmd->add_flag("--freeze-embeddings", flags.freeze_embeddings,
                  "keep the embedding table fixed");
  };

  auto* stats = app.add_subcommand("stats", "corpus statistics");
  stats->add_option("--corpus", flags.corpus, "JSONL corpus");
  stats->add_option("--lexicon", flags.lexicon, "Hindi lexicon");
  add_config(stats);

  auto* train_emb =
      app.add_subcommand("train-embeddings", "train skip-gram embeddings");
  train_emb->add_option("--corpus", flags.corpus, "JSONL corpus");
  add_config(train_emb);

  auto* probe = app.add_subcommand("probe", "group similarity report");
  probe->add_option("--embeddings", flags.embeddings, "domain embeddings");
  probe->add_option("--embeddings-general", flags.embeddings_general,
                    "second embedding file for comparison");
  probe->add_option("--reference", flags.reference, "reference word");
  probe->add_option("--groups", flags.groups, "group word-list file");
  add_config(probe);

  auto* cv = app.add_subcommand("cross-validate", "k-fold evaluation");
  add_model(cv);
  cv->add_option("--k", flags.k, "number of folds (default 10)");
  cv->add_option("--jobs", flags.jobs, "folds trained in parallel");
  cv->add_flag("--pooled", flags.pooled,
               "aggregate pooled predictions instead of fold means");
  add_config(cv);

  auto* train = app.add_subcommand("train", "train one model checkpoint");
  add_model(train);
  add_config(train);

  auto* predict = app.add_subcommand("predict", "score a corpus");
  predict->add_option("--model", flags.model, "model checkpoint");
  predict->add_option("--corpus", flags.corpus, "JSONL corpus");
  predict->add_option("--out", flags.out, "output directory");

  std::vector<const char*> argv{"hsd"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    const RunConfig cfg = Resolve(flags);
    if (stats->parsed()) return CmdStats(cfg, out);
    if (train_emb->parsed()) return CmdTrainEmbeddings(cfg, out);
    if (probe->parsed()) return CmdProbe(cfg, out, err);
    if (cv->parsed()) return CmdCrossValidate(cfg, out);
    if (train->parsed()) return CmdTrain(cfg, out);
    if (predict->parsed()) return CmdPredict(cfg, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace hsd
