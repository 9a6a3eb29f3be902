#ifndef TICKX_CORPUS_H_
#define TICKX_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tickx/symbols.h"
#include "tickx/tsdb.h"
#include "tickx/types.h"

namespace tickx {

struct CorpusConfig {
  int num_documents = 1000;
  double distractor_rate = 0.5;
  double db_noise_rate = 0.05;
  double ambiguity_rate = 0.3;
  double value_jitter = 0.3;
  std::uint64_t seed = 42;

  // Throws ConfigError.
  void validate() const;
};

struct GroundTruthRelation {
  RelationKind kind = RelationKind::kTickAbs;
  std::string symbol;
  double value = 0.0;
  Span symbol_span;
  Span value_span;
};

struct SyntheticDocument {
  std::string doc_id;
  std::string text;
  std::int64_t timestamp = 0;
  std::vector<GroundTruthRelation> ground_truth;
};

// A store point whose reference value was perturbed away from the value the
// documents report.
struct PerturbedPoint {
  std::string symbol;
  std::int64_t timestamp = 0;
  double original = 0.0;
  double perturbed = 0.0;
};

// Bookkeeping emitted alongside the corpus so statistics can be computed
// exactly instead of re-derived from text.
struct CorpusLedger {
  std::vector<PerturbedPoint> perturbed;
  std::size_t total_points = 0;
  std::vector<std::string> ambiguous_docs;
  std::map<std::string, int> distractors;  // doc_id -> distractor tokens
};

struct Corpus {
  std::vector<SyntheticDocument> documents;
  TimeSeriesStore store;
  SymbolTable symbols;
  CorpusLedger ledger;
};

// Deterministic in config. Every document draws from its own sub-seed and
// every series from a per-symbol sub-seed, so growing num_documents leaves
// earlier documents and the store unchanged.
Corpus generate_corpus(const CorpusConfig &config);

// The fixed symbol universe the generator draws from.
SymbolTable default_symbol_table();

struct CorpusStats {
  std::size_t documents = 0;
  std::size_t tick_abs = 0;
  std::size_t tick_rel = 0;
  std::size_t ambiguous_documents = 0;
  std::size_t distractor_tokens = 0;
  double distractor_density = 0.0;  // distractor tokens per document
  std::size_t perturbed_points = 0;
  std::size_t total_points = 0;
  double noise_fraction = 0.0;
};

CorpusStats corpus_stats(const Corpus &corpus);

// Documents as JSON lines, the store as CSV, the symbol table as JSON and the
// ledger as JSON.
struct CorpusPaths {
  std::filesystem::path documents;
  std::filesystem::path store;
  std::filesystem::path symbols;
  std::filesystem::path constraints;
  std::filesystem::path ledger;
};

void save_corpus(const Corpus &corpus, const CorpusPaths &paths,
                 int max_pair_distance);
std::vector<SyntheticDocument> load_documents(
    const std::filesystem::path &path);
void save_documents(const std::vector<SyntheticDocument> &docs,
                    const std::filesystem::path &path);
std::string documents_to_jsonl(const std::vector<SyntheticDocument> &docs);

}  // namespace tickx

#endif  // TICKX_CORPUS_H_
