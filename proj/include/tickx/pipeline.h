#ifndef TICKX_PIPELINE_H_
#define TICKX_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tickx/corpus.h"
#include "tickx/encoder.h"
#include "tickx/fusion.h"
#include "tickx/io.h"
#include "tickx/network.h"
#include "tickx/parser.h"
#include "tickx/trainer.h"
#include "tickx/tsdb.h"

namespace tickx {

enum class FusionLabelSource { kGroundTruth, kConsistency };

// Flat configuration shared by all subcommands. Relative paths are resolved
// against the directory of the config file they were read from.
struct PipelineConfig {
  std::filesystem::path corpus_path = "corpus.jsonl";
  std::filesystem::path store_path = "store.csv";
  std::filesystem::path symbols_path = "symbols.json";
  std::filesystem::path constraints_path = "constraints.json";
  std::filesystem::path ledger_path = "ledger.json";
  std::filesystem::path checkpoint_path = "model.bin";
  std::filesystem::path fusion_path = "fusion.json";
  std::filesystem::path extractions_path = "extractions.jsonl";
  std::filesystem::path report_path = "report.json";
  std::filesystem::path baseline_path;  // empty: no n-gram baseline
  std::filesystem::path encoded_path;   // empty: do not dump encodings
  std::filesystem::path scored_path;    // empty: do not dump scored candidates

  CorpusConfig corpus;
  int parser_window = kDefaultMaxPairDistance;
  double tau = kDefaultTau;
  int section_width = kDefaultSectionWidth;
  int hidden_size = 64;
  int global_dim = kDefaultGlobalDim;
  int global_hidden = 32;
  std::uint64_t hash_seed = kDefaultHashSeed;
  int ngram_dim = kDefaultNgramDim;
  int baseline_hidden = 64;
  int baseline_epochs = 10;
  TrainConfig train;
  double theta = 0.5;
  double split_network = 0.6;
  double split_fusion = 0.2;
  double split_test = 0.2;
  double fusion_learning_rate = 0.5;
  int fusion_epochs = 2000;
  FusionLabelSource fusion_labels = FusionLabelSource::kGroundTruth;
  std::uint64_t seed = 42;
  bool verbose = false;

  // Propagates `seed` into the corpus and training configs.
  void set_seed(std::uint64_t value);
  // Throws ConfigError.
  void validate() const;
  Json to_json() const;
};

// `key = value` lines; '#' starts a comment. Unknown keys are errors.
PipelineConfig load_pipeline_config(const std::filesystem::path &path);
PipelineConfig parse_pipeline_config(const std::string &text,
                                     const std::filesystem::path &base_dir);

struct DocumentSplit {
  std::vector<std::size_t> network;
  std::vector<std::size_t> fusion;
  std::vector<std::size_t> test;
};

// Document-level split by a seeded shuffle; every index lands in exactly one
// part.
DocumentSplit split_documents(std::size_t num_documents,
                              const PipelineConfig &config);

Document to_document(const SyntheticDocument &doc);

// Stages 1 and 2 for one document, plus the inputs stage 3 needs.
struct ParsedDocument {
  Document document;
  std::vector<EntitySpan> entities;
  std::vector<ExtractionCandidate> candidates;
  std::vector<std::optional<ConsistencyScore>> scores;
  Eigen::VectorXd global;
};

struct PipelineResources {
  SymbolTable symbols;
  ConstraintSet constraints;
  TimeSeriesStore store;
};

PipelineResources load_resources(const PipelineConfig &config);

ParsedDocument parse_document(const Document &document,
                              const PipelineResources &resources,
                              const PipelineConfig &config);

std::string candidate_id(const ExtractionCandidate &candidate,
                         std::size_t index);

// One candidate after all four stages.
struct ScoredCandidate {
  ExtractionCandidate candidate;
  std::optional<ConsistencyScore> score;
  NetworkScore net;
  FusionDecision fusion;
};

struct TrainedModels {
  NetworkParams<double> network;
  FusionParams fusion;
};

std::vector<ScoredCandidate> run_pipeline(const ParsedDocument &parsed,
                                          const TrainedModels &models,
                                          const PipelineConfig &config);

Json scored_candidate_to_json(const ScoredCandidate &scored);

struct TrainReport {
  TrainHistory network_history;
  std::optional<TrainHistory> baseline_history;
  std::size_t network_documents = 0;
  std::size_t network_candidates = 0;
  std::size_t excluded_candidates = 0;  // lookup failures, not trainable
  std::size_t positive_labels = 0;
  std::size_t fusion_rows = 0;
  double fusion_loss = 0.0;

  Json to_json() const;
};

struct SystemMetrics {
  std::size_t candidates = 0;
  std::size_t accepted = 0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 1.0;
  double recall = 0.0;

  Json to_json() const;
};

// Baseline: parser + consistency threshold (s >= tau, missing s rejected).
// Full: the four-stage pipeline.
struct EvalReport {
  std::size_t test_documents = 0;
  std::size_t ground_truth = 0;
  SystemMetrics baseline;
  SystemMetrics full;
  double fp_reduction = 0.0;  // 1 - FP_full / FP_baseline
  double recall_drop = 0.0;   // recall_baseline - recall_full
  std::optional<double> network_auc;
  std::optional<double> ngram_baseline_auc;

  Json to_json() const;
};

// Greedy one-to-one matching of accepted candidates to ground truth on
// (kind, symbol), value within relative tolerance 1e-9, and overlapping
// value spans. Returns the number of matched pairs.
std::size_t count_matches(std::span<const ExtractionCandidate> accepted,
                          std::span<const GroundTruthRelation> truth);
bool matches_truth(const ExtractionCandidate &candidate,
                   const GroundTruthRelation &truth);

SystemMetrics compute_metrics(std::size_t candidates, std::size_t accepted,
                              std::size_t true_positives,
                              std::size_t ground_truth);

// Area under the ROC curve with ties counted as one half. nullopt when either
// class is empty.
std::optional<double> roc_auc(std::span<const double> scores,
                              std::span<const int> labels);

CorpusStats cmd_generate(const PipelineConfig &config);
TrainReport cmd_train(const PipelineConfig &config);
// Returns the number of accepted extractions written.
std::size_t cmd_extract(const PipelineConfig &config,
                        const std::filesystem::path &input,
                        const std::filesystem::path &output);
EvalReport cmd_evaluate(const PipelineConfig &config);

}  // namespace tickx

#endif  // TICKX_PIPELINE_H_
