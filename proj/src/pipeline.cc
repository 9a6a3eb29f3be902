#include "tickx/pipeline.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>

#include "tickx/errors.h"

namespace tickx {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string &key, const std::string &v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

long long to_integer(const std::string &key, const std::string &v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

int to_int(const std::string &key, const std::string &v) {
  const long long x = to_integer(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError(key + ": out of range");
  }
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string &key, const std::string &v) {
  std::uint64_t out = 0;
  int base = 10;
  std::string_view digits = v;
  if (digits.starts_with("0x") || digits.starts_with("0X")) {
    base = 16;
    digits.remove_prefix(2);
  }
  const auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), out, base);
  if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
    throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

using Setter = std::function<void(PipelineConfig &, const std::string &,
                                  const std::string &, const std::filesystem::path &)>;

Setter path_field(std::filesystem::path PipelineConfig::*field) {
  return [field](PipelineConfig &c, const std::string &, const std::string &v,
                 const std::filesystem::path &base) {
    const std::filesystem::path p = v;
    c.*field = p.empty() || p.is_absolute() ? p : base / p;
  };
}

template <typename T>
Setter top(T PipelineConfig::*field) {
  return [field](PipelineConfig &c, const std::string &k, const std::string &v,
                 const std::filesystem::path &) {
    if constexpr (std::is_same_v<T, double>) {
      c.*field = to_double(k, v);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      c.*field = to_u64(k, v);
    } else if constexpr (std::is_same_v<T, bool>) {
      c.*field = to_bool(k, v);
    } else {
      c.*field = to_int(k, v);
    }
  };
}

template <typename T>
Setter corpus_field(T CorpusConfig::*field) {
  return [field](PipelineConfig &c, const std::string &k, const std::string &v,
                 const std::filesystem::path &) {
    if constexpr (std::is_same_v<T, double>) {
      c.corpus.*field = to_double(k, v);
    } else {
      c.corpus.*field = to_int(k, v);
    }
  };
}

template <typename T>
Setter train_field(T TrainConfig::*field) {
  return [field](PipelineConfig &c, const std::string &k, const std::string &v,
                 const std::filesystem::path &) {
    if constexpr (std::is_same_v<T, double>) {
      c.train.*field = to_double(k, v);
    } else {
      c.train.*field = to_int(k, v);
    }
  };
}

const std::map<std::string, Setter> &setters() {
  using C = PipelineConfig;
  static const std::map<std::string, Setter> table = {
      {"corpus_path", path_field(&C::corpus_path)},
      {"store_path", path_field(&C::store_path)},
      {"symbols_path", path_field(&C::symbols_path)},
      {"constraints_path", path_field(&C::constraints_path)},
      {"ledger_path", path_field(&C::ledger_path)},
      {"checkpoint_path", path_field(&C::checkpoint_path)},
      {"fusion_path", path_field(&C::fusion_path)},
      {"extractions_path", path_field(&C::extractions_path)},
      {"report_path", path_field(&C::report_path)},
      {"baseline_path", path_field(&C::baseline_path)},
      {"encoded_path", path_field(&C::encoded_path)},
      {"scored_path", path_field(&C::scored_path)},
      {"num_documents", corpus_field(&CorpusConfig::num_documents)},
      {"distractor_rate", corpus_field(&CorpusConfig::distractor_rate)},
      {"db_noise_rate", corpus_field(&CorpusConfig::db_noise_rate)},
      {"ambiguity_rate", corpus_field(&CorpusConfig::ambiguity_rate)},
      {"value_jitter", corpus_field(&CorpusConfig::value_jitter)},
      {"parser_window", top(&C::parser_window)},
      {"tau", top(&C::tau)},
      {"section_width", top(&C::section_width)},
      {"hidden_size", top(&C::hidden_size)},
      {"global_dim", top(&C::global_dim)},
      {"global_hidden", top(&C::global_hidden)},
      {"hash_seed", top(&C::hash_seed)},
      {"ngram_dim", top(&C::ngram_dim)},
      {"baseline_hidden", top(&C::baseline_hidden)},
      {"baseline_epochs", top(&C::baseline_epochs)},
      {"learning_rate", train_field(&TrainConfig::learning_rate)},
      {"batch_size", train_field(&TrainConfig::batch_size)},
      {"epochs", train_field(&TrainConfig::epochs)},
      {"adam_beta1", train_field(&TrainConfig::beta1)},
      {"adam_beta2", train_field(&TrainConfig::beta2)},
      {"adam_epsilon", train_field(&TrainConfig::adam_epsilon)},
      {"grad_clip", train_field(&TrainConfig::grad_clip)},
      {"validation_fraction", train_field(&TrainConfig::validation_fraction)},
      {"init_scale", train_field(&TrainConfig::init_scale)},
      {"theta", top(&C::theta)},
      {"split_network", top(&C::split_network)},
      {"split_fusion", top(&C::split_fusion)},
      {"split_test", top(&C::split_test)},
      {"fusion_learning_rate", top(&C::fusion_learning_rate)},
      {"fusion_epochs", top(&C::fusion_epochs)},
      {"fusion_labels",
       [](C &c, const std::string &k, const std::string &v, const std::filesystem::path &) {
         if (v == "ground_truth") {
           c.fusion_labels = FusionLabelSource::kGroundTruth;
         } else if (v == "consistency") {
           c.fusion_labels = FusionLabelSource::kConsistency;
         } else {
           throw ConfigError(k + ": expected ground_truth or consistency");
         }
       }},
      {"verbose", top(&C::verbose)},
  };
  return table;
}

bool power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }

// Distinct sub-seed streams.
constexpr std::uint64_t kSplitStream = 0x73706c6974;
constexpr std::uint64_t kNetworkInitStream = 0x6e6574;
constexpr std::uint64_t kBaselineInitStream = 0x62617365;
constexpr std::uint64_t kBaselineTrainStream = 0x62747261696e;

}  // namespace

void PipelineConfig::set_seed(std::uint64_t value) {
  seed = value;
  corpus.seed = value;
  train.seed = value;
}

void PipelineConfig::validate() const {
  corpus.validate();
  train.validate();
  if (parser_window < 0) throw ConfigError("parser_window must be >= 0");
  if (section_width < 1) throw ConfigError("section_width must be >= 1");
  if (hidden_size < 1 || global_hidden < 1 || baseline_hidden < 1) {
    throw ConfigError("layer sizes must be >= 1");
  }
  if (!power_of_two(global_dim)) throw ConfigError("global_dim must be a power of two");
  if (!power_of_two(ngram_dim)) throw ConfigError("ngram_dim must be a power of two");
  if (baseline_epochs < 0 || fusion_epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must be in (0, 1)");
  if (!(split_network > 0.0 && split_fusion > 0.0 && split_test > 0.0)) {
    throw ConfigError("split fractions must be positive");
  }
  if (std::abs(split_network + split_fusion + split_test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
  if (!(fusion_learning_rate > 0.0)) throw ConfigError("fusion_learning_rate must be > 0");
}

Json PipelineConfig::to_json() const {
  return {{"corpus_path", corpus_path.string()},
          {"store_path", store_path.string()},
          {"symbols_path", symbols_path.string()},
          {"constraints_path", constraints_path.string()},
          {"ledger_path", ledger_path.string()},
          {"checkpoint_path", checkpoint_path.string()},
          {"fusion_path", fusion_path.string()},
          {"extractions_path", extractions_path.string()},
          {"report_path", report_path.string()},
          {"baseline_path", baseline_path.string()},
          {"encoded_path", encoded_path.string()},
          {"scored_path", scored_path.string()},
          {"num_documents", corpus.num_documents},
          {"distractor_rate", corpus.distractor_rate},
          {"db_noise_rate", corpus.db_noise_rate},
          {"ambiguity_rate", corpus.ambiguity_rate},
          {"value_jitter", corpus.value_jitter},
          {"parser_window", parser_window},
          {"tau", tau},
          {"section_width", section_width},
          {"hidden_size", hidden_size},
          {"global_dim", global_dim},
          {"global_hidden", global_hidden},
          {"hash_seed", hash_seed},
          {"ngram_dim", ngram_dim},
          {"baseline_hidden", baseline_hidden},
          {"baseline_epochs", baseline_epochs},
          {"learning_rate", train.learning_rate},
          {"batch_size", train.batch_size},
          {"epochs", train.epochs},
          {"adam_beta1", train.beta1},
          {"adam_beta2", train.beta2},
          {"adam_epsilon", train.adam_epsilon},
          {"grad_clip", train.grad_clip},
          {"validation_fraction", train.validation_fraction},
          {"init_scale", train.init_scale},
          {"theta", theta},
          {"split_network", split_network},
          {"split_fusion", split_fusion},
          {"split_test", split_test},
          {"fusion_learning_rate", fusion_learning_rate},
          {"fusion_epochs", fusion_epochs},
          {"fusion_labels",
           fusion_labels == FusionLabelSource::kGroundTruth ? "ground_truth" : "consistency"},
          {"seed", seed},
          {"verbose", verbose}};
}

PipelineConfig parse_pipeline_config(const std::string &text,
                                     const std::filesystem::path &base_dir) {
  PipelineConfig config;
  // Paths default to the config's directory too.
  for (auto field : {&PipelineConfig::corpus_path, &PipelineConfig::store_path,
                     &PipelineConfig::symbols_path, &PipelineConfig::constraints_path,
                     &PipelineConfig::ledger_path, &PipelineConfig::checkpoint_path,
                     &PipelineConfig::fusion_path, &PipelineConfig::extractions_path,
                     &PipelineConfig::report_path}) {
    config.*field = base_dir / (config.*field);
  }
  std::optional<std::uint64_t> seed;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "seed") {
      seed = to_u64(key, value);
      continue;
    }
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    it->second(config, key, value, base_dir);
  }
  if (seed) config.set_seed(*seed);
  config.validate();
  return config;
}

PipelineConfig load_pipeline_config(const std::filesystem::path &path) {
  return parse_pipeline_config(read_file(path), path.parent_path());
}

DocumentSplit split_documents(std::size_t num_documents, const PipelineConfig &config) {
  std::vector<std::size_t> order(num_documents);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(mix_seed(config.seed, kSplitStream));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n = static_cast<double>(num_documents);
  const auto n_net = static_cast<std::size_t>(std::llround(n * config.split_network));
  const auto n_fus = std::min(num_documents - std::min(n_net, num_documents),
                              static_cast<std::size_t>(std::llround(n * config.split_fusion)));
  DocumentSplit split;
  split.network.assign(order.begin(), order.begin() + std::min(n_net, num_documents));
  split.fusion.assign(order.begin() + split.network.size(),
                      order.begin() + split.network.size() + n_fus);
  split.test.assign(order.begin() + split.network.size() + n_fus, order.end());
  for (auto *part : {&split.network, &split.fusion, &split.test}) {
    std::sort(part->begin(), part->end());
  }
  return split;
}

Document to_document(const SyntheticDocument &doc) {
  return {doc.doc_id, doc.text, doc.timestamp};
}

PipelineResources load_resources(const PipelineConfig &config) {
  PipelineResources r;
  r.symbols = load_symbol_table(config.symbols_path);
  r.constraints = load_constraints(config.constraints_path, config.parser_window);
  r.store = load_store_csv(config.store_path);
  return r;
}

ParsedDocument parse_document(const Document &document, const PipelineResources &resources,
                              const PipelineConfig &config) {
  ParsedDocument p;
  p.document = document;
  p.entities = annotate_entities(document, resources.symbols);
  p.candidates =
      generate_candidates(document, p.entities, resources.constraints, config.section_width);
  for (const auto &c : p.candidates) {
    p.scores.push_back(try_consistency_score(c, document.timestamp, resources.store));
  }
  p.global = encode_global(document.text, config.global_dim, config.hash_seed);
  return p;
}

std::string candidate_id(const ExtractionCandidate &candidate, std::size_t index) {
  return candidate.doc_id + "#" + std::to_string(index);
}

namespace {

NetworkScore score_candidate(const NetworkParams<double> &network, const ParsedDocument &parsed,
                             const ExtractionCandidate &c, const PipelineConfig &config) {
  const auto enc = encode_candidate(parsed.document, parsed.entities, c, parsed.global,
                                    config.hash_seed, "");
  return network_forward(network, enc.sequence.sparse_features(), enc.global);
}

Eigen::VectorXd baseline_input(const ParsedDocument &parsed, const ExtractionCandidate &c,
                               const PipelineConfig &config) {
  const Eigen::VectorXd ngrams =
      encode_entity_ngrams(parsed.entities, c, config.ngram_dim, config.hash_seed);
  Eigen::VectorXd x(parsed.global.size() + ngrams.size());
  x << candidate_global(parsed.global, c, config.hash_seed), ngrams;
  return x;
}

bool matches_any(const ExtractionCandidate &c, const std::vector<GroundTruthRelation> &truth) {
  return std::any_of(truth.begin(), truth.end(),
                     [&](const auto &t) { return matches_truth(c, t); });
}

void log(const PipelineConfig &config, const std::string &msg) {
  if (config.verbose) std::cerr << msg << "\n";
}

Json history_to_json(const TrainHistory &h) {
  return {{"train_loss", h.train_loss}, {"validation_loss", h.validation_loss}};
}

// `<checkpoint>.json`: the configuration and loss history that produced it.
void write_manifest(const std::filesystem::path &checkpoint, const PipelineConfig &config,
                    const TrainHistory &history) {
  const Json j = {{"config", config.to_json()}, {"history", history_to_json(history)}};
  write_file(checkpoint.string() + ".json", j.dump(2) + "\n");
}

std::vector<ParsedDocument> parse_all(const std::vector<SyntheticDocument> &docs,
                                      std::span<const std::size_t> indices,
                                      const PipelineResources &resources,
                                      const PipelineConfig &config) {
  std::vector<ParsedDocument> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    out.push_back(parse_document(to_document(docs[i]), resources, config));
  }
  return out;
}

}  // namespace

std::vector<ScoredCandidate> run_pipeline(const ParsedDocument &parsed,
                                          const TrainedModels &models,
                                          const PipelineConfig &config) {
  FusionParams fusion = models.fusion;
  fusion.threshold = config.theta;
  std::vector<ScoredCandidate> out;
  for (std::size_t k = 0; k < parsed.candidates.size(); ++k) {
    ScoredCandidate sc;
    sc.candidate = parsed.candidates[k];
    sc.score = parsed.scores[k];
    sc.net = score_candidate(models.network, parsed, sc.candidate, config);
    sc.fusion = classify(fusion, fuse_features(sc.candidate, sc.score, sc.net,
                                               fusion.standardizer, fusion.max_pair_distance));
    out.push_back(std::move(sc));
  }
  return out;
}

Json scored_candidate_to_json(const ScoredCandidate &scored) {
  Json j = candidate_to_json(scored.candidate);
  j["s"] = scored.score ? Json(scored.score->s) : Json(nullptr);
  j["y_tilde"] = scored.net.y_tilde;
  j["s_tilde"] = scored.net.s_tilde;
  j["p"] = scored.fusion.probability;
  j["decision"] = scored.fusion.decision == Decision::kAccept ? "ACCEPT" : "REJECT";
  return j;
}

Json TrainReport::to_json() const {
  Json j = {{"network_history", history_to_json(network_history)},
            {"network_documents", network_documents},
            {"network_candidates", network_candidates},
            {"excluded_candidates", excluded_candidates},
            {"positive_labels", positive_labels},
            {"fusion_rows", fusion_rows},
            {"fusion_loss", fusion_loss}};
  if (baseline_history) j["baseline_history"] = history_to_json(*baseline_history);
  return j;
}

Json SystemMetrics::to_json() const {
  return {{"candidates", candidates},
          {"accepted", accepted},
          {"true_positives", true_positives},
          {"false_positives", false_positives},
          {"false_negatives", false_negatives},
          {"precision", precision},
          {"recall", recall}};
}

Json EvalReport::to_json() const {
  Json j = {{"test_documents", test_documents},
            {"ground_truth", ground_truth},
            {"baseline", baseline.to_json()},
            {"full", full.to_json()},
            {"fp_reduction", fp_reduction},
            {"recall_drop", recall_drop}};
  j["network_auc"] = network_auc ? Json(*network_auc) : Json(nullptr);
  j["ngram_baseline_auc"] = ngram_baseline_auc ? Json(*ngram_baseline_auc) : Json(nullptr);
  return j;
}

bool matches_truth(const ExtractionCandidate &candidate, const GroundTruthRelation &truth) {
  return candidate.kind == truth.kind && candidate.symbol == truth.symbol &&
         std::abs(candidate.value - truth.value) <=
             1e-9 * std::max(1.0, std::abs(truth.value)) &&
         candidate.value_span.overlaps(truth.value_span);
}

std::size_t count_matches(std::span<const ExtractionCandidate> accepted,
                          std::span<const GroundTruthRelation> truth) {
  std::vector<bool> used(truth.size(), false);
  std::size_t matched = 0;
  for (const auto &c : accepted) {
    for (std::size_t k = 0; k < truth.size(); ++k) {
      if (!used[k] && matches_truth(c, truth[k])) {
        used[k] = true;
        ++matched;
        break;
      }
    }
  }
  return matched;
}

SystemMetrics compute_metrics(std::size_t candidates, std::size_t accepted,
                              std::size_t true_positives, std::size_t ground_truth) {
  SystemMetrics m;
  m.candidates = candidates;
  m.accepted = accepted;
  m.true_positives = true_positives;
  m.false_positives = accepted - true_positives;
  m.false_negatives = ground_truth - true_positives;
  m.precision = accepted ? static_cast<double>(true_positives) / static_cast<double>(accepted) : 1.0;
  m.recall = ground_truth
                 ? static_cast<double>(true_positives) / static_cast<double>(ground_truth)
                 : 0.0;
  return m;
}

std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionMismatch("roc_auc: scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney U with midranks for ties.
  double rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        rank_sum += midrank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  const double p = static_cast<double>(positives);
  return (rank_sum - p * (p + 1) / 2) / (p * static_cast<double>(negatives));
}

CorpusStats cmd_generate(const PipelineConfig &config) {
  config.validate();
  const Corpus corpus = generate_corpus(config.corpus);
  save_corpus(corpus,
              {config.corpus_path, config.store_path, config.symbols_path,
               config.constraints_path, config.ledger_path},
              config.parser_window);
  return corpus_stats(corpus);
}

TrainReport cmd_train(const PipelineConfig &config) {
  config.validate();
  const auto docs = load_documents(config.corpus_path);
  const auto resources = load_resources(config);
  const auto split = split_documents(docs.size(), config);
  TrainReport report;

  // Stage 3: network on consistency labels from the network split.
  const auto net_docs = parse_all(docs, split.network, resources, config);
  std::vector<EncodedCandidate> examples;
  std::vector<VectorExample> baseline_examples;
  const bool with_baseline = !config.baseline_path.empty();
  for (const auto &parsed : net_docs) {
    for (std::size_t k = 0; k < parsed.candidates.size(); ++k) {
      const auto &c = parsed.candidates[k];
      if (!parsed.scores[k]) {
        ++report.excluded_candidates;
        continue;
      }
      const int y = label_from_score(*parsed.scores[k], config.tau);
      report.positive_labels += static_cast<std::size_t>(y);
      examples.push_back(encode_candidate(parsed.document, parsed.entities, c, parsed.global,
                                          config.hash_seed, candidate_id(c, k), y));
      if (with_baseline) baseline_examples.push_back({baseline_input(parsed, c, config), y});
    }
  }
  report.network_documents = net_docs.size();
  report.network_candidates = examples.size();
  if (examples.empty()) throw EmptyDataset("no labelled candidates in the network split");
  if (!config.encoded_path.empty()) {
    write_encoded(examples, {config.section_width, config.global_dim, config.hash_seed},
                  config.encoded_path);
  }
  log(config, "network: " + std::to_string(examples.size()) + " candidates, " +
                  std::to_string(report.positive_labels) + " positive");

  auto network = NetworkParams<double>::zeros(kCharFeatureDim, config.hidden_size,
                                              config.global_dim, config.global_hidden);
  initialize(network, config.train.init_scale, mix_seed(config.seed, kNetworkInitStream));
  TrainConfig tc = config.train;
  if (config.verbose && !tc.on_epoch) {
    tc.on_epoch = [](int epoch, double trn, double val) {
      std::cerr << "  epoch " << epoch << " train " << trn << " val " << val << "\n";
    };
  }
  report.network_history =
      train<CharLstmModel, EncodedCandidate>(network, std::span<const EncodedCandidate>(examples), tc);
  save_checkpoint(network, config.checkpoint_path);
  write_manifest(config.checkpoint_path, config, report.network_history);
  examples.clear();
  examples.shrink_to_fit();

  if (with_baseline) {
    auto baseline = NgramParams<double>::zeros(config.global_dim + config.ngram_dim,
                                               config.baseline_hidden);
    initialize(baseline, config.train.init_scale, mix_seed(config.seed, kBaselineInitStream));
    TrainConfig bc = tc;
    bc.epochs = config.baseline_epochs;
    bc.seed = mix_seed(config.seed, kBaselineTrainStream);
    log(config, "n-gram baseline");
    report.baseline_history = train<NgramModel, VectorExample>(
        baseline, std::span<const VectorExample>(baseline_examples), bc);
    save_checkpoint(baseline, config.baseline_path);
    write_manifest(config.baseline_path, config, *report.baseline_history);
  }

  // Stage 4: fusion on the held-out fusion split.
  const auto fus_docs = parse_all(docs, split.fusion, resources, config);
  std::vector<std::optional<double>> raw_scores;
  for (const auto &parsed : fus_docs) {
    for (const auto &s : parsed.scores) {
      raw_scores.push_back(s ? std::optional<double>(s->s) : std::nullopt);
    }
  }
  FusionParams fusion;
  fusion.standardizer = fit_standardizer(raw_scores);
  fusion.threshold = config.theta;
  fusion.max_pair_distance = config.parser_window;
  std::vector<FusionRow> rows;
  for (std::size_t d = 0; d < fus_docs.size(); ++d) {
    const auto &parsed = fus_docs[d];
    const auto &truth = docs[split.fusion[d]].ground_truth;
    for (std::size_t k = 0; k < parsed.candidates.size(); ++k) {
      const auto &c = parsed.candidates[k];
      const auto net = score_candidate(network, parsed, c, config);
      int label = 0;
      if (config.fusion_labels == FusionLabelSource::kGroundTruth) {
        label = matches_any(c, truth) ? 1 : 0;
      } else {
        label = parsed.scores[k] ? label_from_score(*parsed.scores[k], config.tau) : 0;
      }
      rows.push_back({fuse_features(c, parsed.scores[k], net, fusion.standardizer,
                                    fusion.max_pair_distance),
                      label});
    }
  }
  report.fusion_rows = rows.size();
  const auto fit = train_fusion(rows, config.fusion_learning_rate, config.fusion_epochs, fusion);
  report.fusion_loss = fit.final_loss;
  save_fusion_params(fit.params, config.fusion_path);
  log(config, "fusion: " + std::to_string(rows.size()) + " rows, loss " +
                  std::to_string(fit.final_loss));
  return report;
}

std::size_t cmd_extract(const PipelineConfig &config, const std::filesystem::path &input,
                        const std::filesystem::path &output) {
  config.validate();
  const auto resources = load_resources(config);
  const TrainedModels models{load_checkpoint(config.checkpoint_path),
                             load_fusion_params(config.fusion_path)};
  std::string out;
  std::size_t accepted = 0;
  for (const auto &doc : load_documents(input)) {
    const auto parsed = parse_document(to_document(doc), resources, config);
    for (const auto &sc : run_pipeline(parsed, models, config)) {
      if (sc.fusion.decision != Decision::kAccept) continue;
      out += scored_candidate_to_json(sc).dump();
      out += '\n';
      ++accepted;
    }
  }
  write_file(output, out);
  return accepted;
}

EvalReport cmd_evaluate(const PipelineConfig &config) {
  config.validate();
  const auto docs = load_documents(config.corpus_path);
  const auto resources = load_resources(config);
  const auto split = split_documents(docs.size(), config);
  const TrainedModels models{load_checkpoint(config.checkpoint_path),
                             load_fusion_params(config.fusion_path)};
  std::optional<NgramParams<double>> baseline;
  if (!config.baseline_path.empty()) baseline = load_baseline_checkpoint(config.baseline_path);

  EvalReport report;
  report.test_documents = split.test.size();
  std::size_t candidates = 0, base_accepted = 0, base_tp = 0, full_accepted = 0, full_tp = 0;
  std::vector<double> net_scores, ngram_scores;
  std::vector<int> labels;
  std::string scored_out;
  for (std::size_t i : split.test) {
    const auto &doc = docs[i];
    const auto parsed = parse_document(to_document(doc), resources, config);
    const auto scored = run_pipeline(parsed, models, config);
    std::vector<ExtractionCandidate> base, full;
    for (std::size_t k = 0; k < scored.size(); ++k) {
      const auto &sc = scored[k];
      if (sc.score && label_from_score(*sc.score, config.tau) == 1) base.push_back(sc.candidate);
      if (sc.fusion.decision == Decision::kAccept) full.push_back(sc.candidate);
      std::optional<double> ngram;
      if (baseline) {
        ngram = ngram_trace(*baseline, baseline_input(parsed, sc.candidate, config)).y_tilde;
      }
      if (sc.score) {
        labels.push_back(label_from_score(*sc.score, config.tau));
        net_scores.push_back(sc.net.y_tilde);
        if (ngram) ngram_scores.push_back(*ngram);
      }
      if (!config.scored_path.empty()) {
        Json j = scored_candidate_to_json(sc);
        if (ngram) j["y_ngram"] = *ngram;
        j["truth"] = matches_any(sc.candidate, doc.ground_truth);
        scored_out += j.dump();
        scored_out += '\n';
      }
    }
    candidates += scored.size();
    report.ground_truth += doc.ground_truth.size();
    base_accepted += base.size();
    full_accepted += full.size();
    base_tp += count_matches(base, doc.ground_truth);
    full_tp += count_matches(full, doc.ground_truth);
  }
  report.baseline = compute_metrics(candidates, base_accepted, base_tp, report.ground_truth);
  report.full = compute_metrics(candidates, full_accepted, full_tp, report.ground_truth);
  report.fp_reduction =
      report.baseline.false_positives
          ? 1.0 - static_cast<double>(report.full.false_positives) /
                      static_cast<double>(report.baseline.false_positives)
          : 0.0;
  report.recall_drop = report.baseline.recall - report.full.recall;
  report.network_auc = roc_auc(net_scores, labels);
  if (baseline) report.ngram_baseline_auc = roc_auc(ngram_scores, labels);

  write_file(config.report_path, report.to_json().dump(2) + "\n");
  if (!config.scored_path.empty()) write_file(config.scored_path, scored_out);
  return report;
}

}  // namespace tickx
