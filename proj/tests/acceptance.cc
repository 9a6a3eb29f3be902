// Acceptance run: one PASS/FAIL line per criterion. With arguments, only the
// listed criteria run (e.g. `tickx_acceptance 1 3 8`).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "tickx/corpus.h"
#include "tickx/encoder.h"
#include "tickx/io.h"
#include "tickx/network.h"
#include "tickx/pipeline.h"
#include "tickx/trainer.h"
#include "tickx/tsdb.h"

#ifndef TICKX_CONFIG_DIR
#define TICKX_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;
using namespace tickx;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

fs::path scratch(const std::string &name) {
  const auto dir = fs::temp_directory_path() / ("tickx_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A config file from configs/ with every artifact redirected into `dir`.
PipelineConfig config_in(const std::string &file, const fs::path &dir) {
  auto c = parse_pipeline_config(read_file(fs::path(TICKX_CONFIG_DIR) / file), dir);
  c.corpus_path = dir / "corpus.jsonl";
  c.store_path = dir / "store.csv";
  c.symbols_path = dir / "symbols.json";
  c.constraints_path = dir / "constraints.json";
  c.ledger_path = dir / "ledger.json";
  c.checkpoint_path = dir / "model.bin";
  c.fusion_path = dir / "fusion.json";
  c.baseline_path = dir / "baseline.bin";
  c.extractions_path = dir / "extractions.jsonl";
  c.report_path = dir / "report.json";
  c.scored_path.clear();
  c.encoded_path.clear();
  c.verbose = false;
  return c;
}

// 1. analytic vs central-difference gradient over every parameter
Outcome gradient_check() {
  const int d = 16, h = 8, g = 32, k = 8, t = 20, batch = 4;
  auto params = NetworkParams<double>::zeros(d, h, g, k);
  initialize(params, 0.5, 1);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  zip_tensors([&](auto &x) { x = x.unaryExpr([&](double v) { return v + 0.3 * u(rng); }); },
              params);
  std::vector<SequenceExample> data;
  for (int n = 0; n < batch; ++n) {
    SequenceExample e;
    e.features = Eigen::MatrixXd::NullaryExpr(d, t, [&] { return u(rng); });
    e.global = Eigen::VectorXd::NullaryExpr(g, [&] { return u(rng) > 0 ? 1.0 : 0.0; });
    e.label = n % 2;
    data.push_back(std::move(e));
  }
  auto loss = [&](const NetworkParams<double> &p) {
    double total = 0.0;
    for (const auto &e : data) total += bce_loss(network_trace(p, e.features, e.global).y_tilde, *e.label);
    return total / batch;
  };
  const auto grad =
      batch_gradient<CharLstmModel, SequenceExample>(params, std::span<const SequenceExample>(data));
  const double step = 1e-5;
  double worst = 0.0;
  std::size_t count = 0;
  auto probe = params;
  zip_tensors(
      [&](auto &p, const auto &an) {
        for (Eigen::Index i = 0; i < p.size(); ++i) {
          const double saved = p.data()[i];
          p.data()[i] = saved + step;
          const double up = loss(probe);
          p.data()[i] = saved - step;
          const double down = loss(probe);
          p.data()[i] = saved;
          const double num = (up - down) / (2 * step);
          const double a = an.data()[i];
          worst = std::max(worst, std::abs(a - num) / std::max({std::abs(a), std::abs(num), 1e-8}));
          ++count;
        }
      },
      probe, grad);
  return {worst < 1e-4, fmt("%zu parameters, max relative error %.3g", count, worst)};
}

// 2. separable set: label = candidate-value role flag at the first position
Outcome trainability() {
  std::mt19937_64 rng(5);
  std::vector<SequenceExample> data;
  for (int n = 0; n < 200; ++n) {
    const int t = 8 + static_cast<int>(rng() % 8);
    SequenceExample e;
    e.features = Eigen::MatrixXd::Zero(kCharFeatureDim, t);
    for (int i = 0; i < t; ++i) e.features(rng() % CharVocabulary::kOneHotDim, i) = 1.0;
    const int sym = 1 + static_cast<int>(rng() % (t - 1));
    e.features(kRoleBlockOffset, sym) = 1.0;
    const bool positive = n % 2 == 0;
    e.features(kRoleBlockOffset + 1, positive ? 0 : sym) = 1.0;
    e.global = Eigen::VectorXd::Zero(8);
    e.global(rng() % 8) = 1.0;
    e.label = positive ? 1 : 0;
    data.push_back(std::move(e));
  }
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 16;
  cfg.validation_fraction = 0.0;
  cfg.seed = 7;

  auto params = NetworkParams<double>::zeros(kCharFeatureDim, 8, 8, 4);
  initialize(params, 0.3, 7);
  const auto history = train<CharLstmModel, SequenceExample>(params, data, cfg);
  const double best = *std::min_element(history.train_loss.begin(), history.train_loss.end());
  int first = -1;
  for (std::size_t e = 0; e < history.train_loss.size(); ++e) {
    if (history.train_loss[e] < 0.1) {
      first = static_cast<int>(e);
      break;
    }
  }

  auto frozen = NetworkParams<double>::zeros(kCharFeatureDim, 8, 8, 4);
  initialize(frozen, 0.3, 7);
  const auto before = frozen;
  cfg.learning_rate = 0.0;
  cfg.epochs = 3;
  train<CharLstmModel, SequenceExample>(frozen, data, cfg);
  bool unchanged = true;
  zip_tensors([&](const auto &a, const auto &b) { unchanged &= (a.array() == b.array()).all(); },
              frozen, before);
  return {first >= 0 && unchanged,
          fmt("loss %.4f -> min %.4f (below 0.1 after epoch %d), lr=0 unchanged: %s",
              history.train_loss.front(), best, first, unchanged ? "yes" : "no")};
}

// 3. every ground-truth relation appears among the candidates
Outcome parser_recall() {
  CorpusConfig cc;
  cc.num_documents = 1000;
  cc.db_noise_rate = 0.0;
  cc.seed = 42;
  const auto corpus = generate_corpus(cc);
  const auto cs = ConstraintSet::from_symbols(corpus.symbols, kDefaultMaxPairDistance);
  std::size_t total = 0, found = 0, candidates = 0;
  for (const auto &sd : corpus.documents) {
    const Document d{sd.doc_id, sd.text, sd.timestamp};
    const auto cands = generate_candidates(d, annotate_entities(d, corpus.symbols), cs,
                                           kDefaultSectionWidth);
    candidates += cands.size();
    for (const auto &t : sd.ground_truth) {
      ++total;
      for (const auto &c : cands) {
        if (matches_truth(c, t)) {
          ++found;
          break;
        }
      }
    }
  }
  const double recall = total ? static_cast<double>(found) / total : 0.0;
  return {recall >= 0.99,
          fmt("%zu/%zu relations recovered (%.4f) from %zu candidates", found, total, recall,
              candidates)};
}

Outcome run_experiment(const std::string &name, const std::function<Outcome(const EvalReport &)> &judge) {
  const auto dir = scratch(name);
  const auto c = config_in(name + ".conf", dir);
  cmd_generate(c);
  cmd_train(c);
  const auto report = cmd_evaluate(c);
  fs::remove_all(dir);
  return judge(report);
}

// 4. full pipeline vs consistency-threshold baseline
Outcome precision_boost() {
  return run_experiment("default", [](const EvalReport &r) {
    const bool pass = r.fp_reduction >= 0.70 && r.recall_drop <= 0.05;
    return Outcome{pass, fmt("FP %zu -> %zu, reduction %.3f; recall %.4f -> %.4f, drop %.4f",
                             r.baseline.false_positives, r.full.false_positives, r.fp_reduction,
                             r.baseline.recall, r.full.recall, r.recall_drop)};
  });
}

// 5. LSTM vs n-gram FC on the high-ambiguity variant
Outcome lstm_vs_ngram() {
  return run_experiment("ambiguous", [](const EvalReport &r) {
    if (!r.network_auc || !r.ngram_baseline_auc) return Outcome{false, "AUC undefined"};
    const double gap = *r.network_auc - *r.ngram_baseline_auc;
    return Outcome{gap >= 0.02, fmt("LSTM AUC %.4f, n-gram AUC %.4f, gap %+.4f", *r.network_auc,
                                    *r.ngram_baseline_auc, gap)};
  });
}

// 6. encoder properties over every candidate of a generated corpus
Outcome encoder_properties() {
  CorpusConfig cc;
  cc.num_documents = 1000;
  cc.ambiguity_rate = 0.5;
  cc.distractor_rate = 1.0;
  cc.seed = 6;
  const auto corpus = generate_corpus(cc);
  const auto cs = ConstraintSet::from_symbols(corpus.symbols, kDefaultMaxPairDistance);
  const auto &vocab = default_vocabulary();
  std::size_t checked = 0, shared_sections = 0;
  std::vector<std::string> failures;
  auto fail = [&](const std::string &what) {
    if (failures.size() < 5) failures.push_back(what);
  };

  // OOV handling: exactly the 94 vocabulary bytes map into the table
  int in_vocab = 0;
  for (int b = 0; b < 256; ++b) {
    const int idx = vocab.index(static_cast<char>(b));
    if (idx != CharVocabulary::kOovIndex) {
      ++in_vocab;
      if (vocab.character(idx) != static_cast<char>(b)) fail(fmt("byte %d does not round trip", b));
    }
  }
  if (in_vocab != CharVocabulary::kSize) fail(fmt("%d in-vocabulary bytes", in_vocab));
  {
    const auto &info = corpus.symbols.entries().front();
    const std::string alias = info.aliases.front();
    const std::string value = fmt("%g", std::round((info.min_value + info.max_value) / 2));
    const Document d{"oov", alias + " \xe2\x82\xac " + value, 0};
    const auto ents = annotate_entities(d, corpus.symbols);
    const auto cands = generate_candidates(d, ents, cs, kDefaultSectionWidth);
    if (cands.empty()) {
      fail("no candidate in OOV probe: " + d.text);
    } else {
      const auto x = encode_characters(d, ents, cands[0], vocab).features();
      const int at = static_cast<int>(alias.size()) + 1 - cands[0].section_span.start;
      for (int t = at; t < at + 3; ++t) {
        if (x(CharVocabulary::kOovIndex, t) != 1.0) fail("OOV byte not in OOV slot");
      }
    }
  }

  for (const auto &sd : corpus.documents) {
    const Document d{sd.doc_id, sd.text, sd.timestamp};
    const auto ents = annotate_entities(d, corpus.symbols);
    const auto cands = generate_candidates(d, ents, cs, kDefaultSectionWidth);
    std::vector<Eigen::MatrixXd> xs;
    for (const auto &c : cands) {
      const auto seq = encode_characters(d, ents, c, vocab);
      const Eigen::MatrixXd x = seq.features();
      ++checked;
      if (x.rows() != 102 || x.cols() != c.section_span.length()) fail(d.doc_id + ": shape");
      if (!((x.array() == 0.0) || (x.array() == 1.0)).all()) fail(d.doc_id + ": non-binary");
      for (int t = 0; t < x.cols(); ++t) {
        if (x.col(t).head(CharVocabulary::kOneHotDim).sum() != 1.0) fail(d.doc_id + ": one-hot");
        const int p = c.section_span.start + t;
        if (x(kRoleBlockOffset, t) != (c.symbol_span.contains(p) ? 1.0 : 0.0) ||
            x(kRoleBlockOffset + 1, t) != (c.value_span.contains(p) ? 1.0 : 0.0)) {
          fail(d.doc_id + ": role block");
        }
      }
      if (Eigen::MatrixXd(seq.sparse_features()) != x) fail(d.doc_id + ": sparse != dense");
      xs.push_back(x);
    }
    // candidates over the same section differ in the role block and nowhere else
    for (std::size_t a = 0; a < cands.size(); ++a) {
      for (std::size_t b = a + 1; b < cands.size(); ++b) {
        if (cands[a].section_span != cands[b].section_span) continue;
        if (cands[a].symbol_span == cands[b].symbol_span &&
            cands[a].value_span == cands[b].value_span) {
          continue;  // ABS/REL readings of one pair; told apart by the kind token in g
        }
        ++shared_sections;
        if (xs[a].topRows(kRoleBlockOffset) != xs[b].topRows(kRoleBlockOffset)) {
          fail(d.doc_id + ": non-role features differ");
        }
        if (xs[a].bottomRows(2) == xs[b].bottomRows(2)) fail(d.doc_id + ": roles identical");
      }
    }
  }
  std::string detail = fmt("%zu candidates, %zu same-section pairs", checked, shared_sections);
  for (const auto &f : failures) detail += "; " + f;
  return {failures.empty() && shared_sections > 0, detail};
}

// 7. two train+evaluate runs, byte-compared
Outcome determinism() {
  const auto dir = scratch("determinism");
  auto c = config_in("default.conf", dir);
  c.corpus.num_documents = 500;
  cmd_generate(c);
  cmd_train(c);
  const auto r1 = cmd_evaluate(c).to_json().dump();
  const auto m1 = read_file(c.checkpoint_path), f1 = read_file(c.fusion_path),
             b1 = read_file(c.baseline_path);
  cmd_train(c);
  const auto r2 = cmd_evaluate(c).to_json().dump();
  const bool same_ckpt = read_file(c.checkpoint_path) == m1 && read_file(c.fusion_path) == f1 &&
                         read_file(c.baseline_path) == b1;
  const auto bytes = m1.size();
  fs::remove_all(dir);
  return {same_ckpt && r1 == r2, fmt("checkpoints identical: %s (%zu bytes), reports identical: %s",
                                     same_ckpt ? "yes" : "no", bytes, r1 == r2 ? "yes" : "no")};
}

// 8. consistency score spot checks
Outcome score_spot_checks() {
  TimeSeriesStore store;
  store.add("A", 100, 5.0);
  store.add("U", 100, 4.9);
  const double exact = consistency_score(RelationKind::kTickAbs, "A", 5.0, 200, store).s;
  const double near = consistency_score(RelationKind::kTickAbs, "A", 4.9, 200, store).s;
  const auto wild = consistency_score(RelationKind::kTickAbs, "U", 49.0, 200, store);
  const int y = label_from_score(wild, kDefaultTau);
  const bool pass = exact == 0.0 && std::abs(near - (-4.0e-4)) <= 1e-12 &&
                    std::abs(wild.s - (-81.0)) <= 1e-9 && wild.s < kDefaultTau && y == 0;
  return {pass, fmt("s(5.0|5.0)=%g, s(4.9|5.0)=%.6g, s(49|4.9)=%.6g < tau=%g, y=%d", exact, near,
                    wild.s, kDefaultTau, y)};
}

}  // namespace

int main(int argc, char **argv) {
  const std::vector<std::pair<const char *, Outcome (*)()>> criteria = {
      {"gradient check", gradient_check},
      {"trainability", trainability},
      {"parser recall", parser_recall},
      {"false-positive reduction", precision_boost},
      {"LSTM vs n-gram baseline", lstm_vs_ngram},
      {"encoder properties", encoder_properties},
      {"determinism", determinism},
      {"score spot checks", score_spot_checks},
  };
  // wall-clock budgets in seconds
  const double budget[] = {60, 60, 30, 1800, 1800, 600, 1800, 10};

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(n)) continue;
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception &e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    const bool in_time = secs <= budget[i];
    const bool pass = out.pass && in_time;
    failed += !pass;
    std::printf("criterion %d %-26s %s  %s  [%.1fs%s]\n", n, criteria[i].first,
                pass ? "PASS" : "FAIL", out.detail.c_str(), secs,
                in_time ? "" : fmt(", over %.0fs budget", budget[i]).c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
