#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "tickx/corpus.h"
#include "tickx/errors.h"
#include "tickx/parser.h"

namespace tickx {
namespace {

CorpusConfig clean(int n, std::uint64_t seed) {
  CorpusConfig c;
  c.num_documents = n;
  c.distractor_rate = 0.0;
  c.db_noise_rate = 0.0;
  c.ambiguity_rate = 0.0;
  c.seed = seed;
  return c;
}

TEST(Corpus, DeterministicInSeed) {
  CorpusConfig c;
  c.num_documents = 200;
  const auto a = generate_corpus(c);
  const auto b = generate_corpus(c);
  EXPECT_EQ(documents_to_jsonl(a.documents), documents_to_jsonl(b.documents));
  EXPECT_EQ(a.store, b.store);
  c.seed = 43;
  EXPECT_NE(documents_to_jsonl(generate_corpus(c).documents), documents_to_jsonl(a.documents));
}

TEST(Corpus, GrowingKeepsThePrefix) {
  CorpusConfig c;
  c.num_documents = 50;
  const auto small = generate_corpus(c);
  c.num_documents = 120;
  const auto big = generate_corpus(c);
  EXPECT_EQ(small.store, big.store);
  EXPECT_EQ(documents_to_jsonl(small.documents),
            documents_to_jsonl({big.documents.begin(), big.documents.begin() + 50}));
}

TEST(Corpus, SingleCleanDocumentAgreesWithStore) {
  const auto corpus = generate_corpus(clean(1, 7));
  ASSERT_EQ(corpus.documents.size(), 1u);
  const auto &d = corpus.documents[0];
  ASSERT_FALSE(d.ground_truth.empty());
  EXPECT_EQ(d.ground_truth[0].kind, RelationKind::kTickAbs);
  for (const auto &r : d.ground_truth) {
    const auto sc = consistency_score(r.kind, r.symbol, r.value, d.timestamp, corpus.store);
    EXPECT_EQ(label_from_score(sc), 1) << d.text;
    if (r.kind == RelationKind::kTickAbs) {
      EXPECT_NEAR(r.value, sc.reference_value, 1e-9 * std::abs(sc.reference_value) + 1e-12);
    }
  }
}

TEST(Corpus, CleanGroundTruthIsConsistent) {
  const auto corpus = generate_corpus(clean(300, 5));
  for (const auto &d : corpus.documents) {
    for (const auto &r : d.ground_truth) {
      const auto sc = consistency_score(r.kind, r.symbol, r.value, d.timestamp, corpus.store);
      EXPECT_EQ(label_from_score(sc), 1) << d.text;
    }
  }
}

// Ground truth spans point at the annotated entities carrying the value.
TEST(Corpus, SpansMatchAnnotations) {
  CorpusConfig c;
  c.num_documents = 300;
  c.ambiguity_rate = 0.5;
  c.distractor_rate = 1.0;
  const auto corpus = generate_corpus(c);
  for (const auto &d : corpus.documents) {
    const auto ents = annotate_entities({d.doc_id, d.text, d.timestamp}, corpus.symbols);
    for (const auto &r : d.ground_truth) {
      const auto want = r.kind == RelationKind::kTickAbs ? EntityType::kNumericValue
                                                         : EntityType::kChangeValue;
      bool sym = false, val = false;
      for (const auto &e : ents) {
        sym |= e.type == EntityType::kTsSymbol && e.span == r.symbol_span && e.name() == r.symbol;
        val |= e.type == want && e.span == r.value_span && e.number() == r.value;
      }
      EXPECT_TRUE(sym && val) << d.text;
    }
  }
}

TEST(Corpus, NoiseRateIsBinomial) {
  CorpusConfig c;
  c.num_documents = 1;
  c.db_noise_rate = 0.05;
  const auto st = corpus_stats(generate_corpus(c));
  const double n = static_cast<double>(st.total_points);
  const double sd = std::sqrt(n * 0.05 * 0.95);
  EXPECT_NEAR(static_cast<double>(st.perturbed_points), 0.05 * n, 4 * sd);
}

TEST(Corpus, FullNoiseMovesEveryReference) {
  CorpusConfig c;
  c.num_documents = 100;
  c.db_noise_rate = 1.0;
  c.value_jitter = 0.5;
  const auto corpus = generate_corpus(c);
  EXPECT_EQ(corpus.ledger.perturbed.size(), corpus.ledger.total_points);
  for (const auto &d : corpus.documents) {
    for (const auto &r : d.ground_truth) {
      if (r.kind != RelationKind::kTickAbs) continue;
      EXPECT_NE(lookup_reference(corpus.store, r.symbol, d.timestamp).value, r.value);
    }
  }
}

TEST(Corpus, AmbiguityRate) {
  CorpusConfig c;
  c.num_documents = 1000;
  c.ambiguity_rate = 0.2;
  const auto st = corpus_stats(generate_corpus(c));
  EXPECT_NEAR(static_cast<double>(st.ambiguous_documents), 200.0, 40.0);
}

TEST(Corpus, NoDistractorsWhenRateIsZero) {
  const auto st = corpus_stats(generate_corpus(clean(200, 3)));
  EXPECT_EQ(st.distractor_tokens, 0u);
  EXPECT_EQ(st.ambiguous_documents, 0u);
  EXPECT_EQ(st.perturbed_points, 0u);
}

TEST(CorpusStats, CountsHandBuiltCorpus) {
  Corpus corpus;
  SyntheticDocument d;
  d.doc_id = "a";
  d.ground_truth.push_back({RelationKind::kTickAbs, "X", 1.0, {0, 1}, {2, 3}});
  corpus.documents.push_back(d);
  const auto st = corpus_stats(corpus);
  EXPECT_EQ(st.tick_abs, 1u);
  EXPECT_EQ(st.tick_rel, 0u);
  EXPECT_EQ(st.documents, 1u);
  EXPECT_EQ(st.noise_fraction, 0.0);
}

TEST(CorpusConfig, RejectsBadRates) {
  CorpusConfig c;
  c.db_noise_rate = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.ambiguity_rate = -0.1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.num_documents = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Documents, JsonlRoundTrip) {
  CorpusConfig c;
  c.num_documents = 40;
  const auto corpus = generate_corpus(c);
  const auto path = std::filesystem::temp_directory_path() / "tickx_docs_test.jsonl";
  save_documents(corpus.documents, path);
  const auto back = load_documents(path);
  EXPECT_EQ(documents_to_jsonl(back), documents_to_jsonl(corpus.documents));
  ASSERT_EQ(back.size(), corpus.documents.size());
  EXPECT_EQ(back[3].ground_truth.size(), corpus.documents[3].ground_truth.size());
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace tickx
