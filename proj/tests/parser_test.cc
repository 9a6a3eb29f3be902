#include <gtest/gtest.h>

#include <random>

#include "tickx/errors.h"
#include "tickx/parser.h"

namespace tickx {
namespace {

SymbolTable table() {
  return SymbolTable({{"US_Unemployment", {"US unemployment", "unemployment"}, 0, 30, -5, 5},
                      {"US_CPI", {"CPI", "inflation"}, -5, 20, -5, 5}});
}

Document doc(std::string text) { return {"d", std::move(text), 0}; }

std::vector<EntitySpan> of_type(const std::vector<EntitySpan> &all, EntityType t) {
  std::vector<EntitySpan> out;
  for (const auto &e : all) {
    if (e.type == t) out.push_back(e);
  }
  return out;
}

TEST(Annotate, ChangeAndLevelInOneSentence) {
  const auto d = doc("US unemployment fell 0.2% to 4.9% in March");
  const auto ents = annotate_entities(d, table());
  const auto syms = of_type(ents, EntityType::kTsSymbol);
  ASSERT_EQ(syms.size(), 1u);
  EXPECT_EQ(syms[0].name(), "US_Unemployment");
  EXPECT_EQ(syms[0].span, (Span{0, 15}));

  const auto nums = of_type(ents, EntityType::kNumericValue);
  ASSERT_EQ(nums.size(), 2u);
  EXPECT_EQ(nums[0].number(), 0.2);
  EXPECT_EQ(nums[1].number(), 4.9);
  EXPECT_EQ(d.text.substr(nums[1].span.start, nums[1].span.length()), "4.9%");

  const auto changes = of_type(ents, EntityType::kChangeValue);
  ASSERT_EQ(changes.size(), 1u);
  EXPECT_EQ(changes[0].number(), -0.2);
  EXPECT_EQ(changes[0].span, nums[0].span);
}

TEST(Candidates, ChangeAndLevelInOneSentence) {
  const auto d = doc("US unemployment fell 0.2% to 4.9% in March");
  const auto cands = generate_candidates(d, annotate_entities(d, table()),
                                         ConstraintSet::from_symbols(table(), 160), 200);
  bool abs = false, rel = false;
  for (const auto &c : cands) {
    abs |= c.kind == RelationKind::kTickAbs && c.value == 4.9;
    rel |= c.kind == RelationKind::kTickRel && c.value == -0.2;
  }
  EXPECT_TRUE(abs);
  EXPECT_TRUE(rel);
}

TEST(Candidates, SinglePair) {
  const auto d = doc("CPI printed 3.2 today");
  const auto cands = generate_candidates(d, annotate_entities(d, table()),
                                         ConstraintSet::from_symbols(table(), 200), 200);
  ASSERT_EQ(cands.size(), 1u);
  EXPECT_EQ(cands[0].kind, RelationKind::kTickAbs);
  EXPECT_EQ(cands[0].value, 3.2);
}

TEST(Candidates, TwoSymbolsFlankingOneValue) {
  const auto d = doc("CPI and not unemployment at 4.1");
  const auto cands = generate_candidates(d, annotate_entities(d, table()),
                                         ConstraintSet::from_symbols(table(), 160), 200);
  ASSERT_EQ(cands.size(), 2u);
  EXPECT_NE(cands[0].symbol, cands[1].symbol);
  EXPECT_EQ(cands[0].value_span, cands[1].value_span);
}

TEST(Annotate, LongestAliasWins) {
  const auto ents = annotate_entities(doc("us unemployment rose"), table());
  ASSERT_EQ(ents.size(), 1u);
  EXPECT_EQ(ents[0].span, (Span{0, 15}));
}

TEST(Annotate, AliasNeedsWordBoundaries) {
  EXPECT_TRUE(annotate_entities(doc("CPIX and xcpi"), table()).empty());
}

TEST(Annotate, DatesAndTimesAreNotValues) {
  const auto ents =
      annotate_entities(doc("On 2020-03-15 at 10:30 am, and 3/4/2021 at 9:05"), table());
  EXPECT_EQ(of_type(ents, EntityType::kDate).size(), 2u);
  EXPECT_EQ(of_type(ents, EntityType::kTime).size(), 2u);
  EXPECT_TRUE(of_type(ents, EntityType::kNumericValue).empty());
}

TEST(Annotate, NumberForms) {
  const auto ents = annotate_entities(doc("1,234.5 and -3 and +0.75% and 12a"), table());
  const auto nums = of_type(ents, EntityType::kNumericValue);
  ASSERT_EQ(nums.size(), 3u);
  EXPECT_EQ(nums[0].number(), 1234.5);
  EXPECT_EQ(nums[1].number(), -3.0);
  EXPECT_EQ(nums[2].number(), 0.75);
  // explicit signs make change values
  EXPECT_EQ(of_type(ents, EntityType::kChangeValue).size(), 2u);
}

TEST(Annotate, CueWithBy) {
  const auto ents = annotate_entities(doc("inflation rose by 0.3 points"), table());
  const auto ch = of_type(ents, EntityType::kChangeValue);
  ASSERT_EQ(ch.size(), 1u);
  EXPECT_EQ(ch[0].number(), 0.3);
}

TEST(Annotate, OverlongNumberIgnored) {
  const auto ents = annotate_entities(doc(std::string(30, '9')), table());
  EXPECT_TRUE(ents.empty());
}

TEST(Constraints, OutOfRangeValueIsDropped) {
  const auto d = doc("CPI printed 250 today");
  const auto cands = generate_candidates(d, annotate_entities(d, table()),
                                         ConstraintSet::from_symbols(table(), 160), 200);
  EXPECT_TRUE(cands.empty());
}

TEST(Constraints, BoundsAreInclusive) {
  ConstraintSet cs(10);
  cs.set_range("X", RelationKind::kTickAbs, {1.0, 2.0});
  ExtractionCandidate c;
  c.symbol = "X";
  c.symbol_span = {0, 1};
  c.value_span = {11, 12};
  for (double v : {1.0, 2.0}) {
    c.value = v;
    EXPECT_TRUE(apply_constraints(c, cs));
  }
  c.value = std::nextafter(2.0, 3.0);
  EXPECT_FALSE(apply_constraints(c, cs));
  c.value = 1.5;
  c.value_span = {12, 13};
  EXPECT_FALSE(apply_constraints(c, cs));
  c.symbol = "unranged";
  c.value = 1e9;
  c.value_span = {5, 6};
  EXPECT_TRUE(apply_constraints(c, cs));
  EXPECT_THROW(cs.set_range("X", RelationKind::kTickRel, {2.0, 1.0}), ConfigError);
}

// Every (symbol, value) pair that satisfies the constraints, and nothing else.
TEST(Candidates, EqualBruteForcePairing) {
  std::mt19937_64 rng(17);
  const std::vector<std::string> words = {"CPI", "unemployment", "fell", "rose", "to", "at",
                                          "and", "3.5", "12", "0.4%", "-1.2", "+2", "by",
                                          "2020-01-02", "7:15", "100"};
  const auto syms = table();
  const ConstraintSet cs = ConstraintSet::from_symbols(syms, 40);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const int n = 5 + static_cast<int>(rng() % 20);
    for (int k = 0; k < n; ++k) {
      if (k) text += ' ';
      text += words[rng() % words.size()];
    }
    const auto d = doc(text);
    const auto ents = annotate_entities(d, syms);
    const auto got = generate_candidates(d, ents, cs, 400);

    std::size_t expected = 0;
    for (const auto &a : ents) {
      if (a.type != EntityType::kTsSymbol) continue;
      for (const auto &b : ents) {
        if (b.type != EntityType::kNumericValue && b.type != EntityType::kChangeValue) continue;
        const auto kind = b.type == EntityType::kNumericValue ? RelationKind::kTickAbs
                                                               : RelationKind::kTickRel;
        const auto range = cs.range(a.name(), kind);
        const bool ok = span_gap(a.span, b.span) <= 40 &&
                        (!range || (range->min_value <= b.number() &&
                                    b.number() <= range->max_value));
        if (!ok) continue;
        ++expected;
        const bool found = std::any_of(got.begin(), got.end(), [&](const auto &c) {
          return c.symbol_span == a.span && c.value_span == b.span && c.kind == kind &&
                 c.value == b.number() && c.section_span.contains(span_union(a.span, b.span));
        });
        EXPECT_TRUE(found) << text;
      }
    }
    EXPECT_EQ(got.size(), expected) << text;
  }
}

TEST(Candidates, SortedBySymbolThenValue) {
  const auto d = doc("CPI 3 and unemployment 4 rose 0.2");
  const auto cands = generate_candidates(d, annotate_entities(d, table()),
                                         ConstraintSet::from_symbols(table(), 160), 200);
  ASSERT_FALSE(cands.empty());
  for (std::size_t k = 1; k < cands.size(); ++k) {
    const auto &a = cands[k - 1], &b = cands[k];
    EXPECT_LE(std::tie(a.symbol_span.start, a.value_span.start, a.kind),
              std::tie(b.symbol_span.start, b.value_span.start, b.kind));
  }
}

TEST(Candidates, JsonRoundTrip) {
  ExtractionCandidate c;
  c.doc_id = "x";
  c.kind = RelationKind::kTickRel;
  c.symbol = "US_CPI";
  c.value = 0.1 + 0.2;
  c.symbol_span = {1, 4};
  c.value_span = {10, 13};
  c.section_span = {0, 20};
  c.aux["k"] = "v";
  const auto back = candidate_from_json(candidate_to_json(c));
  EXPECT_EQ(back.value, c.value);
  EXPECT_EQ(back.kind, c.kind);
  EXPECT_EQ(back.symbol_span, c.symbol_span);
  EXPECT_EQ(back.section_span, c.section_span);
  EXPECT_EQ(back.aux, c.aux);
}

}  // namespace
}  // namespace tickx
