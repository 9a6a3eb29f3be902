#include "tickx/corpus.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "tickx/errors.h"
#include "tickx/io.h"
#include "tickx/parser.h"

namespace tickx {

namespace {

constexpr std::int64_t kBaseTimestamp = 1420070400;  // 2015-01-01T00:00:00Z
constexpr std::int64_t kPeriodSeconds = 30 * 86400;
constexpr int kSeriesLength = 240;

struct SymbolSpec {
  std::string name;
  std::vector<std::string> aliases;
  double lo, hi;  // random-walk bounds
  int decimals;
  bool percent;
  std::string prefix;
  bool thousands;
  double step;  // random-walk standard deviation
  int group;    // symbols in one group have comparable magnitudes
  double abs_min, abs_max, rel_min, rel_max;
};

const std::vector<SymbolSpec> &symbol_specs() {
  static const std::vector<SymbolSpec> specs = {
      {"US_Unemployment", {"US unemployment", "U.S. unemployment", "US jobless rate"},
       3.5, 9.5, 1, true, "", false, 0.15, 0, 0, 100, -20, 20},
      {"UK_Unemployment", {"UK unemployment", "British jobless rate"},
       3.5, 8.5, 1, true, "", false, 0.15, 0, 0, 100, -20, 20},
      {"EZ_Unemployment", {"euro zone unemployment", "eurozone jobless rate"},
       6.0, 12.0, 1, true, "", false, 0.15, 0, 0, 100, -20, 20},
      {"JP_Unemployment", {"Japan unemployment", "Japanese jobless rate"},
       2.0, 5.5, 1, true, "", false, 0.1, 0, 0, 100, -20, 20},
      {"US_Inflation", {"US inflation", "U.S. consumer prices"},
       0.2, 9.0, 1, true, "", false, 0.25, 1, -30, 100, -30, 30},
      {"EZ_Inflation", {"euro zone inflation", "eurozone consumer prices"},
       0.2, 10.0, 1, true, "", false, 0.25, 1, -30, 100, -30, 30},
      {"US_10Y_Yield", {"Treasury yield", "ten-year yield"},
       0.6, 5.5, 2, true, "", false, 0.12, 2, -5, 50, -10, 10},
      {"Fed_Funds_Rate", {"fed funds rate", "Fed policy rate"},
       0.1, 6.0, 2, true, "", false, 0.1, 2, 0, 25, -5, 5},
      {"EURUSD", {"EUR/USD", "euro-dollar rate"},
       0.95, 1.45, 4, false, "", false, 0.01, 3, 0.1, 10, -1, 1},
      {"USDJPY", {"USD/JPY", "dollar-yen rate"},
       80.0, 150.0, 2, false, "", false, 1.2, 4, 1, 1000, -50, 50},
      {"Brent", {"Brent crude", "Brent oil"},
       25.0, 130.0, 2, false, "$", false, 3.0, 5, 0, 1000, -100, 100},
      {"Gold", {"spot gold", "gold price"},
       1000.0, 2400.0, 1, false, "$", true, 25.0, 6, 0, 100000, -1000, 1000},
  };
  return specs;
}

double round_to(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

// Plain decimal digits, e.g. "1850.2"; this is what the parser recovers.
std::string plain_digits(double magnitude, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, magnitude);
  return buf;
}

std::string group_thousands(const std::string &digits) {
  const auto dot = digits.find('.');
  std::string integer = digits.substr(0, dot);
  const std::string rest = dot == std::string::npos ? "" : digits.substr(dot);
  for (int pos = static_cast<int>(integer.size()) - 3; pos > 0; pos -= 3) {
    integer.insert(static_cast<std::size_t>(pos), ",");
  }
  return integer + rest;
}

// A displayed quantity and the exact double the text denotes.
struct Rendered {
  std::string text;
  double value;
  int lead = 0;  // currency sign before the number
};

Rendered render_level(const SymbolSpec &spec, double v) {
  const std::string digits = plain_digits(std::abs(v), spec.decimals);
  std::string text = spec.thousands ? group_thousands(digits) : digits;
  double value = std::strtod(digits.c_str(), nullptr);
  if (v < 0) {
    text = "-" + text;
    value = -value;
  }
  const std::string prefix = v < 0 ? "" : spec.prefix;
  text = prefix + text + (spec.percent ? "%" : "");
  return {text, value, static_cast<int>(prefix.size())};
}

// Unsigned change magnitude; `signed_form` prefixes an explicit sign.
Rendered render_change(const SymbolSpec &spec, double delta, bool signed_form) {
  const std::string digits = plain_digits(std::abs(delta), spec.decimals);
  std::string text = spec.thousands ? group_thousands(digits) : digits;
  if (signed_form) text = (delta < 0 ? "-" : "+") + text;
  if (spec.percent) text += "%";
  const double mag = std::strtod(digits.c_str(), nullptr);
  return {text, delta < 0 ? -mag : mag, 0};
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal(double sd) { return std::normal_distribution<double>(0.0, sd)(engine_); }
  int integer(int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }
  bool chance(double p) { return uniform() < p; }
  template <typename T>
  const T &pick(const std::vector<T> &items) {
    return items[static_cast<std::size_t>(integer(0, static_cast<int>(items.size()) - 1))];
  }
  std::mt19937_64 &engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

std::vector<std::vector<double>> generate_series(std::uint64_t seed) {
  const auto &specs = symbol_specs();
  std::vector<std::vector<double>> series(specs.size());
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto &s = specs[k];
    Rng rng(mix_seed(seed, k));
    double v = round_to(rng.uniform(s.lo, s.hi), s.decimals);
    for (int t = 0; t < kSeriesLength; ++t) {
      if (t > 0) {
        double next = v + rng.normal(s.step);
        if (next < s.lo) next = 2 * s.lo - next;
        if (next > s.hi) next = 2 * s.hi - next;
        v = round_to(std::clamp(next, s.lo, s.hi), s.decimals);
      }
      series[k].push_back(render_level(s, v).value);
    }
  }
  return series;
}

// Template pieces: literal text and slots filled per document.
enum class Slot { kNone, kSymbol, kOther, kValue, kChange, kSignedChange };

struct Piece {
  Slot slot;
  std::string literal;
};

// Parses "{S} rose {C} to {V}" into pieces. {S}/{A} name the first symbol,
// {B} the second, {V} a level, {C} an unsigned change, {SC} a signed change.
std::vector<Piece> parse_template(const std::string &t) {
  std::vector<Piece> out;
  std::size_t i = 0;
  while (i < t.size()) {
    if (t[i] == '{') {
      const auto close = t.find('}', i);
      const std::string name = t.substr(i + 1, close - i - 1);
      Slot slot = Slot::kNone;
      if (name == "S" || name == "A") slot = Slot::kSymbol;
      if (name == "B") slot = Slot::kOther;
      if (name == "V") slot = Slot::kValue;
      if (name == "C") slot = Slot::kChange;
      if (name == "SC") slot = Slot::kSignedChange;
      out.push_back({slot, ""});
      i = close + 1;
    } else {
      const auto next = t.find('{', i);
      out.push_back({Slot::kNone, t.substr(i, next - i)});
      i = next == std::string::npos ? t.size() : next;
    }
  }
  return out;
}

const std::vector<std::string> &abs_templates() {
  static const std::vector<std::string> t = {
      "{S} at {V}", "{S} came in at {V}", "{S} stood at {V}",
      "{S} was {V} last month", "{S} printed {V}", "{S} holds at {V}",
      "{S} steady at {V}", "{S} hit {V}", "{S} reached {V}",
      "{S} settled at {V}", "{S}: {V}", "{S} is now {V}", "{V} for {S}",
      "Latest {S} reading {V}", "{S} reported at {V}",
      "{S} unchanged at {V}", "{S} touched {V}", "{S} registered {V}",
      "{S} was last seen at {V}", "{S} {V}"};
  return t;
}

const std::vector<std::string> &rise_templates() {
  static const std::vector<std::string> t = {
      "{S} rose {C} to {V}", "{S} up {C} at {V}", "{S} gained {C} to {V}",
      "{S} rose by {C}", "{S} up {C}", "{S} gained {C}",
      "{S} up {C}, now {V}", "{S} rose {C} on the month"};
  return t;
}

const std::vector<std::string> &fall_templates() {
  static const std::vector<std::string> t = {
      "{S} fell {C} to {V}", "{S} down {C} at {V}", "{S} lost {C} to {V}",
      "{S} fell by {C}", "{S} down {C}", "{S} lost {C}",
      "{S} down {C}, now {V}", "{S} fell {C} from a month ago"};
  return t;
}

const std::vector<std::string> &signed_templates() {
  static const std::vector<std::string> t = {
      "{S} {SC}", "{S} {SC} at {V}", "{S} moved {SC}", "{S} changed by {SC}",
      "{S} {SC} to {V}"};
  return t;
}

// Two symbols, one value. `second_owns` marks templates whose value belongs
// to {B}. Most come in pairs with the same words and the same symbol/value
// order, where only the position of a cue word decides the owner. In the
// comma-bracketed pairs the two variants even share every word and every
// bigram that does not involve a symbol alias, so a document-level bag of
// words cannot tell them apart.
struct AmbiguousTemplate {
  std::string text;
  bool second_owns;
};

const std::vector<AmbiguousTemplate> &ambiguous_templates() {
  static const std::vector<AmbiguousTemplate> t = {
      {"Unlike {A}, {B} stood at {V}", true},
      {"{A}, unlike {B}, stood at {V}", false},
      {"Rather than {A}, {B} came in at {V}", true},
      {"{A}, rather than {B}, came in at {V}", false},
      {"Not {A}, {B} reached {V}", true},
      {"{A}, not {B}, reached {V}", false},
      {"Instead of {A}, {B} printed {V}", true},
      {"{A}, instead of {B}, printed {V}", false},
      {"As opposed to {A}, {B} hit {V}", true},
      {"{A}, as opposed to {B}, hit {V}", false},
      {"Ahead of {A}, {B} settled at {V}", true},
      {"{A}, ahead of {B}, settled at {V}", false},
      {"Not {A} but {B} reached {V}", true},
      {"{A} but not {B} reached {V}", false},
      {"{A} came in at {V}, ahead of {B}", false},
      {"{A} was flat while {B} hit {V}", true},
  };
  return t;
}

// A sentence under construction with the relations it states, spans relative
// to the sentence start.
struct Sentence {
  std::string text;
  std::vector<GroundTruthRelation> relations;
  int distractors = 0;
};

struct SlotValues {
  const SymbolSpec *symbol = nullptr;
  const SymbolSpec *other = nullptr;
  Rendered level;
  Rendered change;
  Rendered signed_change;
  // Which symbol the {V} slot belongs to.
  const SymbolSpec *level_owner = nullptr;
};

Sentence render(const std::string &tmpl, const SlotValues &v, Rng &rng) {
  Sentence s;
  Span symbol_span, other_span, level_span, change_span;
  bool has_level = false, has_change = false;
  for (const auto &piece : parse_template(tmpl)) {
    const int start = static_cast<int>(s.text.size());
    switch (piece.slot) {
      case Slot::kNone:
        s.text += piece.literal;
        continue;
      case Slot::kSymbol:
        s.text += rng.pick(v.symbol->aliases);
        symbol_span = {start, static_cast<int>(s.text.size())};
        break;
      case Slot::kOther:
        s.text += rng.pick(v.other->aliases);
        other_span = {start, static_cast<int>(s.text.size())};
        break;
      case Slot::kValue:
        s.text += v.level.text;
        level_span = {start + v.level.lead, static_cast<int>(s.text.size())};
        has_level = true;
        break;
      case Slot::kChange:
      case Slot::kSignedChange:
        s.text += piece.slot == Slot::kChange ? v.change.text : v.signed_change.text;
        change_span = {start, static_cast<int>(s.text.size())};
        has_change = true;
        break;
    }
  }
  if (std::isalpha(static_cast<unsigned char>(s.text[0]))) {
    s.text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s.text[0])));
  }
  s.text += ".";
  if (has_change) {
    s.relations.push_back({RelationKind::kTickRel, v.symbol->name,
                           v.change.value, symbol_span, change_span});
  }
  if (has_level) {
    const bool other = v.level_owner == v.other;
    s.relations.push_back({RelationKind::kTickAbs, v.level_owner->name,
                           v.level.value, other ? other_span : symbol_span,
                           level_span});
  }
  return s;
}

// A single-symbol clause: absolute reading or reported change.
Sentence single_clause(const SymbolSpec &spec, double level, double previous,
                       Rng &rng) {
  SlotValues v;
  v.symbol = &spec;
  v.level_owner = &spec;
  v.level = render_level(spec, level);
  const double delta = round_to(level - previous, spec.decimals);
  const bool report_change = rng.chance(0.5) && delta != 0.0;
  if (!report_change) return render(rng.pick(abs_templates()), v, rng);
  v.change = render_change(spec, delta, false);
  v.signed_change = render_change(spec, delta, true);
  const double r = rng.uniform();
  const auto &pool = r < 0.25 ? signed_templates()
                     : delta > 0 ? rise_templates()
                                 : fall_templates();
  return render(rng.pick(pool), v, rng);
}

std::string format_date(std::int64_t timestamp, bool iso) {
  using namespace std::chrono;
  const sys_days day{floor<days>(sys_seconds{seconds{timestamp}})};
  const year_month_day ymd{day};
  char buf[32];
  if (iso) {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  } else {
    std::snprintf(buf, sizeof(buf), "%02u/%02u/%04d", static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<int>(ymd.year()));
  }
  return buf;
}

Sentence distractor_sentence(int kind, const SymbolSpec &spec, double level,
                             std::int64_t timestamp, Rng &rng) {
  Sentence s;
  char buf[96];
  switch (kind) {
    case 0: {  // a forecast near, but not at, the true reading
      double f = round_to(level * (1.0 + rng.uniform(-0.4, 0.4)), spec.decimals);
      if (f == round_to(level, spec.decimals)) f += std::pow(10.0, -spec.decimals);
      const std::string text = render_level(spec, f).text;
      static const std::vector<std::string> forms = {
          "Economists had expected %s", "Consensus was %s",
          "The forecast called for %s", "Analysts saw %s"};
      std::snprintf(buf, sizeof(buf), rng.pick(forms).c_str(), text.c_str());
      s.text = buf;
      s.distractors = 1;
      break;
    }
    case 1: {
      const int hour = rng.integer(7, 16);
      const int minute = rng.pick(std::vector<int>{0, 15, 30, 45});
      char clock[32];
      if (rng.chance(0.5)) {
        std::snprintf(clock, sizeof(clock), "%d:%02d %s", hour > 12 ? hour - 12 : hour,
                      minute, hour >= 12 ? "pm" : "am");
      } else {
        std::snprintf(clock, sizeof(clock), "%02d:%02d", hour, minute);
      }
      std::snprintf(buf, sizeof(buf), "Released %s at %s",
                    format_date(timestamp, rng.chance(0.5)).c_str(), clock);
      s.text = buf;
      s.distractors = 2;
      break;
    }
    case 2: {
      static const std::vector<std::string> forms = {
          "Poll of %d economists", "%d analysts were surveyed",
          "Based on %d responses"};
      std::snprintf(buf, sizeof(buf), rng.pick(forms).c_str(), rng.integer(12, 95));
      s.text = buf;
      s.distractors = 1;
      break;
    }
    default: {
      std::snprintf(buf, sizeof(buf), "Highest since %d", rng.integer(1990, 2014));
      s.text = buf;
      s.distractors = 1;
      break;
    }
  }
  s.text += ".";
  return s;
}

// A symbol other than `primary` and `also_taken`, preferably from the same
// group as `primary`.
std::size_t other_symbol(std::size_t primary, std::size_t also_taken, bool same_group,
                         Rng &rng) {
  const auto &specs = symbol_specs();
  std::vector<std::size_t> pool;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    if (k == primary || k == also_taken) continue;
    if (same_group && specs[k].group != specs[primary].group) continue;
    pool.push_back(k);
  }
  if (pool.empty()) return other_symbol(primary, also_taken, false, rng);
  return rng.pick(pool);
}

}  // namespace

void CorpusConfig::validate() const {
  if (num_documents < 1) throw ConfigError("num_documents must be >= 1");
  for (const auto &[name, rate] :
       {std::pair{"distractor_rate", distractor_rate},
        std::pair{"db_noise_rate", db_noise_rate},
        std::pair{"ambiguity_rate", ambiguity_rate}}) {
    if (!(rate >= 0.0 && rate <= 1.0)) {
      throw ConfigError(std::string(name) + " must be in [0, 1]");
    }
  }
  if (!(value_jitter >= 0.0)) throw ConfigError("value_jitter must be >= 0");
}

SymbolTable default_symbol_table() {
  std::vector<SymbolInfo> entries;
  for (const auto &s : symbol_specs()) {
    entries.push_back({s.name, s.aliases, s.abs_min, s.abs_max, s.rel_min, s.rel_max});
  }
  return SymbolTable(std::move(entries));
}

Corpus generate_corpus(const CorpusConfig &config) {
  config.validate();
  const auto &specs = symbol_specs();
  const auto series = generate_series(config.seed);

  Corpus corpus;
  corpus.symbols = default_symbol_table();

  // Store, with a fixed number of draws per point so the noise pattern of one
  // point never depends on another's outcome.
  for (std::size_t k = 0; k < specs.size(); ++k) {
    Rng rng(mix_seed(config.seed, (1ULL << 20) + k));
    for (int t = 0; t < kSeriesLength; ++t) {
      const double u_select = rng.uniform();
      const double u_size = 1.0 - rng.uniform();  // (0, 1]
      const bool up = rng.chance(0.5);
      const std::int64_t ts = kBaseTimestamp + t * kPeriodSeconds;
      double value = series[k][t];
      if (u_select < config.db_noise_rate) {
        const double perturbed =
            value * (1.0 + (up ? 1.0 : -1.0) * u_size * config.value_jitter);
        corpus.ledger.perturbed.push_back({specs[k].name, ts, value, perturbed});
        value = perturbed;
      }
      corpus.store.add(specs[k].name, ts, value);
    }
  }
  corpus.ledger.total_points = corpus.store.total_points();

  for (int i = 0; i < config.num_documents; ++i) {
    Rng rng(mix_seed(config.seed, (1ULL << 32) + static_cast<std::uint64_t>(i)));
    SyntheticDocument doc;
    char id[32];
    std::snprintf(id, sizeof(id), "doc-%06d", i);
    doc.doc_id = id;
    const int t = rng.integer(1, kSeriesLength - 1);
    doc.timestamp = kBaseTimestamp + t * kPeriodSeconds + rng.integer(3600, 20 * 86400);

    const std::size_t primary = static_cast<std::size_t>(
        rng.integer(0, static_cast<int>(specs.size()) - 1));
    const auto &p = specs[primary];
    std::vector<Sentence> sentences;
    std::size_t second = primary;
    if (rng.chance(config.ambiguity_rate)) {
      second = other_symbol(primary, primary, rng.chance(0.7), rng);
      const auto &tmpl = rng.pick(ambiguous_templates());
      SlotValues v;
      v.symbol = &p;
      v.other = &specs[second];
      v.level_owner = tmpl.second_owns ? v.other : v.symbol;
      const std::size_t owner = tmpl.second_owns ? second : primary;
      v.level = render_level(*v.level_owner, series[owner][t]);
      sentences.push_back(render(tmpl.text, v, rng));
      corpus.ledger.ambiguous_docs.push_back(doc.doc_id);
    } else {
      sentences.push_back(single_clause(p, series[primary][t], series[primary][t - 1], rng));
    }

    std::vector<Sentence> extras;
    if (rng.chance(0.5)) {
      // never a symbol the document already mentions
      const std::size_t third = other_symbol(primary, second, rng.chance(0.5), rng);
      extras.push_back(single_clause(specs[third], series[third][t],
                                     series[third][t - 1], rng));
    }
    int distractors = 0;
    if (rng.chance(config.distractor_rate)) {
      const int count = rng.integer(1, 2);
      for (int d = 0; d < count; ++d) {
        const int kind = rng.integer(0, 3);
        Sentence s = distractor_sentence(kind, p, series[primary][t], doc.timestamp, rng);
        distractors += s.distractors;
        // A forecast directly follows the reading it refers to.
        if (kind == 0) {
          sentences.push_back(std::move(s));
        } else {
          extras.push_back(std::move(s));
        }
      }
    }
    std::shuffle(extras.begin(), extras.end(), rng.engine());
    for (auto &s : extras) sentences.push_back(std::move(s));

    for (const auto &s : sentences) {
      if (!doc.text.empty()) doc.text += ' ';
      const int offset = static_cast<int>(doc.text.size());
      doc.text += s.text;
      for (auto r : s.relations) {
        r.symbol_span = {r.symbol_span.start + offset, r.symbol_span.end + offset};
        r.value_span = {r.value_span.start + offset, r.value_span.end + offset};
        doc.ground_truth.push_back(std::move(r));
      }
    }
    corpus.ledger.distractors[doc.doc_id] = distractors;
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

CorpusStats corpus_stats(const Corpus &corpus) {
  CorpusStats st;
  st.documents = corpus.documents.size();
  for (const auto &d : corpus.documents) {
    for (const auto &r : d.ground_truth) {
      (r.kind == RelationKind::kTickAbs ? st.tick_abs : st.tick_rel) += 1;
    }
  }
  st.ambiguous_documents = corpus.ledger.ambiguous_docs.size();
  for (const auto &[id, n] : corpus.ledger.distractors) st.distractor_tokens += n;
  st.distractor_density =
      st.documents ? static_cast<double>(st.distractor_tokens) / st.documents : 0.0;
  st.perturbed_points = corpus.ledger.perturbed.size();
  st.total_points = corpus.ledger.total_points;
  st.noise_fraction = st.total_points ? static_cast<double>(st.perturbed_points) /
                                            static_cast<double>(st.total_points)
                                      : 0.0;
  return st;
}

namespace {

Json document_to_json(const SyntheticDocument &d) {
  Json gt = Json::array();
  for (const auto &r : d.ground_truth) {
    gt.push_back({{"kind", std::string(to_string(r.kind))},
                  {"symbol", r.symbol},
                  {"value", r.value},
                  {"symbol_span", span_to_json(r.symbol_span)},
                  {"value_span", span_to_json(r.value_span)}});
  }
  return {{"doc_id", d.doc_id},
          {"text", d.text},
          {"timestamp", d.timestamp},
          {"ground_truth", gt}};
}

Json ledger_to_json(const CorpusLedger &ledger) {
  Json perturbed = Json::array();
  for (const auto &p : ledger.perturbed) {
    perturbed.push_back({{"symbol", p.symbol},
                         {"timestamp", p.timestamp},
                         {"original", p.original},
                         {"perturbed", p.perturbed}});
  }
  return {{"total_points", ledger.total_points},
          {"perturbed", perturbed},
          {"ambiguous_docs", ledger.ambiguous_docs},
          {"distractors", ledger.distractors}};
}

}  // namespace

std::string documents_to_jsonl(const std::vector<SyntheticDocument> &docs) {
  std::string out;
  for (const auto &d : docs) {
    out += document_to_json(d).dump();
    out += '\n';
  }
  return out;
}

void save_documents(const std::vector<SyntheticDocument> &docs,
                    const std::filesystem::path &path) {
  write_file(path, documents_to_jsonl(docs));
}

std::vector<SyntheticDocument> load_documents(const std::filesystem::path &path) {
  std::vector<SyntheticDocument> docs;
  for (const auto &j : read_jsonl(path)) {
    try {
      SyntheticDocument d;
      d.doc_id = j.at("doc_id").get<std::string>();
      d.text = j.at("text").get<std::string>();
      d.timestamp = j.at("timestamp").get<std::int64_t>();
      if (j.contains("ground_truth")) {
        for (const auto &r : j.at("ground_truth")) {
          d.ground_truth.push_back(
              {relation_kind_from_string(r.at("kind").get<std::string>()),
               r.at("symbol").get<std::string>(), r.at("value").get<double>(),
               span_from_json(r.at("symbol_span")),
               span_from_json(r.at("value_span"))});
        }
      }
      docs.push_back(std::move(d));
    } catch (const Json::exception &e) {
      throw IoError(path.string() + ": " + e.what());
    }
  }
  return docs;
}

void save_corpus(const Corpus &corpus, const CorpusPaths &paths,
                 int max_pair_distance) {
  save_documents(corpus.documents, paths.documents);
  save_store_csv(corpus.store, paths.store);
  save_symbol_table(corpus.symbols, paths.symbols);
  save_constraints(ConstraintSet::from_symbols(corpus.symbols, max_pair_distance),
                   paths.constraints);
  write_file(paths.ledger, ledger_to_json(corpus.ledger).dump(2) + "\n");
}

}  // namespace tickx
