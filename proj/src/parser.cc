#include "tickx/parser.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <tuple>

#include "tickx/encoder.h"
#include "tickx/errors.h"

namespace tickx {

std::string_view to_string(EntityType type) {
  switch (type) {
    case EntityType::kTsSymbol:
      return "TS_SYMBOL";
    case EntityType::kNumericValue:
      return "NUMERIC_VALUE";
    case EntityType::kChangeValue:
      return "CHANGE_VALUE";
    case EntityType::kDate:
      return "DATE";
    case EntityType::kTime:
      return "TIME";
  }
  return "UNKNOWN";
}

ConstraintSet ConstraintSet::from_symbols(const SymbolTable &symbols,
                                          int max_pair_distance) {
  ConstraintSet set(max_pair_distance);
  for (const auto &e : symbols.entries()) {
    set.set_range(e.symbol, RelationKind::kTickAbs, {e.min_value, e.max_value});
    set.set_range(e.symbol, RelationKind::kTickRel, {e.rel_min, e.rel_max});
  }
  return set;
}

void ConstraintSet::set_range(const std::string &symbol, RelationKind kind,
                              ValueRange range) {
  if (!(range.min_value <= range.max_value)) {
    throw ConfigError("constraint for " + symbol + " has min > max");
  }
  ranges_[{symbol, kind}] = range;
}

std::optional<ValueRange> ConstraintSet::range(const std::string &symbol,
                                               RelationKind kind) const {
  auto it = ranges_.find({symbol, kind});
  if (it == ranges_.end()) return std::nullopt;
  return it->second;
}

void save_constraints(const ConstraintSet &constraints,
                      const std::filesystem::path &path) {
  Json out = Json::object();
  for (const auto &[key, range] : constraints.ranges()) {
    const char *field = key.second == RelationKind::kTickAbs ? "abs" : "rel";
    out[key.first][field] = Json::array({range.min_value, range.max_value});
  }
  write_file(path, out.dump(2) + "\n");
}

ConstraintSet load_constraints(const std::filesystem::path &path,
                               int max_pair_distance) {
  ConstraintSet set(max_pair_distance);
  try {
    const Json j = Json::parse(read_file(path));
    for (const auto &[symbol, entry] : j.items()) {
      for (const auto &[field, kind] :
           {std::pair{"abs", RelationKind::kTickAbs},
            std::pair{"rel", RelationKind::kTickRel}}) {
        if (!entry.contains(field)) continue;
        const auto &r = entry.at(field);
        set.set_range(symbol, kind, {r.at(0).get<double>(), r.at(1).get<double>()});
      }
    }
  } catch (const Json::exception &e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return set;
}

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)); }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }
char lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool word_start(std::string_view text, std::size_t i) {
  return i == 0 || !is_alnum(text[i - 1]);
}
bool word_end(std::string_view text, std::size_t i) {
  return i >= text.size() || !is_alnum(text[i]);
}

std::size_t count_digits(std::string_view text, std::size_t i) {
  std::size_t n = 0;
  while (i + n < text.size() && is_digit(text[i + n])) ++n;
  return n;
}

// Length of a date token at i (YYYY-MM-DD or MM/DD/YYYY), 0 if none.
std::size_t match_date(std::string_view text, std::size_t i) {
  if (!word_start(text, i)) return 0;
  if (count_digits(text, i) == 4 && i + 10 <= text.size() &&
      text[i + 4] == '-' && count_digits(text, i + 5) == 2 &&
      text[i + 7] == '-' && count_digits(text, i + 8) == 2 &&
      word_end(text, i + 10)) {
    return 10;
  }
  const std::size_t m = count_digits(text, i);
  if (m < 1 || m > 2 || i + m >= text.size() || text[i + m] != '/') return 0;
  const std::size_t d = count_digits(text, i + m + 1);
  if (d < 1 || d > 2) return 0;
  const std::size_t j = i + m + 1 + d;
  if (j >= text.size() || text[j] != '/' || count_digits(text, j + 1) != 4) {
    return 0;
  }
  return word_end(text, j + 5) ? j + 5 - i : 0;
}

// Length of a clock time at i (H:MM or HH:MM, optional am/pm), 0 if none.
std::size_t match_time(std::string_view text, std::size_t i) {
  if (!word_start(text, i)) return 0;
  const std::size_t h = count_digits(text, i);
  if (h < 1 || h > 2 || i + h >= text.size() || text[i + h] != ':') return 0;
  if (count_digits(text, i + h + 1) != 2) return 0;
  std::size_t j = i + h + 3;
  auto meridiem = [&](std::size_t k) {
    return k + 2 <= text.size() &&
           (lower(text[k]) == 'a' || lower(text[k]) == 'p') &&
           lower(text[k + 1]) == 'm' && word_end(text, k + 2);
  };
  if (meridiem(j)) return j + 2 - i;
  if (j < text.size() && text[j] == ' ' && meridiem(j + 1)) return j + 3 - i;
  return word_end(text, j) ? j - i : 0;
}

struct NumberToken {
  std::size_t start = 0;  // includes an explicit sign
  std::size_t end = 0;
  int sign = 0;  // explicit sign, 0 when absent
  double magnitude = 0.0;
};

// Decimal number at i: optional sign, digits with optional thousands
// separators, optional fraction, optional percent sign.
std::optional<NumberToken> match_number(std::string_view text, std::size_t i) {
  NumberToken tok;
  tok.start = i;
  std::size_t j = i;
  if (text[j] == '+' || text[j] == '-') {
    if (i > 0 && !(text[i - 1] == ' ' || text[i - 1] == '(' ||
                   text[i - 1] == '[' || text[i - 1] == '\t' ||
                   text[i - 1] == '\n')) {
      return std::nullopt;
    }
    tok.sign = text[j] == '+' ? 1 : -1;
    ++j;
  } else if (i > 0 && (is_alnum(text[i - 1]) || text[i - 1] == '.' ||
                       text[i - 1] == ',')) {
    return std::nullopt;
  }
  const std::size_t lead = count_digits(text, j);
  if (lead == 0) return std::nullopt;

  std::string digits;
  std::size_t k = j + lead;
  digits.append(text.substr(j, lead));
  if (lead <= 3) {
    // Thousands groups: ",ddd" repeated, each group exactly three digits.
    while (k < text.size() && text[k] == ',' &&
           count_digits(text, k + 1) == 3) {
      digits.append(text.substr(k + 1, 3));
      k += 4;
    }
  }
  if (k + 1 < text.size() && text[k] == '.' && is_digit(text[k + 1])) {
    const std::size_t frac = count_digits(text, k + 1);
    digits += '.';
    digits.append(text.substr(k + 1, frac));
    k += 1 + frac;
  }
  if (k < text.size() && text[k] == '%') ++k;
  if (!word_end(text, k)) return std::nullopt;
  if (k - i > static_cast<std::size_t>(kMaxNumberTokenLength)) {
    return std::nullopt;
  }
  tok.end = k;
  tok.magnitude = std::strtod(digits.c_str(), nullptr);
  return tok;
}

// Sign implied by a change cue word right before position i ("fell 0.2",
// "rose by 3"), 0 when the number is not governed by a cue.
int cue_sign(std::string_view text, std::size_t i) {
  auto previous_word = [&](std::size_t &pos) -> std::string {
    while (pos > 0 && (text[pos - 1] == ' ' || text[pos - 1] == '\t')) --pos;
    const std::size_t end = pos;
    while (pos > 0 && std::isalpha(static_cast<unsigned char>(text[pos - 1]))) {
      --pos;
    }
    std::string word(text.substr(pos, end - pos));
    for (char &c : word) c = lower(c);
    return word;
  };
  std::size_t pos = i;
  std::string word = previous_word(pos);
  if (word == "by") word = previous_word(pos);
  if (word == "up" || word == "rose" || word == "gained") return 1;
  if (word == "down" || word == "fell" || word == "lost") return -1;
  return 0;
}

}  // namespace

std::vector<EntitySpan> annotate_entities(const Document &document,
                                          const SymbolTable &symbols) {
  const std::string_view text = document.text;
  const std::size_t n = text.size();
  std::vector<EntitySpan> out;

  struct Alias {
    std::string lowered;
    const std::string *symbol;
  };
  std::vector<Alias> aliases;
  for (const auto &e : symbols.entries()) {
    for (const auto &a : e.aliases) {
      std::string l = a;
      for (char &c : l) c = lower(c);
      aliases.push_back({std::move(l), &e.symbol});
    }
  }

  // Marks characters already claimed by symbols, dates and times.
  std::vector<bool> claimed(n, false);
  auto claim = [&](std::size_t start, std::size_t end) {
    std::fill(claimed.begin() + start, claimed.begin() + end, true);
  };

  for (std::size_t i = 0; i < n;) {
    const Alias *best = nullptr;
    if (word_start(text, i)) {
      for (const auto &a : aliases) {
        const std::size_t len = a.lowered.size();
        if (best && len <= best->lowered.size()) continue;
        if (i + len > n || !word_end(text, i + len)) continue;
        bool eq = true;
        for (std::size_t k = 0; k < len && eq; ++k) {
          eq = lower(text[i + k]) == a.lowered[k];
        }
        if (eq) best = &a;
      }
    }
    if (best) {
      const std::size_t end = i + best->lowered.size();
      out.push_back({EntityType::kTsSymbol,
                     {static_cast<int>(i), static_cast<int>(end)},
                     *best->symbol});
      claim(i, end);
      i = end;
    } else {
      ++i;
    }
  }

  for (std::size_t i = 0; i < n;) {
    if (claimed[i] || !is_digit(text[i])) {
      ++i;
      continue;
    }
    if (const std::size_t len = match_date(text, i); len > 0) {
      out.push_back({EntityType::kDate,
                     {static_cast<int>(i), static_cast<int>(i + len)},
                     std::string(text.substr(i, len))});
      claim(i, i + len);
      i += len;
    } else if (const std::size_t tlen = match_time(text, i); tlen > 0) {
      out.push_back({EntityType::kTime,
                     {static_cast<int>(i), static_cast<int>(i + tlen)},
                     std::string(text.substr(i, tlen))});
      claim(i, i + tlen);
      i += tlen;
    } else {
      ++i;
    }
  }

  for (std::size_t i = 0; i < n;) {
    const char c = text[i];
    const bool candidate_start =
        is_digit(c) ||
        ((c == '+' || c == '-') && i + 1 < n && is_digit(text[i + 1]));
    if (!candidate_start || claimed[i]) {
      ++i;
      continue;
    }
    const auto tok = match_number(text, i);
    if (!tok) {
      ++i;
      continue;
    }
    bool overlaps = false;
    for (std::size_t k = tok->start; k < tok->end && !overlaps; ++k) {
      overlaps = claimed[k];
    }
    if (overlaps) {
      i = tok->end;
      continue;
    }
    const Span span{static_cast<int>(tok->start), static_cast<int>(tok->end)};
    const double face = tok->sign < 0 ? -tok->magnitude : tok->magnitude;
    out.push_back({EntityType::kNumericValue, span, face});
    int change_sign = tok->sign;
    if (change_sign == 0) change_sign = cue_sign(text, tok->start);
    if (change_sign != 0) {
      out.push_back({EntityType::kChangeValue, span,
                     change_sign < 0 ? -tok->magnitude : tok->magnitude});
    }
    i = tok->end;
  }

  std::stable_sort(out.begin(), out.end(),
                   [](const EntitySpan &a, const EntitySpan &b) {
                     return std::tie(a.span.start, a.type) <
                            std::tie(b.span.start, b.type);
                   });
  return out;
}

bool apply_constraints(const ExtractionCandidate &candidate,
                       const ConstraintSet &constraints) {
  if (span_gap(candidate.symbol_span, candidate.value_span) >
      constraints.max_pair_distance()) {
    return false;
  }
  const auto range = constraints.range(candidate.symbol, candidate.kind);
  if (!range) return true;
  return range->min_value <= candidate.value &&
         candidate.value <= range->max_value;
}

std::vector<ExtractionCandidate> generate_candidates(
    const Document &document, const std::vector<EntitySpan> &entities,
    const ConstraintSet &constraints, int section_width) {
  std::vector<ExtractionCandidate> out;
  const int length = static_cast<int>(document.text.size());
  for (const auto &sym : entities) {
    if (sym.type != EntityType::kTsSymbol) continue;
    for (const auto &val : entities) {
      RelationKind kind;
      if (val.type == EntityType::kNumericValue) {
        kind = RelationKind::kTickAbs;
      } else if (val.type == EntityType::kChangeValue) {
        kind = RelationKind::kTickRel;
      } else {
        continue;
      }
      ExtractionCandidate c;
      c.doc_id = document.doc_id;
      c.kind = kind;
      c.symbol = sym.name();
      c.value = val.number();
      c.symbol_span = sym.span;
      c.value_span = val.span;
      if (!apply_constraints(c, constraints)) continue;
      c.section_span =
          section_window(c.symbol_span, c.value_span, length, section_width);
      out.push_back(std::move(c));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ExtractionCandidate &a, const ExtractionCandidate &b) {
                     return std::tie(a.symbol_span.start, a.value_span.start,
                                     a.kind) < std::tie(b.symbol_span.start,
                                                        b.value_span.start,
                                                        b.kind);
                   });
  return out;
}

Json candidate_to_json(const ExtractionCandidate &c) {
  Json aux = Json::object();
  for (const auto &[k, v] : c.aux) aux[k] = v;
  return {{"doc_id", c.doc_id},
          {"kind", std::string(to_string(c.kind))},
          {"symbol", c.symbol},
          {"value", c.value},
          {"symbol_span", span_to_json(c.symbol_span)},
          {"value_span", span_to_json(c.value_span)},
          {"section_span", span_to_json(c.section_span)},
          {"aux", aux}};
}

ExtractionCandidate candidate_from_json(const Json &j) {
  ExtractionCandidate c;
  c.doc_id = j.at("doc_id").get<std::string>();
  c.kind = relation_kind_from_string(j.at("kind").get<std::string>());
  c.symbol = j.at("symbol").get<std::string>();
  c.value = j.at("value").get<double>();
  c.symbol_span = span_from_json(j.at("symbol_span"));
  c.value_span = span_from_json(j.at("value_span"));
  c.section_span = span_from_json(j.at("section_span"));
  if (j.contains("aux")) {
    for (const auto &[k, v] : j.at("aux").items()) c.aux[k] = v.get<std::string>();
  }
  return c;
}

}  // namespace tickx
