#ifndef TICKX_PARSER_H_
#define TICKX_PARSER_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tickx/io.h"
#include "tickx/symbols.h"
#include "tickx/types.h"

namespace tickx {

struct Document {
  std::string doc_id;
  std::string text;
  std::int64_t timestamp = 0;
};

enum class EntityType : std::uint8_t {
  kTsSymbol = 0,
  kNumericValue = 1,
  kChangeValue = 2,
  kDate = 3,
  kTime = 4,
};
inline constexpr int kNumEntityTypes = 5;

std::string_view to_string(EntityType type);

struct EntitySpan {
  EntityType type = EntityType::kTsSymbol;
  Span span;
  // Resolved symbol name for TS_SYMBOL, numeric value otherwise (percent
  // normalized to its face number, change values carry their sign). Dates and
  // times keep their surface string.
  std::variant<std::string, double> normalized;

  double number() const { return std::get<double>(normalized); }
  const std::string &name() const { return std::get<std::string>(normalized); }
};

struct ExtractionCandidate {
  std::string doc_id;
  RelationKind kind = RelationKind::kTickAbs;
  std::string symbol;
  double value = 0.0;
  Span symbol_span;
  Span value_span;
  Span section_span;
  std::map<std::string, std::string> aux;
};

struct ValueRange {
  double min_value = 0.0;
  double max_value = 0.0;
};

inline constexpr int kDefaultMaxPairDistance = 160;

// Per (symbol, kind) inclusive value ranges plus the symbol-value window.
class ConstraintSet {
 public:
  ConstraintSet() = default;
  explicit ConstraintSet(int max_pair_distance)
      : max_pair_distance_(max_pair_distance) {}

  // Ranges from the symbol table's abs/rel bounds.
  static ConstraintSet from_symbols(const SymbolTable &symbols,
                                    int max_pair_distance);

  // Throws ConfigError when min > max.
  void set_range(const std::string &symbol, RelationKind kind,
                 ValueRange range);
  std::optional<ValueRange> range(const std::string &symbol,
                                  RelationKind kind) const;

  int max_pair_distance() const { return max_pair_distance_; }
  void set_max_pair_distance(int d) { max_pair_distance_ = d; }

  const std::map<std::pair<std::string, RelationKind>, ValueRange> &ranges()
      const {
    return ranges_;
  }

 private:
  int max_pair_distance_ = kDefaultMaxPairDistance;
  std::map<std::pair<std::string, RelationKind>, ValueRange> ranges_;
};

// JSON object keyed by symbol: {"abs": [min, max], "rel": [min, max]}.
void save_constraints(const ConstraintSet &constraints,
                      const std::filesystem::path &path);
ConstraintSet load_constraints(const std::filesystem::path &path,
                               int max_pair_distance);

// Number tokens longer than this are not read as values.
inline constexpr int kMaxNumberTokenLength = 24;

// Annotates symbol aliases (longest case-insensitive match, left to right,
// non-overlapping), decimal numbers, change values governed by a cue word or
// explicit sign, dates and clock times. Tokens classified as dates or times
// are not also read as plain numbers. Output is ordered by (start, type).
std::vector<EntitySpan> annotate_entities(const Document &document,
                                          const SymbolTable &symbols);

// True iff the value lies in the inclusive (symbol, kind) range and the gap
// between the symbol and value spans is within max_pair_distance. Unknown
// (symbol, kind) pairs are accepted.
bool apply_constraints(const ExtractionCandidate &candidate,
                       const ConstraintSet &constraints);

// Exhaustive window pairing: every symbol x numeric value pair yields a
// TICK_ABS candidate and every symbol x change value pair a TICK_REL
// candidate, subject to apply_constraints. Sorted by symbol start, value
// start, then kind. Section spans come from section_window with the given
// width.
std::vector<ExtractionCandidate> generate_candidates(
    const Document &document, const std::vector<EntitySpan> &entities,
    const ConstraintSet &constraints, int section_width);

Json candidate_to_json(const ExtractionCandidate &candidate);
ExtractionCandidate candidate_from_json(const Json &j);

}  // namespace tickx

#endif  // TICKX_PARSER_H_
