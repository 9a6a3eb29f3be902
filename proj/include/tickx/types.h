#ifndef TICKX_TYPES_H_
#define TICKX_TYPES_H_

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>

namespace tickx {

// Half-open character range [start, end) into a document text. Offsets count
// bytes; the synthetic corpus is ASCII so bytes and characters coincide.
struct Span {
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
  bool valid() const { return start < end; }
  bool contains(const Span &other) const {
    return start <= other.start && other.end <= end;
  }
  bool contains(int pos) const { return start <= pos && pos < end; }
  bool overlaps(const Span &other) const {
    return start < other.end && other.start < end;
  }
  friend bool operator==(const Span &, const Span &) = default;
  friend auto operator<=>(const Span &, const Span &) = default;
};

// Smallest span covering both inputs.
inline Span span_union(const Span &a, const Span &b) {
  return {std::min(a.start, b.start), std::max(a.end, b.end)};
}

// Number of characters strictly between two spans (0 when they touch or
// overlap).
inline int span_gap(const Span &a, const Span &b) {
  return std::max(0, std::max(a.start, b.start) - std::min(a.end, b.end));
}

// The two relation types the parser supports: an absolute reading of a time
// series and a signed change in it.
enum class RelationKind : std::uint8_t { kTickAbs = 0, kTickRel = 1 };

std::string_view to_string(RelationKind kind);
RelationKind relation_kind_from_string(std::string_view name);

}  // namespace tickx

#endif  // TICKX_TYPES_H_
