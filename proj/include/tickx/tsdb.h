#ifndef TICKX_TSDB_H_
#define TICKX_TSDB_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tickx/types.h"

namespace tickx {

struct ExtractionCandidate;

struct TimePoint {
  std::int64_t timestamp = 0;
  double value = 0.0;
  friend bool operator==(const TimePoint &, const TimePoint &) = default;
};

// Historical time series keyed by symbol. Each series is kept sorted by
// strictly increasing timestamp. Immutable once loaded; reads are
// thread-safe.
class TimeSeriesStore {
 public:
  // Appends or inserts a point. Throws ConfigError on a duplicate timestamp
  // or a non-finite value.
  void add(const std::string &symbol, std::int64_t timestamp, double value);

  bool has_symbol(const std::string &symbol) const;
  // Throws UnknownSymbol.
  const std::vector<TimePoint> &series(const std::string &symbol) const;
  const std::map<std::string, std::vector<TimePoint>> &all() const {
    return series_;
  }
  std::size_t total_points() const;

  friend bool operator==(const TimeSeriesStore &,
                         const TimeSeriesStore &) = default;

 private:
  std::map<std::string, std::vector<TimePoint>> series_;
};

// CSV with header `symbol,timestamp,value`; values are written with enough
// digits to round-trip exactly.
void save_store_csv(const TimeSeriesStore &store,
                    const std::filesystem::path &path);
TimeSeriesStore load_store_csv(const std::filesystem::path &path);

struct ReferencePoint {
  double value = 0.0;
  std::int64_t timestamp = 0;
};

// Latest point with point.timestamp <= timestamp.
// Throws UnknownSymbol or NoHistory.
ReferencePoint lookup_reference(const TimeSeriesStore &store,
                                const std::string &symbol,
                                std::int64_t timestamp);

// The point returned by lookup_reference and the one immediately before it.
// Throws NoHistory when fewer than two points precede the timestamp.
std::pair<ReferencePoint, ReferencePoint> lookup_reference_pair(
    const TimeSeriesStore &store, const std::string &symbol,
    std::int64_t timestamp);

inline constexpr double kScoreEpsilon = 1e-6;
inline constexpr double kDefaultTau = -0.0025;

struct ConsistencyScore {
  double s = 0.0;
  double reference_value = 0.0;
  std::int64_t reference_timestamp = 0;
};

// Negative squared relative error of the extracted value against the store:
//   abs:  s = -((v - v_ref) / max(|v_ref|, eps))^2
//   rel:  s = -((v - (v_ref - v_prev)) / max(|v_ref|, eps))^2
// The relative-change denominator is the level, not the change.
ConsistencyScore consistency_score(RelationKind kind, const std::string &symbol,
                                   double value, std::int64_t timestamp,
                                   const TimeSeriesStore &store);
ConsistencyScore consistency_score(const ExtractionCandidate &candidate,
                                   std::int64_t timestamp,
                                   const TimeSeriesStore &store);

// Same as consistency_score but returns nullopt instead of throwing
// UnknownSymbol / NoHistory.
std::optional<ConsistencyScore> try_consistency_score(
    const ExtractionCandidate &candidate, std::int64_t timestamp,
    const TimeSeriesStore &store);

// y = 1 iff s >= tau.
int label_from_score(const ConsistencyScore &score, double tau = kDefaultTau);

}  // namespace tickx

#endif  // TICKX_TSDB_H_
