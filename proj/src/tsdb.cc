#include "tickx/tsdb.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tickx/errors.h"
#include "tickx/io.h"
#include "tickx/parser.h"

namespace tickx {

void TimeSeriesStore::add(const std::string &symbol, std::int64_t timestamp,
                          double value) {
  if (!std::isfinite(value)) {
    throw ConfigError("non-finite value for " + symbol);
  }
  auto &points = series_[symbol];
  auto it = std::lower_bound(
      points.begin(), points.end(), timestamp,
      [](const TimePoint &p, std::int64_t ts) { return p.timestamp < ts; });
  if (it != points.end() && it->timestamp == timestamp) {
    throw ConfigError("duplicate timestamp " + std::to_string(timestamp) +
                      " for " + symbol);
  }
  points.insert(it, {timestamp, value});
}

bool TimeSeriesStore::has_symbol(const std::string &symbol) const {
  return series_.count(symbol) > 0;
}

const std::vector<TimePoint> &TimeSeriesStore::series(
    const std::string &symbol) const {
  auto it = series_.find(symbol);
  if (it == series_.end()) throw UnknownSymbol(symbol);
  return it->second;
}

std::size_t TimeSeriesStore::total_points() const {
  std::size_t n = 0;
  for (const auto &[symbol, points] : series_) n += points.size();
  return n;
}

void save_store_csv(const TimeSeriesStore &store,
                    const std::filesystem::path &path) {
  std::string out = "symbol,timestamp,value\n";
  char buf[64];
  for (const auto &[symbol, points] : store.all()) {
    for (const auto &p : points) {
      std::snprintf(buf, sizeof(buf), "%.17g", p.value);
      out += symbol + "," + std::to_string(p.timestamp) + "," + buf + "\n";
    }
  }
  write_file(path, out);
}

TimeSeriesStore load_store_csv(const std::filesystem::path &path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("symbol,timestamp,value", 0) != 0) {
    throw IoError(path.string() + ": missing header symbol,timestamp,value");
  }
  TimeSeriesStore store;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw IoError(path.string() + ":" + std::to_string(lineno) +
                    ": expected 3 fields");
    }
    try {
      store.add(line.substr(0, c1), std::stoll(line.substr(c1 + 1, c2 - c1 - 1)),
                std::stod(line.substr(c2 + 1)));
    } catch (const std::logic_error &) {
      throw IoError(path.string() + ":" + std::to_string(lineno) +
                    ": malformed number");
    }
  }
  return store;
}

namespace {

// Index of the latest point at or before timestamp, or -1.
std::ptrdiff_t latest_index(const std::vector<TimePoint> &points,
                            std::int64_t timestamp) {
  auto it = std::upper_bound(
      points.begin(), points.end(), timestamp,
      [](std::int64_t ts, const TimePoint &p) { return ts < p.timestamp; });
  return (it - points.begin()) - 1;
}

}  // namespace

ReferencePoint lookup_reference(const TimeSeriesStore &store,
                                const std::string &symbol,
                                std::int64_t timestamp) {
  const auto &points = store.series(symbol);
  const auto i = latest_index(points, timestamp);
  if (i < 0) {
    throw NoHistory("no " + symbol + " point at or before " +
                    std::to_string(timestamp));
  }
  return {points[i].value, points[i].timestamp};
}

std::pair<ReferencePoint, ReferencePoint> lookup_reference_pair(
    const TimeSeriesStore &store, const std::string &symbol,
    std::int64_t timestamp) {
  const auto &points = store.series(symbol);
  const auto i = latest_index(points, timestamp);
  if (i < 1) {
    throw NoHistory("fewer than two " + symbol + " points at or before " +
                    std::to_string(timestamp));
  }
  return {{points[i].value, points[i].timestamp},
          {points[i - 1].value, points[i - 1].timestamp}};
}

ConsistencyScore consistency_score(RelationKind kind, const std::string &symbol,
                                   double value, std::int64_t timestamp,
                                   const TimeSeriesStore &store) {
  ReferencePoint ref;
  double expected = 0.0;
  if (kind == RelationKind::kTickAbs) {
    ref = lookup_reference(store, symbol, timestamp);
    expected = ref.value;
  } else {
    const auto [latest, previous] =
        lookup_reference_pair(store, symbol, timestamp);
    ref = latest;
    expected = latest.value - previous.value;
  }
  const double rel =
      (value - expected) / std::max(std::abs(ref.value), kScoreEpsilon);
  return {-rel * rel, ref.value, ref.timestamp};
}

ConsistencyScore consistency_score(const ExtractionCandidate &candidate,
                                   std::int64_t timestamp,
                                   const TimeSeriesStore &store) {
  return consistency_score(candidate.kind, candidate.symbol, candidate.value,
                           timestamp, store);
}

std::optional<ConsistencyScore> try_consistency_score(
    const ExtractionCandidate &candidate, std::int64_t timestamp,
    const TimeSeriesStore &store) {
  try {
    return consistency_score(candidate, timestamp, store);
  } catch (const UnknownSymbol &) {
    return std::nullopt;
  } catch (const NoHistory &) {
    return std::nullopt;
  }
}

int label_from_score(const ConsistencyScore &score, double tau) {
  return score.s >= tau ? 1 : 0;
}

}  // namespace tickx
