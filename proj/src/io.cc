#include "tickx/io.h"

#include <fstream>
#include <sstream>

#include "tickx/errors.h"

namespace tickx {

std::string_view to_string(RelationKind kind) {
  return kind == RelationKind::kTickAbs ? "TICK_ABS" : "TICK_REL";
}

RelationKind relation_kind_from_string(std::string_view name) {
  if (name == "TICK_ABS") return RelationKind::kTickAbs;
  if (name == "TICK_REL") return RelationKind::kTickRel;
  throw ConfigError("unknown relation kind: " + std::string(name));
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path &path, const std::string &data) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Json> read_jsonl(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Json> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(Json::parse(line));
    } catch (const Json::parse_error &e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " +
                    e.what());
    }
  }
  return rows;
}

void write_jsonl(const std::filesystem::path &path,
                 const std::vector<Json> &rows) {
  std::string out;
  for (const auto &row : rows) {
    out += row.dump();
    out += '\n';
  }
  write_file(path, out);
}

Json span_to_json(const Span &span) { return Json::array({span.start, span.end}); }

Span span_from_json(const Json &j) {
  if (!j.is_array() || j.size() != 2) throw IoError("span must be [start, end]");
  return {j[0].get<int>(), j[1].get<int>()};
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix_seed(seed, 0);
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace tickx
