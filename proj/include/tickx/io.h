#ifndef TICKX_IO_H_
#define TICKX_IO_H_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "tickx/types.h"

namespace tickx {

using Json = nlohmann::json;

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, const std::string &data);

// One JSON object per non-empty line.
std::vector<Json> read_jsonl(const std::filesystem::path &path);
void write_jsonl(const std::filesystem::path &path,
                 const std::vector<Json> &rows);

Json span_to_json(const Span &span);
Span span_from_json(const Json &j);

// 64-bit FNV-1a over the bytes of a string, starting from a seeded basis.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0);

// SplitMix64 finalizer, used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace tickx

#endif  // TICKX_IO_H_
