#include "tickx/encoder.h"

#include <bit>
#include <cstring>

#include "tickx/errors.h"
#include "tickx/io.h"

namespace tickx {

CharVocabulary::CharVocabulary() {
  for (char c = 'a'; c <= 'z'; ++c) chars_ += c;
  for (char c = 'A'; c <= 'Z'; ++c) chars_ += c;
  for (char c = '0'; c <= '9'; ++c) chars_ += c;
  chars_ += ".,;:!?'\"%$#@&*()[]{}<>+-=/\\_^";
  chars_ += " \t\n";
  table_.fill(kOovIndex);
  for (std::size_t i = 0; i < chars_.size(); ++i) {
    table_[static_cast<unsigned char>(chars_[i])] = static_cast<std::uint8_t>(i);
  }
}

char CharVocabulary::character(int index) const {
  if (index < 0 || index >= kSize) return '\0';
  return chars_[index];
}

const CharVocabulary &default_vocabulary() {
  static const CharVocabulary vocab;
  return vocab;
}

Span section_window(const Span &symbol_span, const Span &value_span,
                    int text_length, int width) {
  const Span u = span_union(symbol_span, value_span);
  if (u.length() > width) {
    throw SectionTooWide("candidate spans " + std::to_string(u.length()) +
                         " characters, section width is " +
                         std::to_string(width));
  }
  int start = u.start - (width - u.length()) / 2;
  int end = start + width;
  if (start < 0) {
    start = 0;
    end = width;
  }
  if (end > text_length) {
    end = text_length;
    start = std::max(0, text_length - width);
  }
  return {start, end};
}

Eigen::MatrixXd CharSequence::features() const {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(kCharFeatureDim, length());
  for (int t = 0; t < length(); ++t) {
    x(chars[t], t) = 1.0;
    for (int k = 0; k < kNumEntityTypes + 2; ++k) {
      if (flags[t] & (1u << k)) x(kEntityBlockOffset + k, t) = 1.0;
    }
  }
  return x;
}

Eigen::SparseMatrix<double> CharSequence::sparse_features() const {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(chars.size() * 2);
  for (int t = 0; t < length(); ++t) {
    entries.emplace_back(chars[t], t, 1.0);
    for (int k = 0; k < kNumEntityTypes + 2; ++k) {
      if (flags[t] & (1u << k)) entries.emplace_back(kEntityBlockOffset + k, t, 1.0);
    }
  }
  Eigen::SparseMatrix<double> x(kCharFeatureDim, length());
  x.setFromTriplets(entries.begin(), entries.end());
  return x;
}

Eigen::VectorXd CharSequence::feature(int position) const {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(kCharFeatureDim);
  f(chars.at(position)) = 1.0;
  for (int k = 0; k < kNumEntityTypes + 2; ++k) {
    if (flags[position] & (1u << k)) f(kEntityBlockOffset + k) = 1.0;
  }
  return f;
}

CharSequence encode_characters(const Document &document,
                               const std::vector<EntitySpan> &entities,
                               const ExtractionCandidate &candidate,
                               const CharVocabulary &vocab) {
  const Span section = candidate.section_span;
  CharSequence seq;
  seq.chars.resize(section.length());
  seq.flags.assign(section.length(), 0);
  for (int p = section.start; p < section.end; ++p) {
    seq.chars[p - section.start] =
        static_cast<std::uint8_t>(vocab.index(document.text[p]));
  }
  auto mark = [&](const Span &span, std::uint8_t bit) {
    const int lo = std::max(span.start, section.start);
    const int hi = std::min(span.end, section.end);
    for (int p = lo; p < hi; ++p) seq.flags[p - section.start] |= bit;
  };
  for (const auto &e : entities) {
    mark(e.span, static_cast<std::uint8_t>(1u << static_cast<int>(e.type)));
  }
  mark(candidate.symbol_span, kFlagCandidateSymbol);
  mark(candidate.value_span, kFlagCandidateValue);
  return seq;
}

namespace {

void check_power_of_two(int dim) {
  if (dim <= 0 || (dim & (dim - 1)) != 0) {
    throw ConfigError("hashed feature dimension must be a power of two, got " +
                      std::to_string(dim));
  }
}

std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

void hash_ngrams(const std::vector<std::string> &tokens, std::uint64_t seed,
                 Eigen::VectorXd &out) {
  const std::uint64_t mask = static_cast<std::uint64_t>(out.size()) - 1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out(fnv1a("1\x1f" + tokens[i], seed) & mask) = 1.0;
    if (i + 1 < tokens.size()) {
      out(fnv1a("2\x1f" + tokens[i] + "\x1f" + tokens[i + 1], seed) & mask) =
          1.0;
    }
  }
}

}  // namespace

Eigen::VectorXd encode_global(std::string_view text, int dim,
                              std::uint64_t hash_seed) {
  check_power_of_two(dim);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
  hash_ngrams(whitespace_tokens(text), hash_seed, g);
  return g;
}

Eigen::VectorXd encode_entity_ngrams(const std::vector<EntitySpan> &entities,
                                     const ExtractionCandidate &candidate,
                                     int dim, std::uint64_t hash_seed) {
  check_power_of_two(dim);
  // One token per distinct entity span in the section, e.g. "NUMERIC_VALUE"
  // or "C:NUMERIC_VALUE+CHANGE_VALUE" for the candidate's own value.
  std::vector<std::string> tokens{"<s>"};
  Span last{-1, -1};
  for (const auto &e : entities) {
    if (!candidate.section_span.overlaps(e.span)) continue;
    const bool own = e.span == candidate.symbol_span ||
                     e.span == candidate.value_span;
    if (e.span == last) {
      tokens.back() += "+";
      tokens.back() += to_string(e.type);
      continue;
    }
    tokens.push_back(std::string(own ? "C:" : "") + std::string(to_string(e.type)));
    last = e.span;
  }
  tokens.push_back("</s>");
  tokens.push_back(std::string("KIND:") + std::string(to_string(candidate.kind)));
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  hash_ngrams(tokens, hash_seed ^ 0x6e6772616dULL, v);
  return v;
}

Eigen::VectorXd candidate_global(const Eigen::VectorXd &document_global,
                                 const ExtractionCandidate &candidate,
                                 std::uint64_t hash_seed) {
  check_power_of_two(static_cast<int>(document_global.size()));
  Eigen::VectorXd g = document_global;
  const std::uint64_t mask = static_cast<std::uint64_t>(g.size()) - 1;
  g(fnv1a(std::string("K\x1f") + std::string(to_string(candidate.kind)), hash_seed) & mask) = 1.0;
  return g;
}

EncodedCandidate encode_candidate(const Document &document,
                                  const std::vector<EntitySpan> &entities,
                                  const ExtractionCandidate &candidate,
                                  const Eigen::VectorXd &global,
                                  std::uint64_t hash_seed,
                                  std::string candidate_id,
                                  std::optional<int> label) {
  EncodedCandidate enc;
  enc.candidate_id = std::move(candidate_id);
  enc.sequence =
      encode_characters(document, entities, candidate, default_vocabulary());
  enc.global = candidate_global(global, candidate, hash_seed);
  enc.label = label;
  return enc;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "record files are written in host byte order");

template <typename T>
void put(std::string &out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string &in, std::size_t &pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("truncated record file");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

void write_encoded(const std::vector<EncodedCandidate> &records,
                   const EncoderConfig &config,
                   const std::filesystem::path &path) {
  std::string out;
  for (const auto &r : records) {
    if (r.global.size() != config.global_dim) {
      throw DimensionMismatch("record " + r.candidate_id +
                              " has global dimension " +
                              std::to_string(r.global.size()));
    }
    put<std::uint32_t>(out, static_cast<std::uint32_t>(r.candidate_id.size()));
    out += r.candidate_id;
    put<std::uint8_t>(out, r.label ? static_cast<std::uint8_t>(*r.label) : 255);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(r.length()));
    for (int t = 0; t < r.length(); ++t) {
      const Eigen::VectorXd f = r.sequence.feature(t);
      for (int d = 0; d < kCharFeatureDim; ++d) put<float>(out, static_cast<float>(f(d)));
    }
    for (int k = 0; k < r.global.size(); ++k) put<float>(out, static_cast<float>(r.global(k)));
  }
  write_file(path, out);

  Json sidecar = {{"D", kCharFeatureDim},
                  {"G", config.global_dim},
                  {"vocabulary", std::string(default_vocabulary().characters())},
                  {"oov_index", CharVocabulary::kOovIndex},
                  {"hash_seed", config.hash_seed},
                  {"section_width", config.section_width},
                  {"records", records.size()}};
  write_file(path.string() + ".json", sidecar.dump(2) + "\n");
}

std::vector<EncodedCandidate> read_encoded(const std::filesystem::path &path) {
  const Json sidecar = Json::parse(read_file(path.string() + ".json"));
  const int dim = sidecar.at("D").get<int>();
  const int global_dim = sidecar.at("G").get<int>();
  if (dim != kCharFeatureDim) {
    throw DimensionMismatch("record file has D=" + std::to_string(dim));
  }
  const std::string data = read_file(path);
  std::vector<EncodedCandidate> records;
  std::size_t pos = 0;
  while (pos < data.size()) {
    EncodedCandidate r;
    const auto id_len = take<std::uint32_t>(data, pos);
    if (pos + id_len > data.size()) throw IoError("truncated record file");
    r.candidate_id = data.substr(pos, id_len);
    pos += id_len;
    const auto label = take<std::uint8_t>(data, pos);
    if (label != 255) r.label = label;
    const auto steps = take<std::uint32_t>(data, pos);
    r.sequence.chars.resize(steps);
    r.sequence.flags.assign(steps, 0);
    for (std::uint32_t t = 0; t < steps; ++t) {
      for (int d = 0; d < dim; ++d) {
        const float v = take<float>(data, pos);
        if (v == 0.0f) continue;
        if (d < CharVocabulary::kOneHotDim) {
          r.sequence.chars[t] = static_cast<std::uint8_t>(d);
        } else {
          r.sequence.flags[t] |=
              static_cast<std::uint8_t>(1u << (d - kEntityBlockOffset));
        }
      }
    }
    r.global.resize(global_dim);
    for (int k = 0; k < global_dim; ++k) r.global(k) = take<float>(data, pos);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace tickx
