#ifndef TICKX_ENCODER_H_
#define TICKX_ENCODER_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "tickx/parser.h"
#include "tickx/types.h"

namespace tickx {

// Fixed 94-character vocabulary: [a-z][A-Z][0-9], 29 punctuation marks and
// space/tab/newline. Anything else maps to the out-of-vocabulary slot 94.
class CharVocabulary {
 public:
  static constexpr int kSize = 94;
  static constexpr int kOovIndex = 94;
  static constexpr int kOneHotDim = 95;

  CharVocabulary();

  int index(char c) const { return table_[static_cast<unsigned char>(c)]; }
  // Character at a vocabulary index; '\0' for the OOV slot.
  char character(int index) const;
  std::string_view characters() const { return chars_; }

 private:
  std::string chars_;
  std::array<std::uint8_t, 256> table_{};
};

const CharVocabulary &default_vocabulary();

// Layout of one per-character feature vector f_i:
//   [char one-hot (95) | any-entity indicators (5) | candidate roles (2)]
inline constexpr int kEntityBlockOffset = CharVocabulary::kOneHotDim;
inline constexpr int kRoleBlockOffset = kEntityBlockOffset + kNumEntityTypes;
inline constexpr int kCharFeatureDim = kRoleBlockOffset + 2;  // 102

inline constexpr int kDefaultSectionWidth = 200;
inline constexpr int kDefaultGlobalDim = 512;
inline constexpr int kDefaultNgramDim = 256;
inline constexpr std::uint64_t kDefaultHashSeed = 0x7469636b78ULL;

// Smallest window containing both spans, widened symmetrically to `width`
// characters where the document allows and clamped to [0, text_length).
// Throws SectionTooWide if the spans do not fit in `width`.
Span section_window(const Span &symbol_span, const Span &value_span,
                    int text_length, int width = kDefaultSectionWidth);

// Indicator bits packed per position; bit k of the mask maps to
// f_i[kEntityBlockOffset + k].
enum FeatureFlag : std::uint8_t {
  kFlagCandidateSymbol = 1u << kNumEntityTypes,
  kFlagCandidateValue = 1u << (kNumEntityTypes + 1),
};

// Compact per-character encoding of one candidate: vocabulary index plus an
// indicator bitmask per position. features() expands it to the dense
// kCharFeatureDim x T matrix the network consumes.
struct CharSequence {
  std::vector<std::uint8_t> chars;
  std::vector<std::uint8_t> flags;

  int length() const { return static_cast<int>(chars.size()); }
  Eigen::MatrixXd features() const;
  Eigen::SparseMatrix<double> sparse_features() const;
  Eigen::VectorXd feature(int position) const;
};

struct EncodedCandidate {
  std::string candidate_id;
  CharSequence sequence;
  Eigen::VectorXd global;  // g, binary, dimension G
  std::optional<int> label;

  int length() const { return sequence.length(); }
  Eigen::MatrixXd features() const { return sequence.features(); }
};

// One f_i per character of candidate.section_span.
CharSequence encode_characters(const Document &document,
                               const std::vector<EntitySpan> &entities,
                               const ExtractionCandidate &candidate,
                               const CharVocabulary &vocab);

// Hashed binary bag of lowercased whitespace-delimited unigrams and bigrams.
// Throws ConfigError unless dim is a power of two.
Eigen::VectorXd encode_global(std::string_view text, int dim,
                              std::uint64_t hash_seed);

// Hashed binary bag of entity-type unigrams and bigrams over the candidate's
// section, with the candidate's own entities marked. Input of the
// fully-connected n-gram baseline together with g.
Eigen::VectorXd encode_entity_ngrams(const std::vector<EntitySpan> &entities,
                                     const ExtractionCandidate &candidate,
                                     int dim, std::uint64_t hash_seed);

struct EncoderConfig {
  int section_width = kDefaultSectionWidth;
  int global_dim = kDefaultGlobalDim;
  std::uint64_t hash_seed = kDefaultHashSeed;
};

// g for one candidate: the document's bag plus a hashed token naming the
// relation kind, since ABS and REL candidates can share both spans.
Eigen::VectorXd candidate_global(const Eigen::VectorXd &document_global,
                                 const ExtractionCandidate &candidate,
                                 std::uint64_t hash_seed);

// `global` is the document-level bag from encode_global.
EncodedCandidate encode_candidate(const Document &document,
                                  const std::vector<EntitySpan> &entities,
                                  const ExtractionCandidate &candidate,
                                  const Eigen::VectorXd &global,
                                  std::uint64_t hash_seed,
                                  std::string candidate_id,
                                  std::optional<int> label = std::nullopt);

// Binary record file. Per record, little-endian:
//   u32 id length, id bytes, u8 label (255 = none), u32 sequence length T,
//   T x D float32 rows f_i, G float32 values of g.
// The JSON sidecar `<path>.json` stores D, G, the vocabulary and hash seed.
void write_encoded(const std::vector<EncodedCandidate> &records,
                   const EncoderConfig &config,
                   const std::filesystem::path &path);
std::vector<EncodedCandidate> read_encoded(const std::filesystem::path &path);

}  // namespace tickx

#endif  // TICKX_ENCODER_H_
