#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "snlm/model.hpp"
#include "snlm/vocabulary.hpp"

namespace snlm {

inline constexpr char kModelMagic[4] = {'S', 'N', 'L', 'M'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

// A model together with the vocabulary it was trained on.
struct LanguageModel {
  Vocabulary vocab;
  Model model;
};

struct ModelFileLayout {
  std::uint64_t header_bytes = 0;   // magic, version, config, vocabulary, partition
  std::uint64_t payload_bytes = 0;  // parameters only
  std::uint64_t total() const { return header_bytes + payload_bytes; }
};

// Little-endian binary layout:
//   "SNLM" | u32 version | config | vocabulary | partition or tree | u64 payload
//   bytes | f32 parameters in order Q, R, b, C_1..C_{n-1}, S, t.
ModelFileLayout write_model(std::ostream& out, const Vocabulary& vocab, const Model& model);
LanguageModel read_model(std::istream& in);

ModelFileLayout save_model(const std::string& path, const Vocabulary& vocab, const Model& model);
LanguageModel load_model(const std::string& path);

// Model bound to a vocabulary: <s> excluded from prediction, shapes from the
// config and the optional structure.
Model make_model(const ModelConfig& config, const Vocabulary& vocab,
                 std::shared_ptr<const WordClassing> classing = nullptr,
                 std::shared_ptr<const VocabularyTree> tree = nullptr);

}  // namespace snlm
