#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "snlm/common.hpp"
#include "snlm/vocabulary.hpp"

namespace snlm {

using Sentence = std::vector<std::string>;
using EncodedSentence = std::vector<WordId>;

// Context is ordered most recent word first: context[0] = w_{i-1}.
struct TrainingInstance {
  std::vector<WordId> context;
  WordId target = kUnkId;

  bool operator==(const TrainingInstance&) const = default;
};

using Instances = std::vector<TrainingInstance>;

std::vector<Sentence> read_sentences(std::istream& in);
std::vector<Sentence> read_sentences(const std::string& path);

Sentence split_tokens(std::string_view line);
EncodedSentence encode(const Sentence& sentence, const Vocabulary& vocab);

// One instance per token plus a final </s> prediction. Contexts are padded
// with <s>; unknown tokens map to <unk>.
Instances extract_instances(const Sentence& sentence, const Vocabulary& vocab, int order);
Instances extract_instances(std::span<const WordId> sentence, int order);

// All instances of a corpus, sentence by sentence.
Instances extract_instances(const std::vector<Sentence>& corpus, const Vocabulary& vocab, int order);

}  // namespace snlm
