#include "snlm/corpus.hpp"

#include <fstream>
#include <istream>

namespace snlm {

Sentence split_tokens(std::string_view line) {
  Sentence out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<Sentence> read_sentences(std::istream& in) {
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(split_tokens(line));
  return out;
}

std::vector<Sentence> read_sentences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read corpus " + path);
  return read_sentences(in);
}

EncodedSentence encode(const Sentence& sentence, const Vocabulary& vocab) {
  EncodedSentence ids;
  ids.reserve(sentence.size());
  for (const auto& tok : sentence) {
    const WordId id = vocab.id_or_unk(tok);
    ids.push_back(id == kStartId ? kUnkId : id);
  }
  return ids;
}

Instances extract_instances(std::span<const WordId> sentence, int order) {
  if (order < 2) throw Error("n-gram order must be >= 2");
  const auto width = static_cast<std::size_t>(order - 1);
  Instances out;
  out.reserve(sentence.size() + 1);
  for (std::size_t i = 0; i <= sentence.size(); ++i) {
    TrainingInstance inst;
    inst.target = i < sentence.size() ? sentence[i] : kEndId;
    inst.context.resize(width, kStartId);
    for (std::size_t j = 0; j < width && j < i; ++j) inst.context[j] = sentence[i - 1 - j];
    out.push_back(std::move(inst));
  }
  return out;
}

Instances extract_instances(const Sentence& sentence, const Vocabulary& vocab, int order) {
  const auto ids = encode(sentence, vocab);
  return extract_instances(std::span<const WordId>(ids), order);
}

Instances extract_instances(const std::vector<Sentence>& corpus, const Vocabulary& vocab, int order) {
  Instances out;
  for (const auto& s : corpus) {
    auto part = extract_instances(s, vocab, order);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

}  // namespace snlm
