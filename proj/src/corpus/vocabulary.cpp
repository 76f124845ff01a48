#include "snlm/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "snlm/corpus.hpp"

namespace snlm {

Vocabulary::Vocabulary() {
  add(kUnkToken);
  add(kStartToken);
  add(kEndToken);
}

WordId Vocabulary::add(std::string_view token, std::uint64_t count) {
  std::string key(token);
  if (key.empty()) throw Error("vocabulary: empty token");
  if (ids_.contains(key)) throw Error("vocabulary: duplicate token '" + key + "'");
  const auto id = static_cast<WordId>(tokens_.size());
  ids_.emplace(key, id);
  tokens_.push_back(std::move(key));
  counts_.push_back(count);
  return id;
}

std::optional<WordId> Vocabulary::find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

WordId Vocabulary::id_or_unk(std::string_view token) const {
  return find(token).value_or(kUnkId);
}

std::uint64_t Vocabulary::total_count() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::size_t Vocabulary::string_bytes() const {
  std::size_t bytes = 0;
  for (const auto& t : tokens_) bytes += t.size();
  return bytes;
}

void Vocabulary::write(std::ostream& out) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << counts_[i] << '\n';
}

Vocabulary Vocabulary::read(std::istream& in) {
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw Error("vocabulary line " + std::to_string(line_no) + ": expected token<TAB>count");
    const std::string token = line.substr(0, tab);
    std::uint64_t count = 0;
    try {
      std::size_t used = 0;
      count = std::stoull(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error("vocabulary line " + std::to_string(line_no) + ": bad count");
    }
    const std::size_t id = line_no - 1;
    if (id < 3) {
      if (vocab.token(static_cast<WordId>(id)) != token)
        throw Error("vocabulary line " + std::to_string(line_no) + ": expected special token '" +
                    vocab.token(static_cast<WordId>(id)) + "'");
      vocab.set_count(static_cast<WordId>(id), count);
    } else {
      if (vocab.size() != id)
        throw Error("vocabulary line " + std::to_string(line_no) + ": ids must be dense");
      vocab.add(token, count);
    }
  }
  return vocab;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write(out);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  return read(in);
}

Vocabulary build_vocabulary(std::istream& corpus, const VocabularyOptions& options) {
  if (options.min_count < 1) throw Error("min_count must be >= 1");

  struct Entry {
    std::uint64_t count = 0;
    std::size_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> entries;
  std::vector<std::string> order;
  std::uint64_t sentences = 0, tokens = 0;

  std::string line;
  while (std::getline(corpus, line)) {
    ++sentences;
    for (auto& tok : split_tokens(line)) {
      ++tokens;
      auto [it, inserted] = entries.try_emplace(tok, Entry{0, order.size()});
      if (inserted) order.push_back(tok);
      ++it->second.count;
    }
  }
  if (tokens == 0) throw Error("empty corpus");

  Vocabulary vocab;
  std::uint64_t unk = 0;
  std::vector<const std::string*> kept;
  for (const auto& tok : order) {
    const Entry& e = entries.at(tok);
    if (tok == kStartToken) {
      // <s> is never a prediction target.
      unk += e.count;
    } else if (vocab.find(tok)) {
      // Literal <unk> and </s> in the text are counted under their own id.
      const WordId id = *vocab.find(tok);
      vocab.set_count(id, vocab.count(id) + e.count);
    } else if (e.count >= options.min_count) {
      kept.push_back(&tok);
    } else {
      unk += e.count;
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [&](const std::string* a, const std::string* b) {
    return entries.at(*a).count > entries.at(*b).count;
  });
  if (options.max_size && kept.size() > *options.max_size) {
    for (std::size_t i = *options.max_size; i < kept.size(); ++i) unk += entries.at(*kept[i]).count;
    kept.resize(*options.max_size);
  }
  for (const auto* tok : kept) vocab.add(*tok, entries.at(*tok).count);
  vocab.set_count(kUnkId, vocab.count(kUnkId) + unk);
  vocab.set_count(kEndId, vocab.count(kEndId) + sentences);
  return vocab;
}

Vocabulary build_vocabulary(const std::string& corpus_path, const VocabularyOptions& options) {
  std::ifstream in(corpus_path);
  if (!in) throw Error("cannot read corpus " + corpus_path);
  return build_vocabulary(in, options);
}

}  // namespace snlm
