#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "snlm/common.hpp"

namespace snlm {

inline constexpr WordId kUnkId = 0;
inline constexpr WordId kStartId = 1;
inline constexpr WordId kEndId = 2;

inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kStartToken = "<s>";
inline constexpr std::string_view kEndToken = "</s>";

// Dense token <-> id bijection with per-id counts. Ids 0, 1, 2 are always
// <unk>, <s>, </s>.
class Vocabulary {
 public:
  // Only the three special tokens, all with count 0.
  Vocabulary();

  // Appends a new token. Throws if the token already exists.
  WordId add(std::string_view token, std::uint64_t count = 0);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(WordId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::uint64_t count(WordId id) const { return counts_.at(static_cast<std::size_t>(id)); }
  void set_count(WordId id, std::uint64_t c) { counts_.at(static_cast<std::size_t>(id)) = c; }

  std::optional<WordId> find(std::string_view token) const;
  // Maps out-of-vocabulary tokens to <unk>.
  WordId id_or_unk(std::string_view token) const;

  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t total_count() const;
  // Sum of token byte lengths.
  std::size_t string_bytes() const;

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && counts_ == other.counts_;
  }

  // One `token<TAB>count` per line; line number is the id.
  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in);
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, WordId> ids_;
};

struct VocabularyOptions {
  std::uint64_t min_count = 1;
  std::optional<std::size_t> max_size;
};

// Counts whitespace-separated tokens. Tokens below min_count, or beyond the
// max_size most frequent, are folded into <unk>. </s> is counted once per
// sentence, so the counts sum to the number of prediction events.
Vocabulary build_vocabulary(std::istream& corpus, const VocabularyOptions& options = {});
Vocabulary build_vocabulary(const std::string& corpus_path, const VocabularyOptions& options = {});

}  // namespace snlm
