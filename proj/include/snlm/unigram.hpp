#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "snlm/common.hpp"
#include "snlm/vocabulary.hpp"

namespace snlm {

// Per-word probabilities summing to one. Words outside the support have
// probability exactly 0.
class UnigramDistribution {
 public:
  UnigramDistribution() = default;
  explicit UnigramDistribution(std::vector<double> probabilities);

  std::size_t size() const { return probs_.size(); }
  double operator[](WordId w) const { return probs_[static_cast<std::size_t>(w)]; }
  const std::vector<double>& probabilities() const { return probs_; }

 private:
  std::vector<double> probs_;
};

// (count + epsilon) / (total + epsilon * |support|), where the support is every
// id except `excluded`. Throws when the smoothed total is zero.
UnigramDistribution unigram_from_counts(std::span<const std::uint64_t> counts, double epsilon = 0.0,
                                        std::optional<WordId> excluded = std::nullopt);

// Noise distribution over a vocabulary; <s> is never in the support.
UnigramDistribution unigram_distribution(const Vocabulary& vocab, double epsilon = 0.0);

}  // namespace snlm
