#include "snlm/unigram.hpp"

#include <cmath>

namespace snlm {

UnigramDistribution::UnigramDistribution(std::vector<double> probabilities)
    : probs_(std::move(probabilities)) {
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("unigram: probability outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error("unigram: probabilities do not sum to 1");
}

UnigramDistribution unigram_from_counts(std::span<const std::uint64_t> counts, double epsilon,
                                        std::optional<WordId> excluded) {
  if (epsilon < 0.0) throw Error("unigram: epsilon must be >= 0");
  double total = 0.0;
  std::size_t support = 0;
  for (std::size_t w = 0; w < counts.size(); ++w) {
    if (excluded && static_cast<WordId>(w) == *excluded) continue;
    total += static_cast<double>(counts[w]);
    ++support;
  }
  if (total <= 0.0) throw Error("unigram: zero total count");
  const double denom = total + epsilon * static_cast<double>(support);
  std::vector<double> probs(counts.size(), 0.0);
  for (std::size_t w = 0; w < counts.size(); ++w) {
    if (excluded && static_cast<WordId>(w) == *excluded) continue;
    probs[w] = (static_cast<double>(counts[w]) + epsilon) / denom;
  }
  return UnigramDistribution(std::move(probs));
}

UnigramDistribution unigram_distribution(const Vocabulary& vocab, double epsilon) {
  return unigram_from_counts(vocab.counts(), epsilon, kStartId);
}

}  // namespace snlm
