#include <algorithm>
#include <cmath>
#include <numeric>

#include "snlm/partitioning.hpp"

namespace snlm {

int default_num_classes(std::size_t vocab_size) {
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(vocab_size))));
}

WordClassing frequency_binning(std::span<const double> weights, int num_classes) {
  std::vector<WordId> positive, zero;
  double total = 0.0;
  for (std::size_t w = 0; w < weights.size(); ++w) {
    if (!(weights[w] >= 0.0) || !std::isfinite(weights[w])) throw Error("binning: weights must be finite and >= 0");
    if (weights[w] > 0.0) {
      positive.push_back(static_cast<WordId>(w));
      total += weights[w];
    } else {
      zero.push_back(static_cast<WordId>(w));
    }
  }
  if (num_classes < 1) throw Error("binning: need at least one class");
  if (static_cast<std::size_t>(num_classes) > positive.size())
    throw Error("binning: " + std::to_string(num_classes) + " classes but only " + std::to_string(positive.size()) +
                " words with non-zero probability");
  std::stable_sort(positive.begin(), positive.end(),
                   [&](WordId a, WordId b) { return weights[static_cast<std::size_t>(a)] > weights[static_cast<std::size_t>(b)]; });

  std::vector<ClassId> class_of(weights.size(), num_classes - 1);
  const auto K = static_cast<std::size_t>(num_classes);
  std::size_t bin = 0;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < positive.size(); ++i) {
    class_of[static_cast<std::size_t>(positive[i])] = static_cast<ClassId>(bin);
    cumulative += weights[static_cast<std::size_t>(positive[i])];
    if (bin + 1 == K) continue;
    const std::size_t words_left = positive.size() - i - 1;
    const std::size_t bins_left = K - bin - 1;
    const bool reached = cumulative * static_cast<double>(K) >= static_cast<double>(bin + 1) * total * (1.0 - 1e-12);
    if (reached || words_left == bins_left) ++bin;
  }
  return WordClassing(std::move(class_of), num_classes);
}

WordClassing frequency_binning(const UnigramDistribution& unigram, int num_classes) {
  return frequency_binning(std::span<const double>(unigram.probabilities()), num_classes);
}

}  // namespace snlm
