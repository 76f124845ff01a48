#include "snlm/noise_sampler.hpp"

#include <cmath>

namespace snlm {

AliasSampler::AliasSampler(std::span<const double> weights) {
  const std::size_t n = weights.size();
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("alias: weights must be finite and >= 0");
    total += w;
  }
  if (n == 0 || total <= 0.0) throw Error("alias: weights must have a positive sum");

  p_.resize(n);
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<std::size_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    p_[i] = weights[i] / total;
    scaled[i] = p_[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (std::size_t i : large) prob_[i] = 1.0, alias_[i] = i;
  for (std::size_t i : small) prob_[i] = p_[i] > 0.0 ? 1.0 : 0.0, alias_[i] = i;
  // A zero-mass bucket that kept itself as alias must never be returned.
  for (std::size_t i = 0; i < n; ++i)
    if (p_[i] == 0.0 && alias_[i] == i) {
      for (std::size_t j = 0; j < n; ++j)
        if (p_[j] > 0.0) {
          alias_[i] = j;
          prob_[i] = 0.0;
          break;
        }
    }
}

std::size_t AliasSampler::sample(Rng& rng) const {
  const std::size_t bucket = static_cast<std::size_t>(uniform_index(rng, prob_.size()));
  return uniform01(rng) < prob_[bucket] ? bucket : alias_[bucket];
}

NoiseSampler::NoiseSampler(const UnigramDistribution& unigram)
    : unigram_(unigram.probabilities()), words_(std::span<const double>(unigram_)) {}

NoiseSampler::NoiseSampler(const UnigramDistribution& unigram, const WordClassing& classing) : NoiseSampler(unigram) {
  if (classing.num_words() != unigram_.size()) throw Error("noise: classing and unigram sizes differ");
  const auto K = static_cast<std::size_t>(classing.num_classes());
  std::vector<double> class_mass(K, 0.0);
  for (std::size_t w = 0; w < unigram_.size(); ++w)
    class_mass[static_cast<std::size_t>(classing.class_of(static_cast<WordId>(w)))] += unigram_[w];
  classes_ = AliasSampler(class_mass);

  within_.resize(K);
  within_words_.resize(K);
  within_prob_.assign(unigram_.size(), 0.0);
  for (std::size_t c = 0; c < K; ++c) {
    if (class_mass[c] <= 0.0) continue;
    std::vector<double> weights;
    for (WordId w : classing.members(static_cast<ClassId>(c))) {
      const double p = unigram_[static_cast<std::size_t>(w)];
      if (p <= 0.0) continue;
      within_words_[c].push_back(w);
      weights.push_back(p);
      within_prob_[static_cast<std::size_t>(w)] = p / class_mass[c];
    }
    within_[c] = AliasSampler(weights);
  }
}

WordId NoiseSampler::sample_within_class(ClassId c, Rng& rng) const {
  const auto& sampler = within_.at(static_cast<std::size_t>(c));
  if (sampler.empty()) throw Error("noise: class " + std::to_string(c) + " has no noise mass");
  return within_words_[static_cast<std::size_t>(c)][sampler.sample(rng)];
}

}  // namespace snlm
