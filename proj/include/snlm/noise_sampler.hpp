#pragma once

#include <optional>
#include <span>
#include <vector>

#include "snlm/common.hpp"
#include "snlm/model.hpp"
#include "snlm/random.hpp"
#include "snlm/unigram.hpp"

namespace snlm {

// Walker/Vose alias table: O(n) construction, O(1) sampling.
class AliasSampler {
 public:
  AliasSampler() = default;
  // Non-negative weights with a positive sum; normalised internally.
  explicit AliasSampler(std::span<const double> weights);

  std::size_t size() const { return prob_.size(); }
  bool empty() const { return prob_.empty(); }
  double probability(std::size_t i) const { return p_[i]; }
  std::size_t sample(Rng& rng) const;

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
  std::vector<double> p_;
};

// Noise distributions for NCE: word unigram, class unigram and the
// renormalised unigram inside each class.
class NoiseSampler {
 public:
  NoiseSampler() = default;
  explicit NoiseSampler(const UnigramDistribution& unigram);
  // Adds the class-level samplers; classes without mass get no sampler.
  NoiseSampler(const UnigramDistribution& unigram, const WordClassing& classing);

  double word_probability(WordId w) const { return unigram_[static_cast<std::size_t>(w)]; }
  WordId sample_word(Rng& rng) const { return static_cast<WordId>(words_.sample(rng)); }

  bool has_classes() const { return !classes_.empty(); }
  double class_probability(ClassId c) const { return classes_.probability(static_cast<std::size_t>(c)); }
  ClassId sample_class(Rng& rng) const { return static_cast<ClassId>(classes_.sample(rng)); }
  // P_n(w | class(w)).
  double within_class_probability(WordId w) const { return within_prob_[static_cast<std::size_t>(w)]; }
  WordId sample_within_class(ClassId c, Rng& rng) const;
  // Words of class c with non-zero noise mass.
  std::size_t class_support(ClassId c) const { return within_words_[static_cast<std::size_t>(c)].size(); }

 private:
  std::vector<double> unigram_;
  AliasSampler words_;
  AliasSampler classes_;
  std::vector<AliasSampler> within_;
  std::vector<std::vector<WordId>> within_words_;
  std::vector<double> within_prob_;
};

}  // namespace snlm
