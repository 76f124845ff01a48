#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "snlm/corpus.hpp"
#include "snlm/unigram.hpp"
#include "snlm/vocabulary_tree.hpp"
#include "snlm/word_classing.hpp"

namespace snlm {

// ceil(sqrt(|V|)).
int default_num_classes(std::size_t vocab_size);

// Words sorted by descending probability are cut into K contiguous bins of
// roughly equal mass. Zero-probability words join the last bin.
WordClassing frequency_binning(const UnigramDistribution& unigram, int num_classes);
// Same rule over unnormalised non-negative weights.
WordClassing frequency_binning(std::span<const double> weights, int num_classes);

struct BrownOptions {
  int num_classes = 2;
  int max_iterations = 20;
  // Held out of the K-way optimisation; placed into their best class at the
  // end. Defaults to <s> when empty and the vocabulary has one.
  std::vector<WordId> frozen = {kStartId};
};

struct BrownResult {
  WordClassing classing;
  // Objective after initialisation and after each sweep, over the clustered
  // words (frozen words in private classes).
  std::vector<double> objective_trace;
  int sweeps = 0;
  bool converged = false;
};

// Adjacent-pair counts: pairs (context[0], target) of each instance.
struct BigramCounts {
  std::size_t num_words = 0;
  std::vector<std::vector<std::pair<WordId, std::uint64_t>>> successors;    // w -> (v, N(w,v))
  std::vector<std::vector<std::pair<WordId, std::uint64_t>>> predecessors;  // v -> (w, N(w,v))
  std::vector<std::uint64_t> left;   // N(w, .)
  std::vector<std::uint64_t> right;  // N(., w)
};

BigramCounts count_bigrams(std::span<const TrainingInstance> instances, std::size_t num_words);

// Class-bigram log-likelihood up to word terms:
// sum N(c,c') log N(c,c') - sum L(c) log L(c) - sum R(c) log R(c).
// `class_of` may use any non-negative labels.
double class_bigram_objective(const BigramCounts& counts, std::span<const int> class_of);

// Exchange algorithm over the class-bigram objective.
BrownResult brown_clustering_detailed(std::span<const TrainingInstance> instances, const Vocabulary& vocab,
                                      const BrownOptions& options);
WordClassing brown_clustering(std::span<const TrainingInstance> instances, const Vocabulary& vocab,
                              int num_classes, int max_iterations = 20);

// Huffman tree over per-word counts (zero counts are raised to 1). Ties are
// broken by creation order; the lighter subtree becomes the left child.
VocabularyTree huffman_tree(std::span<const std::uint64_t> counts);

}  // namespace snlm
