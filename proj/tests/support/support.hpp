#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "snlm/corpus.hpp"
#include "snlm/gradient.hpp"
#include "snlm/model.hpp"
#include "snlm/random.hpp"

namespace snlm::test {

// --- Models -----------------------------------------------------------------

struct ToyConfig {
  Regime regime = Regime::standard;
  std::size_t vocab_size = 12;
  int order = 3;
  int dim = 7;
  bool diagonal = true;
  int num_classes = 3;
  std::optional<WordId> start_symbol;
  std::uint64_t seed = 1;
  double scale = 0.5;
};

// Random partition with every class non-empty.
WordClassing random_classing(std::size_t vocab_size, int num_classes, Rng& rng);
// Huffman tree over random counts in [1, 50].
VocabularyTree random_tree(std::size_t vocab_size, Rng& rng);

// 64-bit model with the structure its regime needs and Gaussian parameters.
Model64 random_model(const ToyConfig& toy);
void randomize(BasicParameters<double>& params, Rng& rng, double scale);
std::vector<WordId> random_context(const Model64& model, Rng& rng);
Instances random_batch(const Model64& model, std::size_t size, Rng& rng);

// --- Reference computations (plain loops, no model code) ---------------------

std::vector<double> reference_projection(const Model64& model, std::span<const WordId> context);
double reference_phi(const Model64& model, const std::vector<double>& p, WordId w);
double reference_psi(const Model64& model, const std::vector<double>& p, int unit);
// P(w|h) for every id, enumerated from the definitions of each regime.
std::vector<double> reference_distribution(const Model64& model, std::span<const WordId> context);
double reference_log_likelihood(const Model64& model, std::span<const TrainingInstance> batch);

// --- Finite differences --------------------------------------------------------

struct FamilyError {
  std::string family;
  std::size_t entries = 0;
  double max_rel_error = 0.0;
  double max_abs_gradient = 0.0;
};

// |a - n| / max(|a|, |n|, floor). The floor only matters where both gradients
// are at round-off level.
inline constexpr double kFdFloor = 1e-6;
double relative_error(double analytic, double numeric, double floor = kFdFloor);

// Central differences of `objective` around model's current parameters,
// compared entry by entry with `analytic` (same shapes).
std::vector<FamilyError> finite_difference_check(Model64& model, const BasicParameters<double>& analytic,
                                                 const std::function<double()>& objective, double step = 1e-5);
// Same central differences, returned as one flat vector in family order.
std::vector<double> numeric_gradient(Model64& model, const std::function<double()>& objective, double step = 1e-5);
std::vector<double> flatten(const BasicParameters<double>& params);
double cosine(const std::vector<double>& a, const std::vector<double>& b);

// --- Corpora -------------------------------------------------------------------

// Sentences over `num_words` word types ("w0".."w{n-1}") with Markov structure:
// each word prefers a few successors, otherwise a Zipfian unigram draw.
std::vector<Sentence> synthetic_corpus(std::size_t num_words, std::size_t num_tokens, std::uint64_t seed);
// "(a|b) X (c|d) Y", one sentence per repetition, with a:b = 3:2 and c:d = 3:7.
std::vector<Sentence> template_corpus(std::size_t repetitions = 500);
std::size_t token_count(const std::vector<Sentence>& corpus);

// Class-bigram log-likelihood sum N(c,c') log(N(c,c') / (L(c) R(c'))) over adjacent
// pairs with <s>/</s> padding. Words missing from `class_of` are singletons.
double template_objective(const std::vector<Sentence>& corpus, const std::map<std::string, int>& class_of);

// --- Huffman -------------------------------------------------------------------

// Minimum weighted path length over all strict binary trees, by trying every
// merge order.
std::uint64_t brute_force_min_wpl(std::vector<std::uint64_t> counts);

std::string temp_path(const std::string& name);

}  // namespace snlm::test
