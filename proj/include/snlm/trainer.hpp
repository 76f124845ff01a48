#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "snlm/corpus.hpp"
#include "snlm/gradient.hpp"
#include "snlm/model.hpp"
#include "snlm/unigram.hpp"

namespace snlm {

enum class Algorithm { ml_sgd, nce };

std::string_view algorithm_name(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

struct TrainingConfig {
  Algorithm algorithm = Algorithm::nce;
  double learning_rate = 0.1;
  int minibatch_size = 64;
  int epochs = 10;
  double l2_strength = 1e-5;  // per example
  int noise_samples = 10;
  std::uint64_t rng_seed = 1;
  double validation_fraction = 0.05;
  double noise_epsilon = 0.0;

  void validate() const;
};

// Gaussian(0, 0.1) embeddings, biases at log unigram mass (add-one smoothed so
// they stay finite), diagonal contexts 1/(n-1) or identity/(n-1) for full ones.
template <typename Real>
void initialize_parameters(BasicModel<Real>& model, std::span<const std::uint64_t> counts, std::uint64_t seed);

struct EpochStats {
  int epoch = 0;
  double train_ppl = 0.0;
  double valid_ppl = 0.0;
  double learning_rate = 0.0;
  double seconds = 0.0;
  MacCounter macs;  // training passes only, not evaluation
  std::size_t output_rows_touched = 0;  // output-layer rows visited by updates
};

struct TrainingLog {
  double initial_valid_ppl = 0.0;
  std::vector<EpochStats> epochs;

  // `epoch<TAB>train_ppl<TAB>valid_ppl<TAB>lr<TAB>seconds` lines.
  void write(std::ostream& out) const;
};

// Counts of each target in the instances; used for the noise distribution.
std::vector<std::uint64_t> target_counts(std::span<const TrainingInstance> instances, std::size_t vocab_size);

// Shuffled minibatch gradient ascent. The learning rate halves whenever the
// validation perplexity gets worse; a validation perplexity above 10x the
// initial one aborts. Bit-reproducible for a given config.
TrainingLog train(Model& model, std::span<const TrainingInstance> train_set,
                  std::span<const TrainingInstance> valid_set, const TrainingConfig& config,
                  const std::function<void(const EpochStats&)>& on_epoch = {});

// exp(-mean log P) under the model's normalised regime.
template <typename Real>
double instance_perplexity(const BasicModel<Real>& model, std::span<const TrainingInstance> instances);

}  // namespace snlm
