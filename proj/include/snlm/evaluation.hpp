#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "snlm/corpus.hpp"
#include "snlm/model.hpp"
#include "snlm/vocabulary.hpp"

namespace snlm {

struct EvaluationReport {
  std::size_t sentences = 0;
  std::size_t token_count = 0;  // scored predictions, </s> included
  double total_log_prob = 0.0;  // natural log
  double perplexity = 0.0;
  std::size_t oov_count = 0;    // <unk> targets
  double seconds = 0.0;
  double queries_per_second = 0.0;
  double macs_per_query = 0.0;
};

// Sum of doubles by recursive halving; the result depends only on the order
// of the input, not on how the inputs were produced.
double pairwise_sum(std::span<const double> values);

// Per-token perplexity under the normalised regime. Sentences are sharded
// across `threads` readers; the reduction order is fixed.
template <typename Real>
EvaluationReport perplexity(const BasicModel<Real>& model, const std::vector<Sentence>& corpus, const Vocabulary& vocab,
                            int threads = 1);

enum class ScoreMode { normalised, unnormalised };

// Total log-probability of a sentence (or sum of raw phi when unnormalised).
template <typename Real>
double score_sentence(const BasicModel<Real>& model, const Sentence& sentence, const Vocabulary& vocab, ScoreMode mode);

struct NbestEntry {
  std::size_t line = 0;
  std::string sent_id;
  std::string hypothesis;
  std::vector<std::string> passthrough;  // fields after the hypothesis
  double score = 0.0;
};

struct NbestResult {
  std::vector<NbestEntry> entries;
  std::vector<std::string> errors;  // "line N: ..." for malformed lines
};

// `sent_id ||| hypothesis ||| features` lines; entries keep input order.
template <typename Real>
NbestResult score_nbest(const BasicModel<Real>& model, std::istream& nbest, const Vocabulary& vocab, ScoreMode mode);

// Input line with ` ||| score` appended.
void write_nbest(std::ostream& out, const NbestResult& result);

struct MemoryEstimate {
  std::uint64_t embeddings = 0;    // Q and R
  std::uint64_t biases = 0;        // b
  std::uint64_t contexts = 0;      // C_1..C_{n-1}
  std::uint64_t output_units = 0;  // S and t
  std::uint64_t parameter_count = 0;
  std::uint64_t payload_bytes = 0;  // 4 bytes per parameter
  std::uint64_t string_bytes = 0;
  std::uint64_t bytes = 0;          // payload + strings
};

// `units` is K for the class regime and ignored otherwise.
MemoryEstimate memory_estimate(const ModelConfig& config, std::size_t vocab_size, std::size_t units,
                               std::size_t string_bytes = 0);
template <typename Real>
MemoryEstimate memory_estimate(const BasicModel<Real>& model, const Vocabulary& vocab);

struct BenchmarkResult {
  std::string mode;  // regime name or "unnormalised"
  std::size_t queries = 0;
  double seconds = 0.0;
  double queries_per_second = 0.0;
  double projection_macs_per_query = 0.0;
  double output_macs_per_query = 0.0;
  double macs_per_query() const { return projection_macs_per_query + output_macs_per_query; }
};

// Times `repeats` passes over the queries with the model's normalised regime
// and with unnormalised scoring.
template <typename Real>
std::vector<BenchmarkResult> query_benchmark(const BasicModel<Real>& model, std::span<const TrainingInstance> queries,
                                             int repeats = 1);

}  // namespace snlm
