#include "snlm/evaluation.hpp"

#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>
#include <thread>

namespace snlm {

double pairwise_sum(std::span<const double> values) {
  if (values.empty()) return 0.0;
  if (values.size() == 1) return values[0];
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

template <typename Real>
EvaluationReport perplexity(const BasicModel<Real>& model, const std::vector<Sentence>& corpus, const Vocabulary& vocab,
                            int threads) {
  const int order = model.config().order;
  std::vector<double> sentence_lp(corpus.size(), 0.0);
  std::vector<std::size_t> tokens(corpus.size(), 0), oov(corpus.size(), 0);
  std::vector<MacCounter> macs(static_cast<std::size_t>(std::max(threads, 1)));

  auto work = [&](std::size_t shard, std::size_t shards) {
    for (std::size_t s = shard; s < corpus.size(); s += shards) {
      const auto instances = extract_instances(corpus[s], vocab, order);
      double lp = 0.0;
      for (const auto& inst : instances) {
        lp += static_cast<double>(model.log_prob(inst.context, inst.target, &macs[shard]));
        if (inst.target == kUnkId) ++oov[s];
      }
      sentence_lp[s] = lp;
      tokens[s] = instances.size();
    }
  };

  const auto start = std::chrono::steady_clock::now();
  const auto shards = macs.size();
  if (shards == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < shards; ++t) pool.emplace_back(work, t, shards);
    for (auto& th : pool) th.join();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  EvaluationReport report;
  report.sentences = corpus.size();
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    report.token_count += tokens[s];
    report.oov_count += oov[s];
  }
  if (report.token_count == 0) throw Error("perplexity: empty corpus");
  report.total_log_prob = pairwise_sum(sentence_lp);
  report.perplexity = std::exp(-report.total_log_prob / static_cast<double>(report.token_count));
  report.seconds = seconds;
  report.queries_per_second = seconds > 0.0 ? static_cast<double>(report.token_count) / seconds : 0.0;
  std::uint64_t total_macs = 0;
  for (const auto& m : macs) total_macs += m.total();
  report.macs_per_query = static_cast<double>(total_macs) / static_cast<double>(report.token_count);
  return report;
}

template <typename Real>
double score_sentence(const BasicModel<Real>& model, const Sentence& sentence, const Vocabulary& vocab, ScoreMode mode) {
  double total = 0.0;
  for (const auto& inst : extract_instances(sentence, vocab, model.config().order))
    total += static_cast<double>(mode == ScoreMode::normalised ? model.log_prob(inst.context, inst.target)
                                                               : model.unnormalised_log_score(inst.context, inst.target));
  return total;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find("|||", pos);
    if (next == std::string_view::npos) {
      fields.push_back(trim(line.substr(pos)));
      break;
    }
    fields.push_back(trim(line.substr(pos, next - pos)));
    pos = next + 3;
  }
  return fields;
}

}  // namespace

template <typename Real>
NbestResult score_nbest(const BasicModel<Real>& model, std::istream& nbest, const Vocabulary& vocab, ScoreMode mode) {
  NbestResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(nbest, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() < 2) {
      result.errors.push_back("line " + std::to_string(line_no) + ": expected 'sent_id ||| hypothesis ||| features'");
      continue;
    }
    if (fields[0].empty()) {
      result.errors.push_back("line " + std::to_string(line_no) + ": empty sentence id");
      continue;
    }
    NbestEntry entry;
    entry.line = line_no;
    entry.sent_id = fields[0];
    entry.hypothesis = fields[1];
    entry.passthrough.assign(fields.begin() + 2, fields.end());
    entry.score = score_sentence(model, split_tokens(entry.hypothesis), vocab, mode);
    result.entries.push_back(std::move(entry));
  }
  return result;
}

void write_nbest(std::ostream& out, const NbestResult& result) {
  const auto old_precision = out.precision(17);
  for (const auto& e : result.entries) {
    out << e.sent_id << " ||| " << e.hypothesis;
    for (const auto& f : e.passthrough) out << " ||| " << f;
    out << " ||| " << e.score << '\n';
  }
  out.precision(old_precision);
}

MemoryEstimate memory_estimate(const ModelConfig& config, std::size_t vocab_size, std::size_t units,
                               std::size_t string_bytes) {
  if (config.dim < 1) throw Error("memory: dimension must be >= 1");
  if (config.order < 2) throw Error("memory: order must be >= 2");
  const std::uint64_t V = vocab_size, D = static_cast<std::uint64_t>(config.dim);
  const std::uint64_t positions = static_cast<std::uint64_t>(config.order - 1);
  MemoryEstimate m;
  m.embeddings = 2 * V * D;
  m.biases = V;
  m.contexts = positions * (config.diagonal_contexts ? D : D * D);
  switch (config.regime) {
    case Regime::standard:
      break;
    case Regime::class_factored:
      m.output_units = units * (D + 1);
      break;
    case Regime::tree_factored:
      if (V < 2) throw Error("memory: a tree needs at least two words");
      m.output_units = (V - 1) * (D + 1);
      break;
  }
  m.parameter_count = m.embeddings + m.biases + m.contexts + m.output_units;
  m.payload_bytes = 4 * m.parameter_count;
  m.string_bytes = string_bytes;
  m.bytes = m.payload_bytes + m.string_bytes;
  return m;
}

template <typename Real>
MemoryEstimate memory_estimate(const BasicModel<Real>& model, const Vocabulary& vocab) {
  const std::size_t units = model.classing() ? static_cast<std::size_t>(model.classing()->num_classes()) : 0;
  return memory_estimate(model.config(), vocab.size(), units, vocab.string_bytes());
}

template <typename Real>
std::vector<BenchmarkResult> query_benchmark(const BasicModel<Real>& model, std::span<const TrainingInstance> queries,
                                             int repeats) {
  if (queries.empty()) throw Error("bench: no queries");
  repeats = std::max(repeats, 1);
  std::vector<BenchmarkResult> out;
  for (const bool normalised : {true, false}) {
    BenchmarkResult r;
    r.mode = normalised ? std::string(regime_name(model.config().regime)) : "unnormalised";
    MacCounter macs;
    volatile double sink = 0.0;
    const auto start = std::chrono::steady_clock::now();
    for (int rep = 0; rep < repeats; ++rep)
      for (const auto& q : queries)
        sink = sink + static_cast<double>(normalised ? model.log_prob(q.context, q.target, &macs)
                                                     : model.unnormalised_log_score(q.context, q.target, &macs));
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.queries = queries.size() * static_cast<std::size_t>(repeats);
    r.queries_per_second = r.seconds > 0.0 ? static_cast<double>(r.queries) / r.seconds : 0.0;
    r.projection_macs_per_query = static_cast<double>(macs.projection) / static_cast<double>(r.queries);
    r.output_macs_per_query = static_cast<double>(macs.output) / static_cast<double>(r.queries);
    out.push_back(r);
  }
  return out;
}

#define SNLM_INSTANTIATE(Real)                                                                                      \
  template EvaluationReport perplexity<Real>(const BasicModel<Real>&, const std::vector<Sentence>&,                 \
                                             const Vocabulary&, int);                                               \
  template double score_sentence<Real>(const BasicModel<Real>&, const Sentence&, const Vocabulary&, ScoreMode);    \
  template NbestResult score_nbest<Real>(const BasicModel<Real>&, std::istream&, const Vocabulary&, ScoreMode);    \
  template MemoryEstimate memory_estimate<Real>(const BasicModel<Real>&, const Vocabulary&);                        \
  template std::vector<BenchmarkResult> query_benchmark<Real>(const BasicModel<Real>&,                              \
                                                              std::span<const TrainingInstance>, int);

SNLM_INSTANTIATE(float)
SNLM_INSTANTIATE(double)

}  // namespace snlm
