#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "snlm/partitioning.hpp"

namespace snlm {
namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Dense class-level statistics for the exchange algorithm. Labels [0, K) are
// the optimised classes; frozen words sit in private labels above K.
class ExchangeState {
 public:
  ExchangeState(const BigramCounts& counts, std::vector<int> label, std::size_t num_labels)
      : counts_(counts), label_(std::move(label)), L_(num_labels, 0.0), R_(num_labels, 0.0),
        N_(num_labels * num_labels, 0.0), size_(num_labels, 0), out_(num_labels, 0.0), in_(num_labels, 0.0),
        marked_(num_labels, 0), num_labels_(num_labels) {
    for (std::size_t w = 0; w < counts.num_words; ++w) {
      const auto a = static_cast<std::size_t>(label_[w]);
      ++size_[a];
      L_[a] += static_cast<double>(counts.left[w]);
      R_[a] += static_cast<double>(counts.right[w]);
      for (const auto& [v, n] : counts.successors[w]) cell(a, static_cast<std::size_t>(label_[static_cast<std::size_t>(v)])) += static_cast<double>(n);
    }
  }

  double objective() const {
    double f = 0.0;
    for (double n : N_) f += xlogx(n);
    for (std::size_t c = 0; c < num_labels_; ++c) f -= xlogx(L_[c]) + xlogx(R_[c]);
    return f;
  }

  int label(WordId w) const { return label_[static_cast<std::size_t>(w)]; }
  int size(int c) const { return size_[static_cast<std::size_t>(c)]; }

  // Takes w out of its class and caches its class-level neighbourhood.
  void remove(WordId w) {
    gather(w);
    apply(w, label(w), -1.0);
    --size_[static_cast<std::size_t>(label(w))];
    label_[static_cast<std::size_t>(w)] = -1;
  }

  // Objective change of inserting the removed word into class c.
  double gain(WordId w, int c) const {
    const auto uc = static_cast<std::size_t>(c);
    double g = 0.0;
    for (std::size_t d : touched_) {
      if (d == uc) continue;
      if (out_[d] > 0.0) g += xlogx(cell(uc, d) + out_[d]) - xlogx(cell(uc, d));
      if (in_[d] > 0.0) g += xlogx(cell(d, uc) + in_[d]) - xlogx(cell(d, uc));
    }
    const double diag = out_[uc] + in_[uc] + self_;
    if (diag > 0.0) g += xlogx(cell(uc, uc) + diag) - xlogx(cell(uc, uc));
    const double lw = static_cast<double>(counts_.left[static_cast<std::size_t>(w)]);
    const double rw = static_cast<double>(counts_.right[static_cast<std::size_t>(w)]);
    g -= xlogx(L_[uc] + lw) - xlogx(L_[uc]);
    g -= xlogx(R_[uc] + rw) - xlogx(R_[uc]);
    return g;
  }

  void insert(WordId w, int c) {
    apply(w, c, 1.0);
    ++size_[static_cast<std::size_t>(c)];
    label_[static_cast<std::size_t>(w)] = c;
  }

  const std::vector<int>& labels() const { return label_; }

 private:
  double& cell(std::size_t a, std::size_t b) { return N_[a * num_labels_ + b]; }
  double cell(std::size_t a, std::size_t b) const { return N_[a * num_labels_ + b]; }

  void gather(WordId w) {
    for (std::size_t d : touched_) {
      out_[d] = in_[d] = 0.0;
      marked_[d] = 0;
    }
    touched_.clear();
    self_ = 0.0;
    auto touch = [&](std::size_t d) {
      if (!marked_[d]) {
        marked_[d] = 1;
        touched_.push_back(d);
      }
    };
    for (const auto& [v, n] : counts_.successors[static_cast<std::size_t>(w)]) {
      if (v == w) {
        self_ += static_cast<double>(n);
        continue;
      }
      const auto d = static_cast<std::size_t>(label(v));
      touch(d);
      out_[d] += static_cast<double>(n);
    }
    for (const auto& [v, n] : counts_.predecessors[static_cast<std::size_t>(w)]) {
      if (v == w) continue;
      const auto d = static_cast<std::size_t>(label(v));
      touch(d);
      in_[d] += static_cast<double>(n);
    }
  }

  void apply(WordId w, int c, double sign) {
    const auto uc = static_cast<std::size_t>(c);
    for (std::size_t d : touched_) {
      cell(uc, d) += sign * out_[d];
      cell(d, uc) += sign * in_[d];
    }
    cell(uc, uc) += sign * self_;
    L_[uc] += sign * static_cast<double>(counts_.left[static_cast<std::size_t>(w)]);
    R_[uc] += sign * static_cast<double>(counts_.right[static_cast<std::size_t>(w)]);
  }

  const BigramCounts& counts_;
  std::vector<int> label_;
  std::vector<double> L_, R_, N_;
  std::vector<int> size_;
  std::vector<double> out_, in_;
  std::vector<std::size_t> touched_;
  std::vector<char> marked_;
  double self_ = 0.0;
  std::size_t num_labels_;
};

int best_class(const ExchangeState& state, WordId w, int num_classes, int current) {
  int best = current >= 0 ? current : 0;
  double best_gain = state.gain(w, best);
  for (int c = 0; c < num_classes; ++c) {
    if (c == best) continue;
    const double g = state.gain(w, c);
    if (g > best_gain + 1e-9 * std::max(1.0, std::abs(best_gain))) {
      best = c;
      best_gain = g;
    }
  }
  return best;
}

}  // namespace

BigramCounts count_bigrams(std::span<const TrainingInstance> instances, std::size_t num_words) {
  std::map<std::pair<WordId, WordId>, std::uint64_t> pairs;
  for (const auto& inst : instances) {
    if (inst.context.empty()) throw Error("bigrams: instances need a context");
    const WordId prev = inst.context.front();
    if (prev < 0 || static_cast<std::size_t>(prev) >= num_words || inst.target < 0 ||
        static_cast<std::size_t>(inst.target) >= num_words)
      throw Error("bigrams: word id out of range");
    ++pairs[{prev, inst.target}];
  }
  BigramCounts counts;
  counts.num_words = num_words;
  counts.successors.resize(num_words);
  counts.predecessors.resize(num_words);
  counts.left.assign(num_words, 0);
  counts.right.assign(num_words, 0);
  for (const auto& [key, n] : pairs) {
    const auto [w, v] = key;
    counts.successors[static_cast<std::size_t>(w)].emplace_back(v, n);
    counts.predecessors[static_cast<std::size_t>(v)].emplace_back(w, n);
    counts.left[static_cast<std::size_t>(w)] += n;
    counts.right[static_cast<std::size_t>(v)] += n;
  }
  return counts;
}

double class_bigram_objective(const BigramCounts& counts, std::span<const int> class_of) {
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> left, right;
  for (std::size_t w = 0; w < counts.num_words; ++w) {
    const int a = class_of[w];
    left[a] += static_cast<double>(counts.left[w]);
    right[a] += static_cast<double>(counts.right[w]);
    for (const auto& [v, n] : counts.successors[w]) cells[{a, class_of[static_cast<std::size_t>(v)]}] += static_cast<double>(n);
  }
  double f = 0.0;
  for (const auto& [k, n] : cells) f += xlogx(n);
  for (const auto& [k, n] : left) f -= xlogx(n);
  for (const auto& [k, n] : right) f -= xlogx(n);
  return f;
}

BrownResult brown_clustering_detailed(std::span<const TrainingInstance> instances, const Vocabulary& vocab,
                                      const BrownOptions& options) {
  const std::size_t V = vocab.size();
  const int K = options.num_classes;
  if (instances.empty()) throw Error("brown: empty corpus");
  if (K < 1) throw Error("brown: need at least one class");
  if (options.max_iterations < 0) throw Error("brown: max_iterations must be >= 0");

  std::vector<bool> frozen(V, false);
  std::vector<WordId> frozen_list;
  for (WordId f : options.frozen) {
    if (f < 0 || static_cast<std::size_t>(f) >= V) throw Error("brown: frozen word out of range");
    if (!frozen[static_cast<std::size_t>(f)]) frozen_list.push_back(f);
    frozen[static_cast<std::size_t>(f)] = true;
  }
  const BigramCounts counts = count_bigrams(instances, V);

  std::vector<WordId> movable;
  for (std::size_t w = 0; w < V; ++w)
    if (!frozen[w]) movable.push_back(static_cast<WordId>(w));
  if (static_cast<std::size_t>(K) > movable.size())
    throw Error("brown: " + std::to_string(K) + " classes but only " + std::to_string(movable.size()) + " words to cluster");
  auto freq = [&](WordId w) { return counts.right[static_cast<std::size_t>(w)] + counts.left[static_cast<std::size_t>(w)]; };
  std::stable_sort(movable.begin(), movable.end(), [&](WordId a, WordId b) { return freq(a) > freq(b); });

  std::vector<int> label(V, -1);
  for (std::size_t r = 0; r < movable.size(); ++r)
    label[static_cast<std::size_t>(movable[r])] = static_cast<int>(r < static_cast<std::size_t>(K) ? r : r % static_cast<std::size_t>(K));
  for (std::size_t i = 0; i < frozen_list.size(); ++i) label[static_cast<std::size_t>(frozen_list[i])] = K + static_cast<int>(i);

  ExchangeState state(counts, std::move(label), static_cast<std::size_t>(K) + frozen_list.size());
  BrownResult result;
  result.objective_trace.push_back(state.objective());

  for (int sweep = 0; sweep < options.max_iterations; ++sweep) {
    int moves = 0;
    for (WordId w : movable) {
      const int from = state.label(w);
      if (state.size(from) == 1) continue;
      state.remove(w);
      const int to = best_class(state, w, K, from);
      state.insert(w, to);
      if (to != from) ++moves;
    }
    ++result.sweeps;
    result.objective_trace.push_back(state.objective());
    if (moves == 0) {
      result.converged = true;
      break;
    }
  }

  for (WordId f : frozen_list) {
    state.remove(f);
    state.insert(f, best_class(state, f, K, -1));
  }
  result.classing = WordClassing(std::vector<ClassId>(state.labels().begin(), state.labels().end()), K);
  return result;
}

WordClassing brown_clustering(std::span<const TrainingInstance> instances, const Vocabulary& vocab, int num_classes,
                              int max_iterations) {
  BrownOptions options;
  options.num_classes = num_classes;
  options.max_iterations = max_iterations;
  return brown_clustering_detailed(instances, vocab, options).classing;
}

}  // namespace snlm
