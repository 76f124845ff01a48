#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "snlm/partitioning.hpp"

namespace snlm::test {

WordClassing random_classing(std::size_t vocab_size, int num_classes, Rng& rng) {
  std::vector<ClassId> class_of(vocab_size);
  std::vector<std::size_t> order(vocab_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i < vocab_size; ++i)
    class_of[order[i]] = i < static_cast<std::size_t>(num_classes)
                             ? static_cast<ClassId>(i)
                             : static_cast<ClassId>(uniform_index(rng, static_cast<std::uint64_t>(num_classes)));
  return WordClassing(std::move(class_of), num_classes);
}

VocabularyTree random_tree(std::size_t vocab_size, Rng& rng) {
  std::vector<std::uint64_t> counts(vocab_size);
  for (auto& c : counts) c = 1 + uniform_index(rng, 50);
  return huffman_tree(counts);
}

void randomize(BasicParameters<double>& params, Rng& rng, double scale) {
  params.for_each_family([&](std::string_view, std::span<double> d) {
    for (double& x : d) x = scale * standard_normal(rng);
  });
}

Model64 random_model(const ToyConfig& toy) {
  Rng rng(toy.seed);
  ModelConfig cfg;
  cfg.order = toy.order;
  cfg.dim = toy.dim;
  cfg.regime = toy.regime;
  cfg.diagonal_contexts = toy.diagonal;
  cfg.start_symbol = toy.start_symbol;
  std::shared_ptr<const WordClassing> classing;
  std::shared_ptr<const VocabularyTree> tree;
  if (toy.regime == Regime::class_factored)
    classing = std::make_shared<WordClassing>(random_classing(toy.vocab_size, toy.num_classes, rng));
  if (toy.regime == Regime::tree_factored) tree = std::make_shared<VocabularyTree>(random_tree(toy.vocab_size, rng));
  Model64 model(cfg, toy.vocab_size, classing, tree);
  randomize(model.params(), rng, toy.scale);
  return model;
}

std::vector<WordId> random_context(const Model64& model, Rng& rng) {
  std::vector<WordId> ctx(static_cast<std::size_t>(model.context_size()));
  for (auto& w : ctx) w = static_cast<WordId>(uniform_index(rng, model.vocab_size()));
  return ctx;
}

Instances random_batch(const Model64& model, std::size_t size, Rng& rng) {
  Instances batch(size);
  for (auto& inst : batch) {
    inst.context = random_context(model, rng);
    const auto& targets = model.targets();
    inst.target = targets[uniform_index(rng, targets.size())];
  }
  return batch;
}

std::vector<double> reference_projection(const Model64& model, std::span<const WordId> context) {
  const auto& P = model.params();
  const int D = model.dim();
  std::vector<double> p(static_cast<std::size_t>(D), 0.0);
  for (std::size_t j = 0; j < context.size(); ++j) {
    const WordId h = context[j];
    for (int d = 0; d < D; ++d) {
      double v = 0.0;
      if (model.config().diagonal_contexts) {
        v = P.C_diag[j](d) * P.Q(h, d);
      } else {
        for (int e = 0; e < D; ++e) v += P.C_full[j](d, e) * P.Q(h, e);
      }
      p[static_cast<std::size_t>(d)] += v;
    }
  }
  for (double& x : p) x = std::max(0.0, x);
  return p;
}

double reference_phi(const Model64& model, const std::vector<double>& p, WordId w) {
  double s = model.params().b(w);
  for (std::size_t d = 0; d < p.size(); ++d) s += model.params().R(w, static_cast<Eigen::Index>(d)) * p[d];
  return s;
}

double reference_psi(const Model64& model, const std::vector<double>& p, int unit) {
  double s = model.params().t(unit);
  for (std::size_t d = 0; d < p.size(); ++d) s += model.params().S(unit, static_cast<Eigen::Index>(d)) * p[d];
  return s;
}

namespace {

std::vector<double> softmax(const std::vector<double>& scores) {
  const double m = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  double z = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) z += out[i] = std::exp(scores[i] - m);
  for (double& x : out) x /= z;
  return out;
}

double sigma(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::vector<double> reference_distribution(const Model64& model, std::span<const WordId> context) {
  const auto p = reference_projection(model, context);
  const std::size_t V = model.vocab_size();
  const auto start = model.config().start_symbol;
  auto candidate = [&](WordId w) { return !start || w != *start; };
  std::vector<double> dist(V, 0.0);

  switch (model.config().regime) {
    case Regime::standard: {
      std::vector<WordId> ws;
      std::vector<double> scores;
      for (WordId w = 0; w < static_cast<WordId>(V); ++w)
        if (candidate(w)) {
          ws.push_back(w);
          scores.push_back(reference_phi(model, p, w));
        }
      const auto probs = softmax(scores);
      for (std::size_t i = 0; i < ws.size(); ++i) dist[static_cast<std::size_t>(ws[i])] = probs[i];
      break;
    }
    case Regime::class_factored: {
      const auto& cl = *model.classing();
      std::vector<std::vector<WordId>> members(static_cast<std::size_t>(cl.num_classes()));
      for (WordId w = 0; w < static_cast<WordId>(V); ++w)
        if (candidate(w)) members[static_cast<std::size_t>(cl.class_of(w))].push_back(w);
      std::vector<int> classes;
      std::vector<double> cs;
      for (int c = 0; c < cl.num_classes(); ++c)
        if (!members[static_cast<std::size_t>(c)].empty()) {
          classes.push_back(c);
          cs.push_back(reference_psi(model, p, c));
        }
      const auto pc = softmax(cs);
      for (std::size_t i = 0; i < classes.size(); ++i) {
        const auto& m = members[static_cast<std::size_t>(classes[i])];
        std::vector<double> ws;
        for (WordId w : m) ws.push_back(reference_phi(model, p, w));
        const auto pw = softmax(ws);
        for (std::size_t j = 0; j < m.size(); ++j) dist[static_cast<std::size_t>(m[j])] = pc[i] * pw[j];
      }
      break;
    }
    case Regime::tree_factored: {
      const auto& nodes = model.tree()->nodes();
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].is_leaf() || !candidate(nodes[i].word)) continue;
        double prob = 1.0;
        int child = static_cast<int>(i);
        for (int parent = nodes[i].parent; parent >= 0; child = parent, parent = nodes[static_cast<std::size_t>(parent)].parent) {
          const auto& n = nodes[static_cast<std::size_t>(parent)];
          const int other = n.left == child ? n.right : n.left;
          const auto& o = nodes[static_cast<std::size_t>(other)];
          if (o.is_leaf() && !candidate(o.word)) continue;
          const double psi = reference_psi(model, p, n.internal);
          prob *= n.left == child ? sigma(psi) : sigma(-psi);
        }
        dist[static_cast<std::size_t>(nodes[i].word)] = prob;
      }
      break;
    }
  }
  return dist;
}

double reference_log_likelihood(const Model64& model, std::span<const TrainingInstance> batch) {
  double ll = 0.0;
  for (const auto& inst : batch) ll += std::log(reference_distribution(model, inst.context)[static_cast<std::size_t>(inst.target)]);
  return ll;
}

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

namespace {

struct FamilySpan {
  std::string name;
  std::span<double> data;
};

std::vector<FamilySpan> families(BasicParameters<double>& params) {
  std::vector<FamilySpan> out;
  params.for_each_family([&](std::string_view name, std::span<double> d) { out.push_back({std::string(name), d}); });
  return out;
}

double central_difference(double& x, const std::function<double()>& objective, double step) {
  const double saved = x;
  x = saved + step;
  const double plus = objective();
  x = saved - step;
  const double minus = objective();
  x = saved;
  return (plus - minus) / (2.0 * step);
}

}  // namespace

std::vector<FamilyError> finite_difference_check(Model64& model, const BasicParameters<double>& analytic,
                                                 const std::function<double()>& objective, double step) {
  auto num = families(model.params());
  auto ana = families(const_cast<BasicParameters<double>&>(analytic));
  if (num.size() != ana.size()) throw std::logic_error("finite differences: family mismatch");
  std::map<std::string, FamilyError> by_name;
  std::vector<std::string> order;
  for (std::size_t f = 0; f < num.size(); ++f) {
    if (num[f].data.size() != ana[f].data.size()) throw std::logic_error("finite differences: shape mismatch");
    auto [it, fresh] = by_name.try_emplace(num[f].name);
    if (fresh) {
      order.push_back(num[f].name);
      it->second.family = num[f].name;
    }
    auto& err = it->second;
    for (std::size_t i = 0; i < num[f].data.size(); ++i) {
      const double n = central_difference(num[f].data[i], objective, step);
      const double a = ana[f].data[i];
      ++err.entries;
      err.max_rel_error = std::max(err.max_rel_error, relative_error(a, n));
      err.max_abs_gradient = std::max(err.max_abs_gradient, std::abs(a));
    }
  }
  std::vector<FamilyError> out;
  for (const auto& name : order)
    if (by_name[name].entries > 0) out.push_back(by_name[name]);
  return out;
}

std::vector<double> numeric_gradient(Model64& model, const std::function<double()>& objective, double step) {
  std::vector<double> out;
  for (auto& fam : families(model.params()))
    for (double& x : fam.data) out.push_back(central_difference(x, objective, step));
  return out;
}

std::vector<double> flatten(const BasicParameters<double>& params) {
  std::vector<double> out;
  params.for_each_family([&](std::string_view, std::span<const double> d) { out.insert(out.end(), d.begin(), d.end()); });
  return out;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::logic_error("cosine: size mismatch");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

std::vector<Sentence> synthetic_corpus(std::size_t num_words, std::size_t num_tokens, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> zipf(num_words);
  for (std::size_t i = 0; i < num_words; ++i) zipf[i] = 1.0 / static_cast<double>(i + 1);
  const double zsum = std::accumulate(zipf.begin(), zipf.end(), 0.0);
  auto draw = [&](const std::vector<double>& w, double total) {
    double u = uniform01(rng) * total;
    for (std::size_t i = 0; i < w.size(); ++i)
      if ((u -= w[i]) < 0.0) return i;
    return w.size() - 1;
  };
  constexpr std::size_t kSuccessors = 4;
  std::vector<std::vector<std::size_t>> next(num_words);
  for (auto& n : next)
    for (std::size_t j = 0; j < kSuccessors; ++j) n.push_back(uniform_index(rng, num_words));
  const std::vector<double> succ_weight = {0.5, 0.25, 0.15, 0.1};

  std::vector<Sentence> corpus;
  std::size_t tokens = 0;
  while (tokens < num_tokens) {
    const std::size_t len = 5 + uniform_index(rng, 16);
    Sentence s;
    std::size_t w = draw(zipf, zsum);
    for (std::size_t i = 0; i < len && tokens < num_tokens; ++i, ++tokens) {
      s.push_back("w" + std::to_string(w));
      w = uniform01(rng) < 0.8 ? next[w][draw(succ_weight, 1.0)] : draw(zipf, zsum);
    }
    corpus.push_back(std::move(s));
  }
  return corpus;
}

std::vector<Sentence> template_corpus(std::size_t repetitions) {
  std::vector<Sentence> corpus;
  for (std::size_t i = 0; i < repetitions; ++i) {
    const bool first_a = i % 5 < 3;
    const bool second_c = (i / 5) % 10 < 3;
    corpus.push_back({first_a ? "a" : "b", "X", second_c ? "c" : "d", "Y"});
  }
  return corpus;
}

std::size_t token_count(const std::vector<Sentence>& corpus) {
  std::size_t n = 0;
  for (const auto& s : corpus) n += s.size();
  return n;
}

double template_objective(const std::vector<Sentence>& corpus, const std::map<std::string, int>& class_of) {
  auto cls = [&](const std::string& w) {
    auto it = class_of.find(w);
    return it != class_of.end() ? "#" + std::to_string(it->second) : w;
  };
  std::map<std::pair<std::string, std::string>, double> pairs;
  std::map<std::string, double> left, right;
  for (const auto& s : corpus) {
    std::vector<std::string> seq = {"<s>"};
    seq.insert(seq.end(), s.begin(), s.end());
    seq.push_back("</s>");
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      const auto a = cls(seq[i]), b = cls(seq[i + 1]);
      pairs[{a, b}] += 1.0;
      left[a] += 1.0;
      right[b] += 1.0;
    }
  }
  double ll = 0.0;
  for (const auto& [key, n] : pairs) ll += n * std::log(n / (left[key.first] * right[key.second]));
  return ll;
}

std::uint64_t brute_force_min_wpl(std::vector<std::uint64_t> counts) {
  static std::map<std::vector<std::uint64_t>, std::uint64_t> memo;
  std::sort(counts.begin(), counts.end());
  if (counts.size() <= 1) return 0;
  if (auto it = memo.find(counts); it != memo.end()) return it->second;
  std::uint64_t best = UINT64_MAX;
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::size_t j = i + 1; j < counts.size(); ++j) {
      std::vector<std::uint64_t> rest;
      for (std::size_t k = 0; k < counts.size(); ++k)
        if (k != i && k != j) rest.push_back(counts[k]);
      const std::uint64_t merged = counts[i] + counts[j];
      rest.push_back(merged);
      best = std::min(best, merged + brute_force_min_wpl(rest));
    }
  memo[counts] = best;
  return best;
}

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "snlm_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace snlm::test
