#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "snlm/partitioning.hpp"
#include "support.hpp"

using namespace snlm;

namespace {

std::uint64_t weighted_path_length(const VocabularyTree& tree, std::span<const std::uint64_t> counts) {
  std::uint64_t total = 0;
  for (std::size_t w = 0; w < counts.size(); ++w) total += std::max<std::uint64_t>(counts[w], 1) * static_cast<std::uint64_t>(tree.depth(static_cast<WordId>(w)));
  return total;
}

void check_partition(const WordClassing& c, std::size_t V) {
  std::size_t covered = 0;
  for (ClassId k = 0; k < c.num_classes(); ++k) {
    CHECK_FALSE(c.members(k).empty());
    covered += c.members(k).size();
    for (WordId w : c.members(k)) CHECK(c.class_of(w) == k);
  }
  CHECK(covered == V);
  CHECK(c.num_words() == V);
}

Vocabulary vocab_of(const std::vector<Sentence>& corpus) {
  std::ostringstream t;
  for (const auto& s : corpus) {
    for (const auto& w : s) t << w << ' ';
    t << '\n';
  }
  std::istringstream in(t.str());
  return build_vocabulary(in);
}

}  // namespace

TEST_SUITE("partitioning") {
  TEST_CASE("frequency binning by equal mass") {
    const std::vector<double> p = {0.5, 0.25, 0.125, 0.125};
    const auto two = frequency_binning(UnigramDistribution(p), 2);
    CHECK(two.assignment() == std::vector<ClassId>{0, 1, 1, 1});

    const std::vector<double> flat = {0.25, 0.25, 0.25, 0.25};
    const auto four = frequency_binning(UnigramDistribution(flat), 4);
    CHECK(four.assignment() == std::vector<ClassId>{0, 1, 2, 3});

    const auto one = frequency_binning(UnigramDistribution(p), 1);
    CHECK(one.num_classes() == 1);
    CHECK(one.members(0).size() == 4);

    CHECK_THROWS_AS(frequency_binning(UnigramDistribution(p), 5), Error);
    CHECK_THROWS_AS(frequency_binning(UnigramDistribution(p), 0), Error);
  }

  TEST_CASE("frequency binning is invariant under rescaling") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> w(40);
      for (double& x : w) x = 1.0 + static_cast<double>(uniform_index(rng, 100));
      const int K = 2 + static_cast<int>(uniform_index(rng, 8));
      const auto base = frequency_binning(w, K);
      check_partition(base, w.size());
      for (double scale : {0.001, 3.0, 1024.0}) {
        auto scaled = w;
        for (double& x : scaled) x *= scale;
        CHECK(frequency_binning(scaled, K) == base);
      }
    }
  }

  TEST_CASE("huffman examples") {
    const std::vector<std::uint64_t> c = {5, 2, 1, 1};
    const auto t = huffman_tree(c);
    CHECK(t.depth(0) == 1);
    CHECK(t.depth(1) == 2);
    CHECK(t.depth(2) == 3);
    CHECK(t.depth(3) == 3);
    CHECK(weighted_path_length(t, c) == 15);
    CHECK(test::brute_force_min_wpl(c) == 15);

    const std::vector<std::uint64_t> two = {1, 1};
    const auto t2 = huffman_tree(two);
    CHECK(t2.depth(0) == 1);
    CHECK(t2.depth(1) == 1);

    const std::vector<std::uint64_t> eight(8, 3);
    const auto t8 = huffman_tree(eight);
    for (WordId w = 0; w < 8; ++w) CHECK(t8.depth(w) == 3);
    CHECK(test::brute_force_min_wpl(std::vector<std::uint64_t>(8, 1)) == 24);
    CHECK(weighted_path_length(t8, std::vector<std::uint64_t>(8, 1)) == 24);

    const std::vector<std::uint64_t> one = {4};
    CHECK_THROWS_AS(huffman_tree(one), Error);
  }

  TEST_CASE("huffman depth bounds") {
    for (std::size_t V : {2u, 3u, 5u, 16u, 17u, 100u, 1000u}) {
      const auto t = huffman_tree(std::vector<std::uint64_t>(V, 1));
      CHECK(t.max_depth() == static_cast<int>(std::ceil(std::log2(static_cast<double>(V)))));
    }
    // Fibonacci counts give the deepest possible tree.
    std::vector<std::uint64_t> fib = {1, 1};
    while (fib.size() < 20) fib.push_back(fib[fib.size() - 1] + fib[fib.size() - 2]);
    const auto t = huffman_tree(fib);
    CHECK(t.max_depth() <= static_cast<int>(fib.size()) - 1);
    CHECK(t.nodes().size() == 2 * fib.size() - 1);
  }

  TEST_CASE("huffman treats zero counts as one and is deterministic") {
    const std::vector<std::uint64_t> z = {0, 0, 4, 0};
    const std::vector<std::uint64_t> o = {1, 1, 4, 1};
    CHECK(huffman_tree(z) == huffman_tree(o));
    CHECK(huffman_tree(o) == huffman_tree(o));
  }

  TEST_CASE("tree and classing files round-trip") {
    const auto corpus = test::synthetic_corpus(20, 600, 5);
    const auto v = vocab_of(corpus);
    const auto tree = huffman_tree(v.counts());
    std::stringstream tb;
    tree.write(tb, v);
    CHECK(VocabularyTree::read(tb, v) == tree);

    const auto cl = frequency_binning(unigram_distribution(v), 4);
    std::stringstream cb;
    cl.write(cb, v);
    CHECK(WordClassing::read(cb, v) == cl);
  }

  TEST_CASE("malformed trees are rejected") {
    using Node = VocabularyTree::Node;
    // Internal node with a single child.
    std::vector<Node> unary = {{-1, 1, -1, -1, -1}, {0, -1, -1, 0, -1}};
    CHECK_THROWS_AS(VocabularyTree(unary, 0, 1), Error);
    // Word 1 labels two leaves, word 2 none.
    std::vector<Node> dup = {{-1, 1, 2, -1, -1}, {0, -1, -1, 1, -1}, {0, 3, 4, -1, -1}, {2, -1, -1, 0, -1}, {2, -1, -1, 1, -1}};
    CHECK_THROWS_AS(VocabularyTree(dup, 0, 3), Error);
  }

  TEST_CASE("classing validation") {
    CHECK_THROWS_AS(WordClassing({0, 0, 2}, 3), Error);
    CHECK_THROWS_AS(WordClassing({0, 3}, 2), Error);
    const WordClassing ok({1, 0, 1}, 2);
    check_partition(ok, 3);
    CHECK(ok.members(1) == std::vector<WordId>{0, 2});
    CHECK(ok.index_in_class(2) == 1);
  }

  TEST_CASE("brown recovers the template classes") {
    const auto corpus = test::template_corpus();
    const auto v = vocab_of(corpus);
    const WordId a = *v.find("a"), b = *v.find("b"), c = *v.find("c"), d = *v.find("d");
    const auto instances = extract_instances(corpus, v, 2);

    BrownOptions o;
    o.num_classes = 2;
    o.frozen.clear();
    for (WordId w = 0; w < static_cast<WordId>(v.size()); ++w)
      if (w != a && w != b && w != c && w != d) o.frozen.push_back(w);
    const auto r = brown_clustering_detailed(instances, v, o);
    CHECK(r.converged);
    check_partition(r.classing, v.size());
    CHECK(r.classing.class_of(a) == r.classing.class_of(b));
    CHECK(r.classing.class_of(c) == r.classing.class_of(d));
    CHECK(r.classing.class_of(a) != r.classing.class_of(c));

    // Exhaustive oracle over the 7 two-class partitions of {a,b,c,d}.
    const std::vector<std::string> words = {"a", "b", "c", "d"};
    double best = -INFINITY;
    int best_mask = -1;
    for (int mask = 1; mask < 8; ++mask) {  // word "a" fixed in class 0
      std::map<std::string, int> cls;
      for (int i = 0; i < 4; ++i) cls[words[static_cast<std::size_t>(i)]] = i == 0 ? 0 : (mask >> (i - 1)) & 1;
      const double f = test::template_objective(corpus, cls);
      if (f > best) {
        best = f;
        best_mask = mask;
      }
    }
    CHECK(best_mask == 6);  // b with a; c and d together

    // The library objective agrees with the text-level oracle up to a constant.
    const auto counts = count_bigrams(instances, v.size());
    std::vector<int> labels(v.size());
    for (std::size_t w = 0; w < v.size(); ++w) labels[w] = 2 + static_cast<int>(w);
    labels[static_cast<std::size_t>(a)] = labels[static_cast<std::size_t>(b)] = 0;
    labels[static_cast<std::size_t>(c)] = labels[static_cast<std::size_t>(d)] = 1;
    const double lib_good = class_bigram_objective(counts, labels);
    labels[static_cast<std::size_t>(b)] = 1;
    labels[static_cast<std::size_t>(c)] = 0;
    const double lib_bad = class_bigram_objective(counts, labels);
    const double ora_good = test::template_objective(corpus, {{"a", 0}, {"b", 0}, {"c", 1}, {"d", 1}});
    const double ora_bad = test::template_objective(corpus, {{"a", 0}, {"b", 1}, {"c", 0}, {"d", 1}});
    CHECK(lib_good - lib_bad == doctest::Approx(ora_good - ora_bad).epsilon(1e-9));
  }

  TEST_CASE("brown objective never decreases across sweeps") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto corpus = test::synthetic_corpus(60, 8000, seed);
      const auto v = vocab_of(corpus);
      BrownOptions o;
      o.num_classes = 6;
      const auto r = brown_clustering_detailed(extract_instances(corpus, v, 2), v, o);
      check_partition(r.classing, v.size());
      REQUIRE(r.objective_trace.size() >= 2);
      for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
        CHECK(r.objective_trace[i] >= r.objective_trace[i - 1] - 1e-9 * std::abs(r.objective_trace[i - 1]));
    }
  }

  TEST_CASE("brown result is a local optimum") {
    const auto corpus = test::synthetic_corpus(25, 3000, 9);
    const auto v = vocab_of(corpus);
    const auto instances = extract_instances(corpus, v, 2);
    BrownOptions o;
    o.num_classes = 4;
    o.frozen.clear();
    o.max_iterations = 100;
    const auto r = brown_clustering_detailed(instances, v, o);
    REQUIRE(r.converged);
    const auto counts = count_bigrams(instances, v.size());
    std::vector<int> labels(r.classing.assignment().begin(), r.classing.assignment().end());
    const double f = class_bigram_objective(counts, labels);
    for (std::size_t w = 0; w < v.size(); ++w) {
      if (r.classing.members(labels[w]).size() == 1) continue;
      for (int c = 0; c < 4; ++c) {
        auto moved = labels;
        moved[w] = c;
        CHECK(class_bigram_objective(counts, moved) <= f + 1e-9 * std::abs(f));
      }
    }
  }

  TEST_CASE("brown with symmetric words and with K = |V|") {
    // Every word has the same neighbours: all partitions score the same.
    std::vector<Sentence> corpus;
    for (const std::string& x : {"p", "q", "r", "s"})
      for (const std::string& y : {"p", "q", "r", "s"}) corpus.push_back({x, y});
    const auto v = vocab_of(corpus);
    const auto instances = extract_instances(corpus, v, 2);
    BrownOptions o;
    o.num_classes = 2;
    o.frozen = {kUnkId, kStartId, kEndId};
    const auto r = brown_clustering_detailed(instances, v, o);
    check_partition(r.classing, v.size());

    o.frozen.clear();
    o.num_classes = static_cast<int>(v.size());
    const auto fine = brown_clustering_detailed(instances, v, o);
    std::set<ClassId> distinct(fine.classing.assignment().begin(), fine.classing.assignment().end());
    CHECK(distinct.size() == v.size());
    // Finest partition: objective is the bigram log-likelihood up to word terms.
    const auto counts = count_bigrams(instances, v.size());
    double ll = 0.0;
    for (std::size_t w = 0; w < v.size(); ++w)
      for (const auto& [u, n] : counts.successors[w])
        ll += static_cast<double>(n) * std::log(static_cast<double>(n) / (static_cast<double>(counts.left[w]) * static_cast<double>(counts.right[static_cast<std::size_t>(u)])));
    std::vector<int> labels(v.size());
    std::iota(labels.begin(), labels.end(), 0);
    CHECK(class_bigram_objective(counts, labels) == doctest::Approx(ll).epsilon(1e-12));

    o.num_classes = static_cast<int>(v.size()) + 1;
    CHECK_THROWS_AS(brown_clustering_detailed(instances, v, o), Error);
  }

  TEST_CASE("default class count") {
    CHECK(default_num_classes(100) == 10);
    CHECK(default_num_classes(101) == 11);
    CHECK(default_num_classes(105500) == 325);
  }
}
