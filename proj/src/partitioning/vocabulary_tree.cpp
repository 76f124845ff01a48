#include "snlm/vocabulary_tree.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace snlm {

VocabularyTree::VocabularyTree(std::vector<Node> nodes, int root, std::size_t num_words) {
  if (num_words < 2) throw Error("tree: need at least two words");
  if (nodes.size() != 2 * num_words - 1)
    throw Error("tree: a strict binary tree over " + std::to_string(num_words) + " words has " +
                std::to_string(2 * num_words - 1) + " nodes, got " + std::to_string(nodes.size()));
  if (root < 0 || static_cast<std::size_t>(root) >= nodes.size()) throw Error("tree: bad root");

  // Iterative preorder renumbering.
  std::vector<int> new_id(nodes.size(), -1);
  std::vector<int> order;
  std::vector<int> stack{root};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (id < 0 || static_cast<std::size_t>(id) >= nodes.size()) throw Error("tree: child link out of range");
    if (new_id[static_cast<std::size_t>(id)] != -1) throw Error("tree: node reachable twice");
    new_id[static_cast<std::size_t>(id)] = static_cast<int>(order.size());
    order.push_back(id);
    const Node& n = nodes[static_cast<std::size_t>(id)];
    const bool has_left = n.left >= 0, has_right = n.right >= 0;
    if (n.word >= 0) {
      if (has_left || has_right) throw Error("tree: leaf with children");
    } else {
      if (!has_left || !has_right) throw Error("tree: internal node without exactly two children");
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  if (order.size() != nodes.size()) throw Error("tree: unreachable nodes");

  nodes_.resize(nodes.size());
  leaf_of_.assign(num_words, -1);
  int next_internal = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Node& src = nodes[static_cast<std::size_t>(order[i])];
    Node& dst = nodes_[i];
    dst.word = src.word;
    dst.left = src.left >= 0 ? new_id[static_cast<std::size_t>(src.left)] : -1;
    dst.right = src.right >= 0 ? new_id[static_cast<std::size_t>(src.right)] : -1;
    if (dst.is_leaf()) {
      if (static_cast<std::size_t>(dst.word) >= num_words) throw Error("tree: leaf word out of range");
      if (leaf_of_[static_cast<std::size_t>(dst.word)] != -1) throw Error("tree: word labels two leaves");
      leaf_of_[static_cast<std::size_t>(dst.word)] = static_cast<int>(i);
    } else {
      dst.internal = next_internal++;
    }
  }
  nodes_[0].parent = -1;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].is_leaf()) continue;
    nodes_[static_cast<std::size_t>(nodes_[i].left)].parent = static_cast<int>(i);
    nodes_[static_cast<std::size_t>(nodes_[i].right)].parent = static_cast<int>(i);
  }
  for (std::size_t w = 0; w < num_words; ++w)
    if (leaf_of_[w] < 0) throw Error("tree: word " + std::to_string(w) + " has no leaf");
}

int VocabularyTree::depth(WordId w) const {
  int d = 0;
  for (int n = leaf_of(w); nodes_[static_cast<std::size_t>(n)].parent >= 0; n = nodes_[static_cast<std::size_t>(n)].parent) ++d;
  return d;
}

int VocabularyTree::max_depth() const {
  int best = 0;
  for (std::size_t w = 0; w < num_words(); ++w) best = std::max(best, depth(static_cast<WordId>(w)));
  return best;
}

std::vector<VocabularyTree::Step> VocabularyTree::path(WordId w, std::optional<WordId> skip) const {
  std::vector<Step> steps;
  const int skip_leaf = skip ? leaf_of(*skip) : -1;
  int child = leaf_of(w);
  for (int n = nodes_[static_cast<std::size_t>(child)].parent; n >= 0; child = n, n = nodes_[static_cast<std::size_t>(n)].parent) {
    const Node& node = nodes_[static_cast<std::size_t>(n)];
    const bool go_left = node.left == child;
    const int other = go_left ? node.right : node.left;
    if (other == skip_leaf) continue;
    steps.push_back({node.internal, go_left});
  }
  std::reverse(steps.begin(), steps.end());
  return steps;
}

void VocabularyTree::write(std::ostream& out, const Vocabulary& vocab) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    out << i << ' ' << nodes_[i].parent;
    if (nodes_[i].is_leaf()) out << " leaf:" << vocab.token(nodes_[i].word);
    out << '\n';
  }
}

VocabularyTree VocabularyTree::from_preorder(const std::vector<std::pair<int, WordId>>& parent_and_word,
                                             std::size_t num_words) {
  std::vector<Node> nodes(parent_and_word.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto [parent, word] = parent_and_word[i];
    nodes[i].word = word;
    nodes[i].parent = parent;
    if (i == 0) {
      if (parent != -1) throw Error("tree: first node must be the root");
      continue;
    }
    if (parent < 0 || static_cast<std::size_t>(parent) >= i)
      throw Error("tree: node " + std::to_string(i) + " must have a parent listed before it");
    Node& p = nodes[static_cast<std::size_t>(parent)];
    if (p.word >= 0) throw Error("tree: node " + std::to_string(i) + " has a leaf as parent");
    if (p.left < 0) {
      p.left = static_cast<int>(i);
    } else if (p.right < 0) {
      p.right = static_cast<int>(i);
    } else {
      throw Error("tree: node " + std::to_string(parent) + " has more than two children");
    }
  }
  if (nodes.empty()) throw Error("tree: no nodes");
  VocabularyTree tree(std::move(nodes), 0, num_words);
  // Preorder input must already be canonical, otherwise ids would silently shift.
  for (std::size_t i = 0; i < parent_and_word.size(); ++i)
    if (tree.nodes_[i].parent != parent_and_word[i].first || tree.nodes_[i].word != parent_and_word[i].second)
      throw Error("tree: nodes are not listed in preorder");
  return tree;
}

VocabularyTree VocabularyTree::read(std::istream& in, const Vocabulary& vocab) {
  std::vector<std::pair<int, WordId>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    long id = 0, parent = 0;
    if (!(ss >> id >> parent)) throw Error("tree line " + std::to_string(line_no) + ": expected node_id parent_id");
    if (id != static_cast<long>(entries.size()))
      throw Error("tree line " + std::to_string(line_no) + ": node ids must be consecutive preorder ids");
    WordId word = -1;
    std::string rest;
    if (ss >> rest) {
      if (rest.rfind("leaf:", 0) != 0) throw Error("tree line " + std::to_string(line_no) + ": expected leaf:word");
      const auto w = vocab.find(std::string_view(rest).substr(5));
      if (!w) throw Error("tree line " + std::to_string(line_no) + ": unknown word '" + rest.substr(5) + "'");
      word = *w;
    }
    entries.emplace_back(static_cast<int>(parent), word);
  }
  return from_preorder(entries, vocab.size());
}

void VocabularyTree::save(const std::string& path, const Vocabulary& vocab) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write(out, vocab);
}

VocabularyTree VocabularyTree::load(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  return read(in, vocab);
}

}  // namespace snlm
