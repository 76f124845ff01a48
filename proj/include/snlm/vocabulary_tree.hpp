#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "snlm/common.hpp"
#include "snlm/vocabulary.hpp"

namespace snlm {

// Strict binary tree whose leaves are the vocabulary words. Nodes are stored
// in preorder, so the root is node 0 and node ids are stable across
// serialization. Internal nodes carry a dense index in [0, |V|-1) that
// selects their (s_n, t_n) parameters.
class VocabularyTree {
 public:
  struct Node {
    int parent = -1;
    int left = -1;
    int right = -1;
    WordId word = -1;     // leaves only
    int internal = -1;    // internal nodes only

    bool is_leaf() const { return word >= 0; }
    bool operator==(const Node&) const = default;
  };

  // One binary decision on the root-to-leaf path.
  struct Step {
    int internal;
    bool go_left;
  };

  VocabularyTree() = default;
  // Nodes in any order with valid parent/child links; renumbered to preorder
  // from `root`. Throws unless the tree is strict binary and each of the
  // `num_words` words labels exactly one leaf.
  VocabularyTree(std::vector<Node> nodes, int root, std::size_t num_words);

  std::size_t num_words() const { return leaf_of_.size(); }
  std::size_t num_internal() const { return num_words() - 1; }
  const std::vector<Node>& nodes() const { return nodes_; }
  int leaf_of(WordId w) const { return leaf_of_.at(static_cast<std::size_t>(w)); }
  int depth(WordId w) const;
  int max_depth() const;

  // Decisions from the root to w's leaf. When `skip` names a word, the
  // decision whose other branch is exactly that word's leaf is dropped: the
  // skipped word gets no mass and its sibling gets the whole node.
  std::vector<Step> path(WordId w, std::optional<WordId> skip = std::nullopt) const;

  bool operator==(const VocabularyTree& o) const { return nodes_ == o.nodes_; }

  // Preorder, one node per line: `node_id parent_id [leaf:word]`.
  void write(std::ostream& out, const Vocabulary& vocab) const;
  static VocabularyTree read(std::istream& in, const Vocabulary& vocab);
  void save(const std::string& path, const Vocabulary& vocab) const;
  static VocabularyTree load(const std::string& path, const Vocabulary& vocab);

  // Same structure from raw (parent, leaf word) pairs in preorder. Used by the
  // file readers.
  static VocabularyTree from_preorder(const std::vector<std::pair<int, WordId>>& parent_and_word,
                                      std::size_t num_words);

 private:
  std::vector<Node> nodes_;
  std::vector<int> leaf_of_;
};

}  // namespace snlm
