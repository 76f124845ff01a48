#include <queue>
#include <tuple>

#include "snlm/partitioning.hpp"

namespace snlm {

VocabularyTree huffman_tree(std::span<const std::uint64_t> counts) {
  if (counts.size() < 2) throw Error("huffman: need at least two words");
  std::vector<VocabularyTree::Node> nodes;
  nodes.reserve(2 * counts.size() - 1);

  // (weight, creation order); creation order equals the node index.
  using Entry = std::pair<std::uint64_t, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (std::size_t w = 0; w < counts.size(); ++w) {
    VocabularyTree::Node leaf;
    leaf.word = static_cast<WordId>(w);
    nodes.push_back(leaf);
    queue.emplace(std::max<std::uint64_t>(counts[w], 1), static_cast<int>(w));
  }
  while (queue.size() > 1) {
    const auto [w_left, left] = queue.top();
    queue.pop();
    const auto [w_right, right] = queue.top();
    queue.pop();
    VocabularyTree::Node parent;
    parent.left = left;
    parent.right = right;
    const int id = static_cast<int>(nodes.size());
    nodes[static_cast<std::size_t>(left)].parent = id;
    nodes[static_cast<std::size_t>(right)].parent = id;
    nodes.push_back(parent);
    queue.emplace(w_left + w_right, id);
  }
  const int root = queue.top().second;
  return VocabularyTree(std::move(nodes), root, counts.size());
}

}  // namespace snlm
