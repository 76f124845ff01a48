#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "snlm/common.hpp"
#include "snlm/vocabulary.hpp"

namespace snlm {

// Partition of the vocabulary into K disjoint, non-empty classes.
class WordClassing {
 public:
  WordClassing() = default;
  // class_of[w] in [0, K). Throws if any class is empty or an id is out of range.
  WordClassing(std::vector<ClassId> class_of, int num_classes);

  int num_classes() const { return num_classes_; }
  std::size_t num_words() const { return class_of_.size(); }
  ClassId class_of(WordId w) const { return class_of_.at(static_cast<std::size_t>(w)); }
  // Sorted word ids of class c.
  const std::vector<WordId>& members(ClassId c) const { return members_.at(static_cast<std::size_t>(c)); }
  // Position of w inside members(class_of(w)).
  int index_in_class(WordId w) const { return index_in_class_[static_cast<std::size_t>(w)]; }
  std::size_t max_class_size() const;
  const std::vector<ClassId>& assignment() const { return class_of_; }

  bool operator==(const WordClassing& o) const {
    return num_classes_ == o.num_classes_ && class_of_ == o.class_of_;
  }

  // `word<TAB>class_id` lines, in id order.
  void write(std::ostream& out, const Vocabulary& vocab) const;
  // Every vocabulary word must be listed exactly once. Class ids are dense.
  static WordClassing read(std::istream& in, const Vocabulary& vocab);
  void save(const std::string& path, const Vocabulary& vocab) const;
  static WordClassing load(const std::string& path, const Vocabulary& vocab);

 private:
  int num_classes_ = 0;
  std::vector<ClassId> class_of_;
  std::vector<std::vector<WordId>> members_;
  std::vector<int> index_in_class_;
};

}  // namespace snlm
