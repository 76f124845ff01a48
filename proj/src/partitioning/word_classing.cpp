#include "snlm/word_classing.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

namespace snlm {

WordClassing::WordClassing(std::vector<ClassId> class_of, int num_classes)
    : num_classes_(num_classes), class_of_(std::move(class_of)) {
  if (num_classes_ < 1) throw Error("classing: need at least one class");
  members_.assign(static_cast<std::size_t>(num_classes_), {});
  index_in_class_.assign(class_of_.size(), -1);
  for (std::size_t w = 0; w < class_of_.size(); ++w) {
    const ClassId c = class_of_[w];
    if (c < 0 || c >= num_classes_)
      throw Error("classing: word " + std::to_string(w) + " has class " + std::to_string(c) + " outside [0, " +
                  std::to_string(num_classes_) + ")");
    auto& m = members_[static_cast<std::size_t>(c)];
    index_in_class_[w] = static_cast<int>(m.size());
    m.push_back(static_cast<WordId>(w));
  }
  for (int c = 0; c < num_classes_; ++c)
    if (members_[static_cast<std::size_t>(c)].empty()) throw Error("classing: class " + std::to_string(c) + " is empty");
}

std::size_t WordClassing::max_class_size() const {
  std::size_t best = 0;
  for (const auto& m : members_) best = std::max(best, m.size());
  return best;
}

void WordClassing::write(std::ostream& out, const Vocabulary& vocab) const {
  for (std::size_t w = 0; w < class_of_.size(); ++w)
    out << vocab.token(static_cast<WordId>(w)) << '\t' << class_of_[w] << '\n';
}

WordClassing WordClassing::read(std::istream& in, const Vocabulary& vocab) {
  std::vector<ClassId> class_of(vocab.size(), -1);
  std::string line;
  std::size_t line_no = 0;
  int max_class = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error("classes line " + std::to_string(line_no) + ": expected word<TAB>class");
    const auto id = vocab.find(std::string_view(line).substr(0, tab));
    if (!id) throw Error("classes line " + std::to_string(line_no) + ": unknown word '" + line.substr(0, tab) + "'");
    int c = 0;
    try {
      c = std::stoi(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw Error("classes line " + std::to_string(line_no) + ": bad class id");
    }
    if (c < 0) throw Error("classes line " + std::to_string(line_no) + ": negative class id");
    if (class_of[static_cast<std::size_t>(*id)] != -1)
      throw Error("classes line " + std::to_string(line_no) + ": word listed twice");
    class_of[static_cast<std::size_t>(*id)] = c;
    max_class = std::max(max_class, c);
  }
  for (std::size_t w = 0; w < class_of.size(); ++w)
    if (class_of[w] < 0) throw Error("classes: word '" + vocab.token(static_cast<WordId>(w)) + "' has no class");
  return WordClassing(std::move(class_of), max_class + 1);
}

void WordClassing::save(const std::string& path, const Vocabulary& vocab) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write(out, vocab);
}

WordClassing WordClassing::load(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  return read(in, vocab);
}

}  // namespace snlm
