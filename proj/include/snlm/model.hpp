#pragma once

#include <memory>
#include <span>
#include <vector>

#include "snlm/common.hpp"
#include "snlm/parameters.hpp"
#include "snlm/vocabulary_tree.hpp"
#include "snlm/word_classing.hpp"

namespace snlm {

// Pre-activation and rectified context projection.
template <typename Real>
struct Projection {
  typename BasicParameters<Real>::Vector pre;
  typename BasicParameters<Real>::Vector p;
};

// n-gram neural LM: p = max(0, sum_j C_j q_{h_j}), phi(w,h) = r_w.p + b_w, with
// a standard, class-factored or tree-factored output layer. Immutable while
// being queried; training mutates params() with exclusive access.
template <typename Real>
class BasicModel {
 public:
  using Vector = typename BasicParameters<Real>::Vector;

  BasicModel() = default;
  // Validates the config against the structure required by the regime and
  // allocates zero parameters.
  BasicModel(const ModelConfig& config, std::size_t vocab_size,
             std::shared_ptr<const WordClassing> classing = nullptr,
             std::shared_ptr<const VocabularyTree> tree = nullptr);

  const ModelConfig& config() const { return config_; }
  std::size_t vocab_size() const { return vocab_size_; }
  int context_size() const { return config_.order - 1; }
  int dim() const { return config_.dim; }
  const WordClassing* classing() const { return classing_.get(); }
  const VocabularyTree* tree() const { return tree_.get(); }
  std::shared_ptr<const WordClassing> shared_classing() const { return classing_; }
  std::shared_ptr<const VocabularyTree> shared_tree() const { return tree_; }

  BasicParameters<Real>& params() { return params_; }
  const BasicParameters<Real>& params() const { return params_; }
  // Replaces parameters; shapes must match the config.
  void set_params(BasicParameters<Real> params);

  // Candidate targets: every id except the start symbol, in id order.
  const std::vector<WordId>& targets() const { return targets_; }
  bool is_target(WordId w) const { return !config_.start_symbol || w != *config_.start_symbol; }
  // Class members that can be predicted, and classes that have any.
  const std::vector<WordId>& class_targets(ClassId c) const { return class_targets_[static_cast<std::size_t>(c)]; }
  const std::vector<ClassId>& active_classes() const { return active_classes_; }
  // Tree decisions for w (skipping the start symbol's branch).
  const std::vector<VocabularyTree::Step>& tree_path(WordId w) const { return paths_[static_cast<std::size_t>(w)]; }

  Projection<Real> project_detailed(std::span<const WordId> context, MacCounter* macs = nullptr) const;
  Vector project_context(std::span<const WordId> context, MacCounter* macs = nullptr) const;

  Real score_word(const Vector& p, WordId w, MacCounter* macs = nullptr) const;
  // psi for class c (class regime) or internal node n (tree regime).
  Real score_unit(const Vector& p, int unit, MacCounter* macs = nullptr) const;

  Real log_prob_standard(std::span<const WordId> context, WordId w, MacCounter* macs = nullptr) const;
  Real log_prob_class_factored(std::span<const WordId> context, WordId w, MacCounter* macs = nullptr) const;
  Real log_prob_tree_factored(std::span<const WordId> context, WordId w, MacCounter* macs = nullptr) const;
  // Dispatches on the configured regime.
  Real log_prob(std::span<const WordId> context, WordId w, MacCounter* macs = nullptr) const;
  // Same, with a precomputed projection.
  Real log_prob_from_projection(const Vector& p, WordId w, MacCounter* macs = nullptr) const;
  // Raw phi(w, h), no normalisation.
  Real unnormalised_log_score(std::span<const WordId> context, WordId w, MacCounter* macs = nullptr) const;

  // P(w|h) for every word under the configured regime; 0 for the start symbol.
  std::vector<Real> full_distribution(std::span<const WordId> context) const;

  template <typename Other>
  BasicModel<Other> cast() const {
    BasicModel<Other> out(config_, vocab_size_, classing_, tree_);
    out.set_params(params_.template cast<Other>());
    return out;
  }

 private:
  void check_context(std::span<const WordId> context) const;
  void check_word(WordId w) const;
  Real log_prob_class_from_projection(const Vector& p, WordId w, MacCounter* macs) const;
  Real log_prob_tree_from_projection(const Vector& p, WordId w, MacCounter* macs) const;
  Real log_prob_standard_from_projection(const Vector& p, WordId w, MacCounter* macs) const;

  ModelConfig config_;
  std::size_t vocab_size_ = 0;
  std::shared_ptr<const WordClassing> classing_;
  std::shared_ptr<const VocabularyTree> tree_;
  BasicParameters<Real> params_;
  std::vector<WordId> targets_;
  std::vector<std::vector<WordId>> class_targets_;
  std::vector<ClassId> active_classes_;
  std::vector<std::vector<VocabularyTree::Step>> paths_;
};

// log(sum exp(x)) with max subtraction.
template <typename Real>
Real log_sum_exp(std::span<const Real> scores);

// log sigma(x) = -log(1 + exp(-x)), stable for both signs.
template <typename Real>
Real log_sigmoid(Real x);

template <typename Real>
Real sigmoid(Real x);

extern template class BasicModel<float>;
extern template class BasicModel<double>;

using Model = BasicModel<float>;
using Model64 = BasicModel<double>;

}  // namespace snlm
