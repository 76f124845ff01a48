#include "snlm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace snlm {

template <typename Real>
Real log_sum_exp(std::span<const Real> scores) {
  if (scores.empty()) return -std::numeric_limits<Real>::infinity();
  const Real m = *std::max_element(scores.begin(), scores.end());
  Real sum = 0;
  for (Real s : scores) sum += std::exp(s - m);
  return m + std::log(sum);
}

template <typename Real>
Real log_sigmoid(Real x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

template <typename Real>
Real sigmoid(Real x) {
  if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

namespace {

template <typename Real>
Real log_softmax_at(std::span<const Real> scores, std::size_t index) {
  return scores[index] - log_sum_exp(scores);
}

}  // namespace

template <typename Real>
BasicModel<Real>::BasicModel(const ModelConfig& config, std::size_t vocab_size,
                             std::shared_ptr<const WordClassing> classing, std::shared_ptr<const VocabularyTree> tree)
    : config_(config), vocab_size_(vocab_size), classing_(std::move(classing)), tree_(std::move(tree)) {
  if (config_.order < 2) throw Error("model: order must be >= 2");
  if (config_.dim < 1) throw Error("model: dimension must be >= 1");
  if (vocab_size_ < 2) throw Error("model: vocabulary needs at least two words");
  if (config_.start_symbol && (*config_.start_symbol < 0 || static_cast<std::size_t>(*config_.start_symbol) >= vocab_size_))
    throw Error("model: start symbol out of range");

  std::size_t units = 0;
  switch (config_.regime) {
    case Regime::standard:
      if (classing_ || tree_) throw Error("model: standard regime takes no classing or tree");
      break;
    case Regime::class_factored:
      if (!classing_ || tree_) throw Error("model: class regime needs a classing (and no tree)");
      if (classing_->num_words() != vocab_size_) throw Error("model: classing does not cover the vocabulary");
      units = static_cast<std::size_t>(classing_->num_classes());
      break;
    case Regime::tree_factored:
      if (!tree_ || classing_) throw Error("model: tree regime needs a tree (and no classing)");
      if (tree_->num_words() != vocab_size_) throw Error("model: tree does not cover the vocabulary");
      units = tree_->num_internal();
      break;
  }
  params_ = BasicParameters<Real>::zeros(vocab_size_, config_, units);

  for (std::size_t w = 0; w < vocab_size_; ++w)
    if (is_target(static_cast<WordId>(w))) targets_.push_back(static_cast<WordId>(w));

  if (classing_) {
    class_targets_.resize(static_cast<std::size_t>(classing_->num_classes()));
    for (ClassId c = 0; c < classing_->num_classes(); ++c) {
      for (WordId w : classing_->members(c))
        if (is_target(w)) class_targets_[static_cast<std::size_t>(c)].push_back(w);
      if (!class_targets_[static_cast<std::size_t>(c)].empty()) active_classes_.push_back(c);
    }
  }
  if (tree_) {
    paths_.resize(vocab_size_);
    for (std::size_t w = 0; w < vocab_size_; ++w)
      if (is_target(static_cast<WordId>(w))) paths_[w] = tree_->path(static_cast<WordId>(w), config_.start_symbol);
  }
}

template <typename Real>
void BasicModel<Real>::set_params(BasicParameters<Real> params) {
  const auto& z = params_;
  bool ok = params.Q.rows() == z.Q.rows() && params.Q.cols() == z.Q.cols() && params.R.rows() == z.R.rows() &&
            params.R.cols() == z.R.cols() && params.b.size() == z.b.size() && params.S.rows() == z.S.rows() &&
            params.S.cols() == z.S.cols() && params.t.size() == z.t.size() &&
            params.C_full.size() == z.C_full.size() && params.C_diag.size() == z.C_diag.size();
  for (std::size_t j = 0; ok && j < z.C_full.size(); ++j)
    ok = params.C_full[j].rows() == z.C_full[j].rows() && params.C_full[j].cols() == z.C_full[j].cols();
  for (std::size_t j = 0; ok && j < z.C_diag.size(); ++j) ok = params.C_diag[j].size() == z.C_diag[j].size();
  if (!ok) throw Error("model: parameter shapes do not match the configuration");
  params_ = std::move(params);
}

template <typename Real>
void BasicModel<Real>::check_context(std::span<const WordId> context) const {
  if (static_cast<int>(context.size()) != context_size())
    throw Error("model: context has " + std::to_string(context.size()) + " words, expected " +
                std::to_string(context_size()));
  for (WordId w : context) check_word(w);
}

template <typename Real>
void BasicModel<Real>::check_word(WordId w) const {
  if (w < 0 || static_cast<std::size_t>(w) >= vocab_size_) throw Error("model: word id " + std::to_string(w) + " out of range");
}

template <typename Real>
Projection<Real> BasicModel<Real>::project_detailed(std::span<const WordId> context, MacCounter* macs) const {
  check_context(context);
  const auto D = static_cast<Eigen::Index>(config_.dim);
  Projection<Real> out;
  out.pre = Vector::Zero(D);
  for (std::size_t j = 0; j < context.size(); ++j) {
    const auto q = params_.Q.row(context[j]).transpose();
    if (config_.diagonal_contexts) {
      out.pre.array() += params_.C_diag[j].array() * q.array();
      if (macs) macs->projection += static_cast<std::uint64_t>(D);
    } else {
      out.pre.noalias() += params_.C_full[j] * q;
      if (macs) macs->projection += static_cast<std::uint64_t>(D * D);
    }
  }
  out.p = out.pre.cwiseMax(Real(0));
  return out;
}

template <typename Real>
typename BasicModel<Real>::Vector BasicModel<Real>::project_context(std::span<const WordId> context, MacCounter* macs) const {
  return project_detailed(context, macs).p;
}

template <typename Real>
Real BasicModel<Real>::score_word(const Vector& p, WordId w, MacCounter* macs) const {
  check_word(w);
  if (macs) macs->output += static_cast<std::uint64_t>(config_.dim);
  return params_.R.row(w).dot(p.transpose()) + params_.b(w);
}

template <typename Real>
Real BasicModel<Real>::score_unit(const Vector& p, int unit, MacCounter* macs) const {
  if (macs) macs->output += static_cast<std::uint64_t>(config_.dim);
  return params_.S.row(unit).dot(p.transpose()) + params_.t(unit);
}

template <typename Real>
Real BasicModel<Real>::log_prob_standard_from_projection(const Vector& p, WordId w, MacCounter* macs) const {
  check_word(w);
  if (!is_target(w)) throw Error("model: the start symbol is never predicted");
  std::vector<Real> scores(targets_.size());
  std::size_t index = 0;
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    scores[i] = score_word(p, targets_[i], macs);
    if (targets_[i] == w) index = i;
  }
  return log_softmax_at<Real>(scores, index);
}

template <typename Real>
Real BasicModel<Real>::log_prob_class_from_projection(const Vector& p, WordId w, MacCounter* macs) const {
  if (!classing_) throw Error("model: no word classing");
  check_word(w);
  if (!is_target(w)) throw Error("model: the start symbol is never predicted");
  const ClassId c = classing_->class_of(w);

  std::vector<Real> class_scores(active_classes_.size());
  std::size_t class_index = 0;
  for (std::size_t i = 0; i < active_classes_.size(); ++i) {
    class_scores[i] = score_unit(p, active_classes_[i], macs);
    if (active_classes_[i] == c) class_index = i;
  }
  const auto& members = class_targets(c);
  std::vector<Real> word_scores(members.size());
  std::size_t word_index = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    word_scores[i] = score_word(p, members[i], macs);
    if (members[i] == w) word_index = i;
  }
  return log_softmax_at<Real>(class_scores, class_index) + log_softmax_at<Real>(word_scores, word_index);
}

template <typename Real>
Real BasicModel<Real>::log_prob_tree_from_projection(const Vector& p, WordId w, MacCounter* macs) const {
  if (!tree_) throw Error("model: no vocabulary tree");
  check_word(w);
  if (!is_target(w)) throw Error("model: the start symbol is never predicted");
  Real lp = 0;
  for (const auto& step : tree_path(w)) {
    const Real psi = score_unit(p, step.internal, macs);
    lp += log_sigmoid(step.go_left ? psi : -psi);
  }
  return lp;
}

template <typename Real>
Real BasicModel<Real>::log_prob_standard(std::span<const WordId> context, WordId w, MacCounter* macs) const {
  return log_prob_standard_from_projection(project_context(context, macs), w, macs);
}

template <typename Real>
Real BasicModel<Real>::log_prob_class_factored(std::span<const WordId> context, WordId w, MacCounter* macs) const {
  return log_prob_class_from_projection(project_context(context, macs), w, macs);
}

template <typename Real>
Real BasicModel<Real>::log_prob_tree_factored(std::span<const WordId> context, WordId w, MacCounter* macs) const {
  return log_prob_tree_from_projection(project_context(context, macs), w, macs);
}

template <typename Real>
Real BasicModel<Real>::log_prob_from_projection(const Vector& p, WordId w, MacCounter* macs) const {
  switch (config_.regime) {
    case Regime::standard:
      return log_prob_standard_from_projection(p, w, macs);
    case Regime::class_factored:
      return log_prob_class_from_projection(p, w, macs);
    case Regime::tree_factored:
      return log_prob_tree_from_projection(p, w, macs);
  }
  throw Error("model: bad regime");
}

template <typename Real>
Real BasicModel<Real>::log_prob(std::span<const WordId> context, WordId w, MacCounter* macs) const {
  return log_prob_from_projection(project_context(context, macs), w, macs);
}

template <typename Real>
Real BasicModel<Real>::unnormalised_log_score(std::span<const WordId> context, WordId w, MacCounter* macs) const {
  return score_word(project_context(context, macs), w, macs);
}

template <typename Real>
std::vector<Real> BasicModel<Real>::full_distribution(std::span<const WordId> context) const {
  const Vector p = project_context(context);
  std::vector<Real> probs(vocab_size_, Real(0));
  switch (config_.regime) {
    case Regime::standard: {
      std::vector<Real> scores(targets_.size());
      for (std::size_t i = 0; i < targets_.size(); ++i) scores[i] = score_word(p, targets_[i]);
      const Real z = log_sum_exp<Real>(scores);
      for (std::size_t i = 0; i < targets_.size(); ++i) probs[static_cast<std::size_t>(targets_[i])] = std::exp(scores[i] - z);
      break;
    }
    case Regime::class_factored: {
      std::vector<Real> class_scores(active_classes_.size());
      for (std::size_t i = 0; i < active_classes_.size(); ++i) class_scores[i] = score_unit(p, active_classes_[i]);
      const Real zc = log_sum_exp<Real>(class_scores);
      for (std::size_t i = 0; i < active_classes_.size(); ++i) {
        const auto& members = class_targets(active_classes_[i]);
        std::vector<Real> scores(members.size());
        for (std::size_t m = 0; m < members.size(); ++m) scores[m] = score_word(p, members[m]);
        const Real zw = log_sum_exp<Real>(scores);
        for (std::size_t m = 0; m < members.size(); ++m)
          probs[static_cast<std::size_t>(members[m])] = std::exp(class_scores[i] - zc + scores[m] - zw);
      }
      break;
    }
    case Regime::tree_factored: {
      std::vector<Real> psi(tree_->num_internal());
      for (std::size_t n = 0; n < psi.size(); ++n) psi[n] = score_unit(p, static_cast<int>(n));
      for (WordId w : targets_) {
        Real lp = 0;
        for (const auto& step : tree_path(w)) lp += log_sigmoid(step.go_left ? psi[static_cast<std::size_t>(step.internal)] : -psi[static_cast<std::size_t>(step.internal)]);
        probs[static_cast<std::size_t>(w)] = std::exp(lp);
      }
      break;
    }
  }
  return probs;
}

template float log_sum_exp<float>(std::span<const float>);
template double log_sum_exp<double>(std::span<const double>);
template float log_sigmoid<float>(float);
template double log_sigmoid<double>(double);
template float sigmoid<float>(float);
template double sigmoid<double>(double);

template class BasicModel<float>;
template class BasicModel<double>;

}  // namespace snlm
