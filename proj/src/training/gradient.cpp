#include "snlm/gradient.hpp"

#include <cmath>

namespace snlm {

template <typename Real>
BasicGradient<Real>::BasicGradient(const BasicModel<Real>& model)
    : g_(BasicParameters<Real>::zeros(model.vocab_size(), model.config(), static_cast<std::size_t>(model.params().S.rows()))),
      q_mark_(model.vocab_size(), 0), r_mark_(model.vocab_size(), 0),
      s_mark_(static_cast<std::size_t>(model.params().S.rows()), 0) {}

template <typename Real>
void BasicGradient<Real>::touch_context_word(WordId w) {
  if (!q_mark_[static_cast<std::size_t>(w)]) {
    q_mark_[static_cast<std::size_t>(w)] = 1;
    q_rows_.push_back(w);
  }
}

template <typename Real>
void BasicGradient<Real>::touch_output_word(WordId w) {
  if (!r_mark_[static_cast<std::size_t>(w)]) {
    r_mark_[static_cast<std::size_t>(w)] = 1;
    r_rows_.push_back(w);
  }
}

template <typename Real>
void BasicGradient<Real>::touch_unit(int u) {
  if (!s_mark_[static_cast<std::size_t>(u)]) {
    s_mark_[static_cast<std::size_t>(u)] = 1;
    s_rows_.push_back(u);
  }
}

template <typename Real>
void BasicGradient<Real>::clear() {
  for (WordId w : q_rows_) g_.Q.row(w).setZero(), q_mark_[static_cast<std::size_t>(w)] = 0;
  for (WordId w : r_rows_) g_.R.row(w).setZero(), g_.b(w) = 0, r_mark_[static_cast<std::size_t>(w)] = 0;
  for (int u : s_rows_) g_.S.row(u).setZero(), g_.t(u) = 0, s_mark_[static_cast<std::size_t>(u)] = 0;
  q_rows_.clear();
  r_rows_.clear();
  s_rows_.clear();
  for (auto& c : g_.C_full) c.setZero();
  for (auto& c : g_.C_diag) c.setZero();
}

template <typename Real>
void BasicGradient<Real>::touch_all() {
  for (std::size_t w = 0; w < q_mark_.size(); ++w) touch_context_word(static_cast<WordId>(w));
  for (std::size_t w = 0; w < r_mark_.size(); ++w) touch_output_word(static_cast<WordId>(w));
  for (std::size_t u = 0; u < s_mark_.size(); ++u) touch_unit(static_cast<int>(u));
}

template <typename Real>
bool BasicGradient<Real>::all_finite() const {
  for (WordId w : q_rows_)
    if (!g_.Q.row(w).allFinite()) return false;
  for (WordId w : r_rows_)
    if (!g_.R.row(w).allFinite() || !std::isfinite(g_.b(w))) return false;
  for (int u : s_rows_)
    if (!g_.S.row(u).allFinite() || !std::isfinite(g_.t(u))) return false;
  for (const auto& c : g_.C_full)
    if (!c.allFinite()) return false;
  for (const auto& c : g_.C_diag)
    if (!c.allFinite()) return false;
  return true;
}

template <typename Real>
void BasicGradient<Real>::apply_to(BasicParameters<Real>& params, Real scale) const {
  for (WordId w : q_rows_) params.Q.row(w) += scale * g_.Q.row(w);
  for (WordId w : r_rows_) params.R.row(w) += scale * g_.R.row(w), params.b(w) += scale * g_.b(w);
  for (int u : s_rows_) params.S.row(u) += scale * g_.S.row(u), params.t(u) += scale * g_.t(u);
  for (std::size_t j = 0; j < g_.C_full.size(); ++j) params.C_full[j] += scale * g_.C_full[j];
  for (std::size_t j = 0; j < g_.C_diag.size(); ++j) params.C_diag[j] += scale * g_.C_diag[j];
}

namespace {

template <typename Real>
using Vec = typename BasicParameters<Real>::Vector;

// Per-instance backward pass state: the projection, its gradient, and the
// buffers that output units add into.
template <typename Real>
struct Backward {
  const BasicModel<Real>& model;
  BasicGradient<Real>* grad;
  MacCounter* macs;
  Projection<Real> proj;
  Vec<Real> g_p;

  Backward(const BasicModel<Real>& m, std::span<const WordId> context, BasicGradient<Real>* g, MacCounter* c)
      : model(m), grad(g), macs(c), proj(m.project_detailed(context, c)) {
    if (grad) g_p = Vec<Real>::Zero(m.dim());
  }

  // d objective / d phi(w) = coef.
  void word(WordId w, Real coef) {
    if (!grad) return;
    auto& g = grad->values();
    const auto& params = model.params();
    grad->touch_output_word(w);
    g.R.row(w) += coef * proj.p.transpose();
    g.b(w) += coef;
    g_p += coef * params.R.row(w).transpose();
    if (macs) macs->output += 2 * static_cast<std::uint64_t>(model.dim());
  }

  // d objective / d psi(u) = coef.
  void unit(int u, Real coef) {
    if (!grad) return;
    auto& g = grad->values();
    const auto& params = model.params();
    grad->touch_unit(u);
    g.S.row(u) += coef * proj.p.transpose();
    g.t(u) += coef;
    g_p += coef * params.S.row(u).transpose();
    if (macs) macs->output += 2 * static_cast<std::uint64_t>(model.dim());
  }

  void finish(std::span<const WordId> context) {
    if (!grad) return;
    const auto& params = model.params();
    auto& g = grad->values();
    const auto D = static_cast<std::uint64_t>(model.dim());
    // Rectifier derivative is 0 at 0.
    const Vec<Real> g_a = (proj.pre.array() > Real(0)).select(g_p, Vec<Real>::Zero(model.dim()));
    for (std::size_t j = 0; j < context.size(); ++j) {
      const WordId w = context[j];
      grad->touch_context_word(w);
      const auto q = params.Q.row(w).transpose();
      if (model.config().diagonal_contexts) {
        g.C_diag[j].array() += g_a.array() * q.array();
        g.Q.row(w).array() += (params.C_diag[j].array() * g_a.array()).transpose();
        if (macs) macs->projection += 2 * D;
      } else {
        g.C_full[j].noalias() += g_a * q.transpose();
        g.Q.row(w).noalias() += (params.C_full[j].transpose() * g_a).transpose();
        if (macs) macs->projection += 2 * D * D;
      }
    }
  }
};

template <typename Real>
Real softmax_terms(Backward<Real>& bw, std::span<const Real> scores, std::size_t target,
                   const auto& emit /* (index, coef) */) {
  const Real z = log_sum_exp(scores);
  if (bw.grad)
    for (std::size_t i = 0; i < scores.size(); ++i) emit(i, (i == target ? Real(1) : Real(0)) - std::exp(scores[i] - z));
  return scores[target] - z;
}

template <typename Real>
Real add_l2(const BasicModel<Real>& model, BasicGradient<Real>* grad, Real l2) {
  if (l2 == Real(0)) return 0;
  std::vector<std::span<const Real>> theta;
  model.params().for_each_family([&](std::string_view, std::span<const Real> d) { theta.push_back(d); });
  Real penalty = 0;
  for (auto d : theta)
    for (Real x : d) penalty += x * x;
  if (grad) {
    std::size_t i = 0;
    grad->values().for_each_family([&](std::string_view, std::span<Real> g) {
      const auto d = theta[i++];
      for (std::size_t e = 0; e < g.size(); ++e) g[e] -= l2 * d[e];
    });
    grad->touch_all();
  }
  return -Real(0.5) * l2 * penalty;
}

template <typename Real>
void check_finite(Real objective, const BasicGradient<Real>* grad, const char* what) {
  if (!std::isfinite(objective) || (grad && !grad->all_finite()))
    throw Error(std::string(what) + ": non-finite objective or gradient (learning rate or initialisation blew up)");
}

template <typename Real>
Real ml_instance(const BasicModel<Real>& model, const TrainingInstance& inst, BasicGradient<Real>* grad, MacCounter* macs) {
  Backward<Real> bw(model, inst.context, grad, macs);
  const auto& p = bw.proj.p;
  const WordId w = inst.target;
  if (!model.is_target(w)) throw Error("ml_gradient: the start symbol cannot be a target");
  Real lp = 0;
  switch (model.config().regime) {
    case Regime::standard: {
      const auto& targets = model.targets();
      std::vector<Real> scores(targets.size());
      std::size_t index = 0;
      for (std::size_t i = 0; i < targets.size(); ++i) {
        scores[i] = model.score_word(p, targets[i], macs);
        if (targets[i] == w) index = i;
      }
      lp = softmax_terms<Real>(bw, scores, index, [&](std::size_t i, Real c) { bw.word(targets[i], c); });
      break;
    }
    case Regime::class_factored: {
      const ClassId c = model.classing()->class_of(w);
      const auto& classes = model.active_classes();
      std::vector<Real> cs(classes.size());
      std::size_t ci = 0;
      for (std::size_t i = 0; i < classes.size(); ++i) {
        cs[i] = model.score_unit(p, classes[i], macs);
        if (classes[i] == c) ci = i;
      }
      lp = softmax_terms<Real>(bw, cs, ci, [&](std::size_t i, Real coef) { bw.unit(classes[i], coef); });
      const auto& members = model.class_targets(c);
      std::vector<Real> ws(members.size());
      std::size_t wi = 0;
      for (std::size_t i = 0; i < members.size(); ++i) {
        ws[i] = model.score_word(p, members[i], macs);
        if (members[i] == w) wi = i;
      }
      lp += softmax_terms<Real>(bw, ws, wi, [&](std::size_t i, Real coef) { bw.word(members[i], coef); });
      break;
    }
    case Regime::tree_factored: {
      for (const auto& step : model.tree_path(w)) {
        const Real psi = model.score_unit(p, step.internal, macs);
        lp += log_sigmoid(step.go_left ? psi : -psi);
        bw.unit(step.internal, (step.go_left ? Real(1) : Real(0)) - sigmoid(psi));
      }
      break;
    }
  }
  bw.finish(inst.context);
  return lp;
}

// One binary NCE discrimination: the data item against weighted noise items.
// `score(unit)` returns the unnormalised log score, `log_kpn(unit)` returns
// log(k P_n(unit)), `emit(unit, coef)` backpropagates d J / d score.
template <typename Real, typename Score, typename LogKPn, typename Emit>
Real nce_term(int target, std::span<const int> noise, std::span<const Real> weights, Score&& score, LogKPn&& log_kpn,
              Emit&& emit) {
  const Real delta = score(target) - log_kpn(target);
  Real J = log_sigmoid(delta);
  emit(target, sigmoid(-delta));
  for (std::size_t j = 0; j < noise.size(); ++j) {
    const Real weight = weights.empty() ? Real(1) : weights[j];
    const Real d = score(noise[j]) - log_kpn(noise[j]);
    J += weight * log_sigmoid(-d);
    emit(noise[j], -weight * sigmoid(d));
  }
  return J;
}

template <typename Real>
Real checked_log(double p, const char* what) {
  if (!(p > 0.0)) throw Error(std::string(what) + ": noise probability is zero for a scored item");
  return static_cast<Real>(std::log(p));
}

template <typename Real>
Real nce_instance(const BasicModel<Real>& model, const TrainingInstance& inst, std::span<const int> noise,
                  std::span<const Real> weights, int k, const NoiseSampler& sampler, BasicGradient<Real>* grad,
                  MacCounter* macs) {
  Backward<Real> bw(model, inst.context, grad, macs);
  const Real log_k = static_cast<Real>(std::log(static_cast<double>(k)));
  const Real J = nce_term<Real>(
      inst.target, noise, weights, [&](int w) { return model.score_word(bw.proj.p, w, macs); },
      [&](int w) { return log_k + checked_log<Real>(sampler.word_probability(w), "nce"); },
      [&](int w, Real coef) { bw.word(w, coef); });
  bw.finish(inst.context);
  return J;
}

template <typename Real>
Real class_nce_instance(const BasicModel<Real>& model, const TrainingInstance& inst, std::span<const int> class_noise,
                        std::span<const int> word_noise, int k, const NoiseSampler& sampler,
                        BasicGradient<Real>* grad, MacCounter* macs) {
  Backward<Real> bw(model, inst.context, grad, macs);
  const Real log_k = static_cast<Real>(std::log(static_cast<double>(k)));
  const ClassId c = model.classing()->class_of(inst.target);
  Real J = 0;
  if (model.active_classes().size() > 1) {
    J += nce_term<Real>(
        c, class_noise, {}, [&](int u) { return model.score_unit(bw.proj.p, u, macs); },
        [&](int u) { return log_k + checked_log<Real>(sampler.class_probability(u), "class nce"); },
        [&](int u, Real coef) { bw.unit(u, coef); });
  }
  if (model.class_targets(c).size() > 1) {
    J += nce_term<Real>(
        inst.target, word_noise, {}, [&](int w) { return model.score_word(bw.proj.p, w, macs); },
        [&](int w) { return log_k + checked_log<Real>(sampler.within_class_probability(w), "class nce"); },
        [&](int w, Real coef) { bw.word(w, coef); });
  }
  bw.finish(inst.context);
  return J;
}

void check_k(int k) {
  if (k < 1) throw Error("nce: need at least one noise sample");
}

}  // namespace

NoiseDraw draw_noise(std::span<const TrainingInstance> batch, int k, const NoiseSampler& sampler, Rng& rng) {
  check_k(k);
  NoiseDraw draw;
  draw.words.resize(batch.size());
  for (auto& words : draw.words) {
    words.resize(static_cast<std::size_t>(k));
    for (auto& w : words) w = sampler.sample_word(rng);
  }
  return draw;
}

template <typename Real>
ClassNoiseDraw draw_class_noise(const BasicModel<Real>& model, std::span<const TrainingInstance> batch, int k,
                                const NoiseSampler& sampler, Rng& rng) {
  check_k(k);
  if (!model.classing() || !sampler.has_classes()) throw Error("class nce: model and sampler need a classing");
  ClassNoiseDraw draw;
  draw.classes.resize(batch.size());
  draw.words.resize(batch.size());
  const bool class_term = model.active_classes().size() > 1;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (class_term) {
      draw.classes[i].resize(static_cast<std::size_t>(k));
      for (auto& c : draw.classes[i]) c = sampler.sample_class(rng);
    }
    const ClassId c = model.classing()->class_of(batch[i].target);
    if (model.class_targets(c).size() > 1) {
      draw.words[i].resize(static_cast<std::size_t>(k));
      for (auto& w : draw.words[i]) w = sampler.sample_within_class(c, rng);
    }
  }
  return draw;
}

template <typename Real>
Real ml_gradient(const BasicModel<Real>& model, std::span<const TrainingInstance> batch, BasicGradient<Real>& grad,
                 Real l2, MacCounter* macs) {
  if (batch.empty()) throw Error("ml_gradient: empty batch");
  Real objective = 0;
  for (const auto& inst : batch) objective += ml_instance(model, inst, &grad, macs);
  objective += add_l2(model, &grad, l2);
  check_finite(objective, &grad, "ml_gradient");
  return objective;
}

template <typename Real>
Real nce_objective(const BasicModel<Real>& model, std::span<const TrainingInstance> batch, const NoiseDraw& noise,
                   int k, const NoiseSampler& sampler) {
  check_k(k);
  if (noise.words.size() != batch.size()) throw Error("nce: noise draw does not match the batch");
  Real J = 0;
  for (std::size_t i = 0; i < batch.size(); ++i)
    J += nce_instance<Real>(model, batch[i], noise.words[i], {}, k, sampler, nullptr, nullptr);
  return J;
}

template <typename Real>
Real nce_gradient(const BasicModel<Real>& model, std::span<const TrainingInstance> batch, const NoiseDraw& noise,
                  int k, const NoiseSampler& sampler, BasicGradient<Real>& grad, Real l2, MacCounter* macs) {
  check_k(k);
  if (batch.empty()) throw Error("nce_gradient: empty batch");
  if (noise.words.size() != batch.size()) throw Error("nce: noise draw does not match the batch");
  Real J = 0;
  for (std::size_t i = 0; i < batch.size(); ++i)
    J += nce_instance<Real>(model, batch[i], noise.words[i], {}, k, sampler, &grad, macs);
  J += add_l2(model, &grad, l2);
  check_finite(J, &grad, "nce_gradient");
  return J;
}

template <typename Real>
Real nce_expected_gradient(const BasicModel<Real>& model, std::span<const TrainingInstance> batch, int k,
                           const NoiseSampler& sampler, BasicGradient<Real>& grad) {
  check_k(k);
  std::vector<int> support;
  std::vector<Real> weights;
  for (WordId w : model.targets()) {
    const double p = sampler.word_probability(w);
    if (p <= 0.0) continue;
    support.push_back(w);
    weights.push_back(static_cast<Real>(k * p));
  }
  Real J = 0;
  for (const auto& inst : batch) J += nce_instance<Real>(model, inst, support, weights, k, sampler, &grad, nullptr);
  check_finite(J, &grad, "nce_expected_gradient");
  return J;
}

template <typename Real>
Real nce_class_factored_objective(const BasicModel<Real>& model, std::span<const TrainingInstance> batch,
                                  const ClassNoiseDraw& noise, int k, const NoiseSampler& sampler) {
  check_k(k);
  if (!model.classing()) throw Error("class nce: model has no classing");
  if (noise.classes.size() != batch.size() || noise.words.size() != batch.size())
    throw Error("class nce: noise draw does not match the batch");
  Real J = 0;
  for (std::size_t i = 0; i < batch.size(); ++i)
    J += class_nce_instance<Real>(model, batch[i], noise.classes[i], noise.words[i], k, sampler, nullptr, nullptr);
  return J;
}

template <typename Real>
Real nce_gradient_class_factored(const BasicModel<Real>& model, std::span<const TrainingInstance> batch,
                                 const ClassNoiseDraw& noise, int k, const NoiseSampler& sampler,
                                 BasicGradient<Real>& grad, Real l2, MacCounter* macs) {
  check_k(k);
  if (batch.empty()) throw Error("class nce: empty batch");
  if (!model.classing()) throw Error("class nce: model has no classing");
  if (noise.classes.size() != batch.size() || noise.words.size() != batch.size())
    throw Error("class nce: noise draw does not match the batch");
  Real J = 0;
  for (std::size_t i = 0; i < batch.size(); ++i)
    J += class_nce_instance<Real>(model, batch[i], noise.classes[i], noise.words[i], k, sampler, &grad, macs);
  J += add_l2(model, &grad, l2);
  check_finite(J, &grad, "class nce");
  return J;
}

#define SNLM_INSTANTIATE(Real)                                                                                      \
  template class BasicGradient<Real>;                                                                               \
  template ClassNoiseDraw draw_class_noise<Real>(const BasicModel<Real>&, std::span<const TrainingInstance>, int,   \
                                                 const NoiseSampler&, Rng&);                                        \
  template Real ml_gradient<Real>(const BasicModel<Real>&, std::span<const TrainingInstance>, BasicGradient<Real>&, \
                                  Real, MacCounter*);                                                               \
  template Real nce_objective<Real>(const BasicModel<Real>&, std::span<const TrainingInstance>, const NoiseDraw&,   \
                                    int, const NoiseSampler&);                                                      \
  template Real nce_gradient<Real>(const BasicModel<Real>&, std::span<const TrainingInstance>, const NoiseDraw&,    \
                                   int, const NoiseSampler&, BasicGradient<Real>&, Real, MacCounter*);              \
  template Real nce_expected_gradient<Real>(const BasicModel<Real>&, std::span<const TrainingInstance>, int,        \
                                            const NoiseSampler&, BasicGradient<Real>&);                             \
  template Real nce_class_factored_objective<Real>(const BasicModel<Real>&, std::span<const TrainingInstance>,      \
                                                   const ClassNoiseDraw&, int, const NoiseSampler&);                \
  template Real nce_gradient_class_factored<Real>(const BasicModel<Real>&, std::span<const TrainingInstance>,       \
                                                  const ClassNoiseDraw&, int, const NoiseSampler&,                  \
                                                  BasicGradient<Real>&, Real, MacCounter*);

SNLM_INSTANTIATE(float)
SNLM_INSTANTIATE(double)

}  // namespace snlm
