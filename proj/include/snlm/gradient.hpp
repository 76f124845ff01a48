#pragma once

#include <span>
#include <vector>

#include "snlm/corpus.hpp"
#include "snlm/model.hpp"
#include "snlm/noise_sampler.hpp"

namespace snlm {

// Gradient buffers shaped like the model parameters. Word, class and node
// rows are tracked so clearing and applying only visit what a batch touched;
// context transforms are always dense.
template <typename Real>
class BasicGradient {
 public:
  using Vector = typename BasicParameters<Real>::Vector;

  BasicGradient() = default;
  explicit BasicGradient(const BasicModel<Real>& model);

  BasicParameters<Real>& values() { return g_; }
  const BasicParameters<Real>& values() const { return g_; }

  void touch_context_word(WordId w);
  void touch_output_word(WordId w);
  void touch_unit(int u);

  const std::vector<WordId>& context_rows() const { return q_rows_; }
  const std::vector<WordId>& output_rows() const { return r_rows_; }
  const std::vector<int>& unit_rows() const { return s_rows_; }

  // Zeroes touched rows and the context transforms.
  void clear();
  // Marks every row touched (used after dense contributions such as L2).
  void touch_all();
  bool all_finite() const;

  // params += scale * gradient, over touched rows only.
  void apply_to(BasicParameters<Real>& params, Real scale) const;

 private:
  BasicParameters<Real> g_;
  std::vector<char> q_mark_, r_mark_, s_mark_;
  std::vector<WordId> q_rows_, r_rows_;
  std::vector<int> s_rows_;
};

// Noise words for each instance of a batch.
struct NoiseDraw {
  std::vector<std::vector<WordId>> words;
};

// Class-factored noise: k classes and k words from the target's class.
struct ClassNoiseDraw {
  std::vector<std::vector<ClassId>> classes;
  std::vector<std::vector<WordId>> words;
};

NoiseDraw draw_noise(std::span<const TrainingInstance> batch, int k, const NoiseSampler& sampler, Rng& rng);
template <typename Real>
ClassNoiseDraw draw_class_noise(const BasicModel<Real>& model, std::span<const TrainingInstance> batch, int k,
                                const NoiseSampler& sampler, Rng& rng);

// Sum of log P(w|h) over the batch minus (l2/2)|theta|^2, under the model's
// regime. Gradient is added to `grad`. Throws on non-finite results.
template <typename Real>
Real ml_gradient(const BasicModel<Real>& model, std::span<const TrainingInstance> batch, BasicGradient<Real>& grad,
                 Real l2 = 0, MacCounter* macs = nullptr);

// NCE objective J for a fixed noise draw, scoring words with exp(phi).
template <typename Real>
Real nce_objective(const BasicModel<Real>& model, std::span<const TrainingInstance> batch, const NoiseDraw& noise,
                   int k, const NoiseSampler& sampler);

template <typename Real>
Real nce_gradient(const BasicModel<Real>& model, std::span<const TrainingInstance> batch, const NoiseDraw& noise,
                  int k, const NoiseSampler& sampler, BasicGradient<Real>& grad, Real l2 = 0,
                  MacCounter* macs = nullptr);

// Gradient of E_noise[J]: every word n weighted by its expected count k P_n(n).
template <typename Real>
Real nce_expected_gradient(const BasicModel<Real>& model, std::span<const TrainingInstance> batch, int k,
                           const NoiseSampler& sampler, BasicGradient<Real>& grad);

// Class term (noise = class unigram) plus word term (noise = unigram within
// the target's class). A term with a single possible outcome is skipped.
template <typename Real>
Real nce_class_factored_objective(const BasicModel<Real>& model, std::span<const TrainingInstance> batch,
                                  const ClassNoiseDraw& noise, int k, const NoiseSampler& sampler);

template <typename Real>
Real nce_gradient_class_factored(const BasicModel<Real>& model, std::span<const TrainingInstance> batch,
                                 const ClassNoiseDraw& noise, int k, const NoiseSampler& sampler,
                                 BasicGradient<Real>& grad, Real l2 = 0, MacCounter* macs = nullptr);

using Gradient = BasicGradient<float>;

}  // namespace snlm
