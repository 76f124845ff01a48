#include "snlm/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "snlm/random.hpp"

namespace snlm {

std::string_view algorithm_name(Algorithm a) { return a == Algorithm::nce ? "nce" : "sgd"; }

Algorithm parse_algorithm(std::string_view name) {
  if (name == "nce") return Algorithm::nce;
  if (name == "sgd" || name == "ml" || name == "ml_sgd") return Algorithm::ml_sgd;
  throw Error("unknown algorithm '" + std::string(name) + "'");
}

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("learning rate must be > 0");
  if (minibatch_size < 1) throw Error("minibatch size must be >= 1");
  if (epochs < 0) throw Error("epochs must be >= 0");
  if (!(l2_strength >= 0.0)) throw Error("l2 strength must be >= 0");
  if (algorithm == Algorithm::nce && noise_samples < 1) throw Error("nce needs k >= 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) throw Error("validation fraction must be in [0, 1)");
}

template <typename Real>
void initialize_parameters(BasicModel<Real>& model, std::span<const std::uint64_t> counts, std::uint64_t seed) {
  if (counts.size() != model.vocab_size()) throw Error("init: counts do not match the vocabulary");
  auto& p = model.params();
  Rng rng(seed);
  for (Eigen::Index i = 0; i < p.Q.size(); ++i) p.Q.data()[i] = static_cast<Real>(0.1 * standard_normal(rng));
  for (Eigen::Index i = 0; i < p.R.size(); ++i) p.R.data()[i] = static_cast<Real>(0.1 * standard_normal(rng));

  const int width = model.context_size();
  for (auto& c : p.C_diag) c.setConstant(Real(1) / static_cast<Real>(width));
  for (auto& c : p.C_full) c = BasicParameters<Real>::Matrix::Identity(model.dim(), model.dim()) / static_cast<Real>(width);

  std::vector<double> mass(counts.size(), 0.0);
  double total = 0.0;
  for (WordId w : model.targets()) total += static_cast<double>(counts[static_cast<std::size_t>(w)]) + 1.0;
  for (WordId w : model.targets()) mass[static_cast<std::size_t>(w)] = (static_cast<double>(counts[static_cast<std::size_t>(w)]) + 1.0) / total;
  p.b.setZero();
  for (WordId w : model.targets()) p.b(w) = static_cast<Real>(std::log(mass[static_cast<std::size_t>(w)]));

  p.S.setZero();
  p.t.setZero();
  if (const auto* classing = model.classing()) {
    for (ClassId c : model.active_classes()) {
      double m = 0.0;
      for (WordId w : model.class_targets(c)) m += mass[static_cast<std::size_t>(w)];
      p.t(c) = static_cast<Real>(std::log(m));
    }
    (void)classing;
  }
  if (const auto* tree = model.tree()) {
    // Subtree masses bottom-up over the preorder array.
    const auto& nodes = tree->nodes();
    std::vector<double> sub(nodes.size(), 0.0);
    for (std::size_t i = nodes.size(); i-- > 0;) {
      const auto& n = nodes[i];
      sub[i] = n.is_leaf() ? mass[static_cast<std::size_t>(n.word)]
                           : sub[static_cast<std::size_t>(n.left)] + sub[static_cast<std::size_t>(n.right)];
    }
    for (const auto& n : nodes) {
      if (n.is_leaf()) continue;
      const double l = sub[static_cast<std::size_t>(n.left)], r = sub[static_cast<std::size_t>(n.right)];
      if (l > 0.0 && r > 0.0) p.t(n.internal) = static_cast<Real>(std::log(l / r));
    }
  }
}

template void initialize_parameters<float>(BasicModel<float>&, std::span<const std::uint64_t>, std::uint64_t);
template void initialize_parameters<double>(BasicModel<double>&, std::span<const std::uint64_t>, std::uint64_t);

template <typename Real>
double instance_perplexity(const BasicModel<Real>& model, std::span<const TrainingInstance> instances) {
  if (instances.empty()) throw Error("perplexity: no instances");
  double total = 0.0;
  for (const auto& inst : instances) total += static_cast<double>(model.log_prob(inst.context, inst.target));
  return std::exp(-total / static_cast<double>(instances.size()));
}

template double instance_perplexity<float>(const BasicModel<float>&, std::span<const TrainingInstance>);
template double instance_perplexity<double>(const BasicModel<double>&, std::span<const TrainingInstance>);

std::vector<std::uint64_t> target_counts(std::span<const TrainingInstance> instances, std::size_t vocab_size) {
  std::vector<std::uint64_t> counts(vocab_size, 0);
  for (const auto& inst : instances) {
    if (inst.target < 0 || static_cast<std::size_t>(inst.target) >= vocab_size) throw Error("instance target out of range");
    ++counts[static_cast<std::size_t>(inst.target)];
  }
  return counts;
}

void TrainingLog::write(std::ostream& out) const {
  for (const auto& e : epochs)
    out << e.epoch << '\t' << e.train_ppl << '\t' << e.valid_ppl << '\t' << e.learning_rate << '\t' << e.seconds << '\n';
}

TrainingLog train(Model& model, std::span<const TrainingInstance> train_set, std::span<const TrainingInstance> valid_set,
                  const TrainingConfig& config, const std::function<void(const EpochStats&)>& on_epoch) {
  config.validate();
  if (train_set.empty()) throw Error("train: empty training set");
  if (valid_set.empty()) valid_set = train_set;
  if (config.algorithm == Algorithm::nce && model.config().regime == Regime::tree_factored)
    throw Error("train: nce is available for the standard and class regimes only");

  std::optional<NoiseSampler> sampler;
  if (config.algorithm == Algorithm::nce) {
    const auto counts = target_counts(train_set, model.vocab_size());
    const auto unigram = unigram_from_counts(counts, config.noise_epsilon, model.config().start_symbol);
    sampler = model.classing() ? NoiseSampler(unigram, *model.classing()) : NoiseSampler(unigram);
  }

  TrainingLog log;
  log.initial_valid_ppl = instance_perplexity(model, valid_set);
  double previous_valid = log.initial_valid_ppl;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.rng_seed);
  Gradient grad(model);
  std::vector<TrainingInstance> batch;
  double lr = config.learning_rate;
  const int k = config.noise_samples;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochStats stats;
    stats.epoch = epoch;
    stats.learning_rate = lr;
    shuffle(order.begin(), order.end(), rng);

    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(config.minibatch_size)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(config.minibatch_size));
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) batch.push_back(train_set[order[i]]);

      grad.clear();
      if (config.algorithm == Algorithm::ml_sgd) {
        ml_gradient<float>(model, batch, grad, 0.0f, &stats.macs);
      } else if (model.classing()) {
        const auto noise = draw_class_noise(model, batch, k, *sampler, rng);
        nce_gradient_class_factored<float>(model, batch, noise, k, *sampler, grad, 0.0f, &stats.macs);
      } else {
        const auto noise = draw_noise(batch, k, *sampler, rng);
        nce_gradient<float>(model, batch, noise, k, *sampler, grad, 0.0f, &stats.macs);
      }
      stats.output_rows_touched += grad.output_rows().size() + grad.unit_rows().size();

      // theta <- (1 - lr*l2) theta + lr * mean gradient.
      auto& params = model.params();
      if (config.l2_strength > 0.0) {
        const auto decay = static_cast<float>(1.0 - lr * config.l2_strength);
        params.for_each_family([&](std::string_view, std::span<float> d) {
          for (float& x : d) x *= decay;
        });
      }
      grad.apply_to(params, static_cast<float>(lr / static_cast<double>(batch.size())));
    }

    stats.train_ppl = instance_perplexity(model, train_set);
    stats.valid_ppl = instance_perplexity(model, valid_set);
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats);

    if (!std::isfinite(stats.valid_ppl) || stats.valid_ppl > 10.0 * log.initial_valid_ppl)
      throw Error("train: diverged at epoch " + std::to_string(epoch) + " (validation perplexity " +
                  std::to_string(stats.valid_ppl) + ")");
    if (stats.valid_ppl > previous_valid) lr *= 0.5;
    previous_valid = stats.valid_ppl;
  }
  return log;
}

}  // namespace snlm
