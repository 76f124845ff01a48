#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "snlm/common.hpp"

namespace snlm {

enum class Regime : std::uint32_t { standard = 0, class_factored = 1, tree_factored = 2 };

std::string_view regime_name(Regime r);
// Accepts "standard", "class", "tree" (and the long forms).
Regime parse_regime(std::string_view name);

struct ModelConfig {
  int order = 5;
  int dim = 500;
  Regime regime = Regime::class_factored;
  bool diagonal_contexts = true;
  // Word that is never predicted (normally <s>). Excluded from every softmax.
  std::optional<WordId> start_symbol;

  bool operator==(const ModelConfig&) const = default;
};

// All trainable parameters. Matrices are row-major so that per-word rows
// (q_w, r_w, s_c) are contiguous.
template <typename Real>
struct BasicParameters {
  using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

  Matrix Q;                     // |V| x D, context embeddings
  Matrix R;                     // |V| x D, prediction embeddings
  Vector b;                     // |V| word biases
  std::vector<Matrix> C_full;   // n-1 matrices D x D (full contexts)
  std::vector<Vector> C_diag;   // n-1 vectors of length D (diagonal contexts)
  Matrix S;                     // classes or internal tree nodes x D
  Vector t;

  // Zero-initialised parameters. `output_units` is K (class), |V|-1 (tree) or 0.
  static BasicParameters zeros(std::size_t vocab_size, const ModelConfig& config, std::size_t output_units);

  std::size_t parameter_count() const;
  bool all_finite() const;

  // Visits each parameter family in serialization order Q, R, b, C_1..C_{n-1},
  // S, t as (name, contiguous span).
  template <typename F>
  void for_each_family(F&& f) {
    f(std::string_view("Q"), std::span<Real>(Q.data(), static_cast<std::size_t>(Q.size())));
    f(std::string_view("R"), std::span<Real>(R.data(), static_cast<std::size_t>(R.size())));
    f(std::string_view("b"), std::span<Real>(b.data(), static_cast<std::size_t>(b.size())));
    for (auto& c : C_full) f(std::string_view("C"), std::span<Real>(c.data(), static_cast<std::size_t>(c.size())));
    for (auto& c : C_diag) f(std::string_view("C"), std::span<Real>(c.data(), static_cast<std::size_t>(c.size())));
    f(std::string_view("S"), std::span<Real>(S.data(), static_cast<std::size_t>(S.size())));
    f(std::string_view("t"), std::span<Real>(t.data(), static_cast<std::size_t>(t.size())));
  }
  template <typename F>
  void for_each_family(F&& f) const {
    const_cast<BasicParameters*>(this)->for_each_family(
        [&](std::string_view name, std::span<Real> data) { f(name, std::span<const Real>(data.data(), data.size())); });
  }

  template <typename Other>
  BasicParameters<Other> cast() const {
    BasicParameters<Other> out;
    out.Q = Q.template cast<Other>();
    out.R = R.template cast<Other>();
    out.b = b.template cast<Other>();
    for (const auto& c : C_full) out.C_full.push_back(c.template cast<Other>());
    for (const auto& c : C_diag) out.C_diag.push_back(c.template cast<Other>());
    out.S = S.template cast<Other>();
    out.t = t.template cast<Other>();
    return out;
  }

  // Bitwise comparison of every entry.
  bool identical(const BasicParameters& other) const;
};

extern template struct BasicParameters<float>;
extern template struct BasicParameters<double>;

using Parameters = BasicParameters<float>;

}  // namespace snlm
