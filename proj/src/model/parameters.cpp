#include "snlm/parameters.hpp"

#include <cmath>
#include <cstring>

namespace snlm {

std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::standard:
      return "standard";
    case Regime::class_factored:
      return "class";
    case Regime::tree_factored:
      return "tree";
  }
  return "unknown";
}

Regime parse_regime(std::string_view name) {
  if (name == "standard") return Regime::standard;
  if (name == "class" || name == "class_factored") return Regime::class_factored;
  if (name == "tree" || name == "tree_factored") return Regime::tree_factored;
  throw Error("unknown regime '" + std::string(name) + "'");
}

template <typename Real>
BasicParameters<Real> BasicParameters<Real>::zeros(std::size_t vocab_size, const ModelConfig& config,
                                                   std::size_t output_units) {
  const auto V = static_cast<Eigen::Index>(vocab_size);
  const auto D = static_cast<Eigen::Index>(config.dim);
  BasicParameters p;
  p.Q = Matrix::Zero(V, D);
  p.R = Matrix::Zero(V, D);
  p.b = Vector::Zero(V);
  for (int j = 0; j + 1 < config.order; ++j) {
    if (config.diagonal_contexts)
      p.C_diag.push_back(Vector::Zero(D));
    else
      p.C_full.push_back(Matrix::Zero(D, D));
  }
  p.S = Matrix::Zero(static_cast<Eigen::Index>(output_units), D);
  p.t = Vector::Zero(static_cast<Eigen::Index>(output_units));
  return p;
}

template <typename Real>
std::size_t BasicParameters<Real>::parameter_count() const {
  std::size_t n = 0;
  for_each_family([&](std::string_view, std::span<const Real> data) { n += data.size(); });
  return n;
}

template <typename Real>
bool BasicParameters<Real>::all_finite() const {
  bool ok = true;
  for_each_family([&](std::string_view, std::span<const Real> data) {
    for (Real x : data) ok = ok && std::isfinite(x);
  });
  return ok;
}

template <typename Real>
bool BasicParameters<Real>::identical(const BasicParameters& other) const {
  std::vector<std::span<const Real>> mine, theirs;
  for_each_family([&](std::string_view, std::span<const Real> d) { mine.push_back(d); });
  other.for_each_family([&](std::string_view, std::span<const Real> d) { theirs.push_back(d); });
  if (mine.size() != theirs.size()) return false;
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i].size() != theirs[i].size()) return false;
    if (!mine[i].empty() && std::memcmp(mine[i].data(), theirs[i].data(), mine[i].size() * sizeof(Real)) != 0)
      return false;
  }
  return true;
}

template struct BasicParameters<float>;
template struct BasicParameters<double>;

}  // namespace snlm
