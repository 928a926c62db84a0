#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chenfliess/errors.hpp"
#include "chenfliess/functional.hpp"
#include "chenfliess/multi_index.hpp"

namespace chenfliess {

/// V: R^e -> R^e. Each component is a time-independent pointwise functional
/// of y, which carries its own analytic derivatives.
struct VectorField {
  std::vector<Functional> components;

  static VectorField zero(int e) {
    return {std::vector<Functional>(static_cast<std::size_t>(e), constant(0.0))};
  }

  /// a + B y, with B given row-major (e x e).
  static VectorField affine(const std::vector<double>& a, const std::vector<double>& B) {
    const std::size_t e = a.size();
    if (B.size() != e * e) throw DomainError("affine field needs an e x e matrix");
    VectorField v;
    for (std::size_t j = 0; j < e; ++j) {
      std::vector<Functional> terms{constant(a[j])};
      for (std::size_t k = 0; k < e; ++k)
        if (B[j * e + k] != 0.0) terms.push_back(B[j * e + k] * coordinate(static_cast<int>(k) + 1));
      v.components.push_back(sum(std::move(terms)));
    }
    return v;
  }

  /// Component j is h_j(y^j).
  static VectorField componentwise(const std::vector<ScalarFunction>& h) {
    VectorField v;
    for (std::size_t j = 0; j < h.size(); ++j)
      v.components.push_back(compose(h[j], coordinate(static_cast<int>(j) + 1)));
    return v;
  }

  bool is_zero() const {
    for (const auto& c : components)
      if (!c.is_zero()) return false;
    return true;
  }

  void eval(std::span<const double> y, std::span<double> out) const {
    for (std::size_t j = 0; j < components.size(); ++j) out[j] = components[j].point(0.0, y);
  }
};

/// Vbar = (Vbar^0, V^1, ..., V^e): a vector field with an extra time
/// component, acting on functionals as the derivation
///   Vbar . F(t, y) = sum_{i=0}^e Vbar^i(y_t) d_i F(t, y).
struct LiftedField {
  double time_component = 0.0;
  std::vector<Functional> components;

  friend LiftedField linear_combination(double a, const LiftedField& v, double b,
                                        const LiftedField& w) {
    if (v.components.size() != w.components.size())
      throw DomainError("lifted fields differ in dimension");
    LiftedField out;
    out.time_component = a * v.time_component + b * w.time_component;
    for (std::size_t j = 0; j < v.components.size(); ++j)
      out.components.push_back(sum({a * v.components[j], b * w.components[j]}));
    return out;
  }
};

/// The fields V_0 (drift, paired with dt), V_1, ..., V_d.
class VectorFieldSet {
 public:
  VectorFieldSet(int e, std::vector<VectorField> fields) : e_(e), fields_(std::move(fields)) {
    if (e_ < 1) throw DomainError("state dimension must be positive");
    if (fields_.size() < 2) throw DomainError("need V_0 and at least one noise field");
    for (const auto& f : fields_) {
      if (f.components.size() != static_cast<std::size_t>(e_))
        throw DomainError("vector field has wrong number of components");
      for (const auto& c : f.components)
        if (!c.pointwise())
          throw ContractError("vector field components must be functions of the state");
    }
  }

  int e() const noexcept { return e_; }
  int d() const noexcept { return static_cast<int>(fields_.size()) - 1; }
  const VectorField& field(int i) const { return fields_.at(static_cast<std::size_t>(i)); }

  /// Vbar_i = (delta_{0i}, V_i^1, ..., V_i^e).
  LiftedField lifted(int i) const {
    if (i < 0 || i > d())
      throw DomainError("field index " + std::to_string(i) + " outside 0.." + std::to_string(d()));
    return {i == 0 ? 1.0 : 0.0, field(i).components};
  }

 private:
  int e_;
  std::vector<VectorField> fields_;
};

/// Vbar . F. Letters with a zero coefficient are skipped, so d_0 is never
/// requested from F when Vbar^0 = 0.
inline Functional apply_derivation(const LiftedField& v, const Functional& F) {
  std::vector<Functional> terms;
  if (v.time_component != 0.0) terms.push_back(v.time_component * F.derivative(0));
  for (std::size_t j = 0; j < v.components.size(); ++j) {
    if (v.components[j].is_zero()) continue;
    terms.push_back(product(v.components[j], F.derivative(static_cast<int>(j) + 1)));
  }
  return sum(std::move(terms));
}

/// Vbar_I . F = Vbar_{a1} ( ... (Vbar_{ak} . F)): the last letter acts first.
inline Functional apply_word(const VectorFieldSet& fields, const MultiIndex& word,
                             const Functional& F) {
  Functional g = F;
  for (std::size_t k = word.size(); k-- > 0;) g = apply_derivation(fields.lifted(word[k]), g);
  return g;
}

}  // namespace chenfliess
