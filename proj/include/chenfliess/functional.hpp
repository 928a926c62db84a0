#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chenfliess/errors.hpp"
#include "chenfliess/multi_index.hpp"
#include "chenfliess/path.hpp"
#include "chenfliess/scalar_function.hpp"

namespace chenfliess {

/// Derivative words are words over {0, 1, ..., e}: 0 is the Dupire time
/// derivative, i >= 1 the space derivative in direction e_i. In
/// (a1, ..., ak) the last letter is applied to F first.
using DerivativeWord = MultiIndex;

/// Declared class C^{m,n}: at most m time letters and n space letters per
/// derivative word. Negative bounds mean unbounded.
struct SmoothnessClass {
  int time_order = -1;
  int space_order = -1;

  static SmoothnessClass infinite() { return {}; }

  bool allows(const DerivativeWord& w) const {
    const int zeros = static_cast<int>(std::count(w.letters().begin(), w.letters().end(), 0));
    const int others = w.degree() - zeros;
    return (time_order < 0 || zeros <= time_order) && (space_order < 0 || others <= space_order);
  }

  friend SmoothnessClass meet(SmoothnessClass a, SmoothnessClass b) {
    auto lo = [](int x, int y) { return x < 0 ? y : (y < 0 ? x : std::min(x, y)); };
    return {lo(a.time_order, b.time_order), lo(a.space_order, b.space_order)};
  }
};

/// Finite-difference steps. A non-positive value selects the default:
/// time step 1e-3 T, space step 1e-4 max(1, |x_t^i|).
struct DerivativeSteps {
  double time_step = 0.0;
  double space_step = 0.0;

  double time_for(const SampledPath& x) const {
    return time_step > 0.0 ? time_step : 1e-3 * x.horizon();
  }
  double space_for(const SampledPath& x, double t, std::size_t coord) const {
    return space_step > 0.0 ? space_step
                            : 1e-4 * std::max(1.0, std::abs(x.value(t, coord - 1)));
  }
};

class Functional;

/// Node of a functional expression. Nodes are immutable; derivatives are
/// built lazily and memoised per letter.
class FunctionalNode : public std::enable_shared_from_this<FunctionalNode> {
 public:
  virtual ~FunctionalNode() = default;

  virtual double value(double t, const SampledPath& x) const = 0;

  /// F(t_k, x) at every node k of x. At the first node of a jump pair this
  /// is the value before the jump.
  virtual std::vector<double> along(const SampledPath& x) const {
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = value(x.times()[k], x);
    return out;
  }

  /// True when F(t, x) = f(t, x_t) for a function f of a point.
  virtual bool pointwise() const { return false; }
  virtual double point(double /*t*/, std::span<const double> /*y*/) const {
    throw ContractError("functional " + describe() + " is not a function of (t, x_t)");
  }

  virtual std::optional<double> constant_value() const { return std::nullopt; }
  virtual SmoothnessClass smoothness() const { return SmoothnessClass::infinite(); }
  virtual std::string describe() const = 0;

  Functional derivative(int letter) const;

 protected:
  virtual Functional make_derivative(int letter) const = 0;
  virtual bool memoise_derivatives() const { return true; }

 private:
  mutable std::mutex cache_mutex_;
  mutable std::map<int, std::shared_ptr<const FunctionalNode>> cache_;
};

/// Value handle for a nonanticipative functional F: [0,T] x paths -> R.
class Functional {
 public:
  Functional() = default;
  explicit Functional(std::shared_ptr<const FunctionalNode> node) : node_(std::move(node)) {}

  double operator()(double t, const SampledPath& x) const {
    x.check_time(t);
    return node_->value(t, x);
  }

  std::vector<double> along(const SampledPath& x) const { return node_->along(x); }

  /// Analytic derivative when available; callable functionals fall back to
  /// difference quotients. Throws ContractError otherwise.
  Functional derivative(int letter) const { return node_->derivative(letter); }

  /// d_{a1} ... d_{ak} F, innermost (last) letter first.
  Functional derivative(const DerivativeWord& w) const {
    if (!smoothness().allows(w))
      throw ContractError("derivative word " + w.str() + " outside the class of " + describe());
    Functional g = *this;
    for (std::size_t k = w.size(); k-- > 0;) g = g.derivative(w[k]);
    return g;
  }

  bool pointwise() const { return node_->pointwise(); }
  double point(double t, std::span<const double> y) const { return node_->point(t, y); }
  std::optional<double> constant_value() const { return node_->constant_value(); }
  bool is_zero() const {
    const auto c = constant_value();
    return c && *c == 0.0;
  }
  SmoothnessClass smoothness() const { return node_->smoothness(); }
  std::string describe() const { return node_->describe(); }
  const FunctionalNode& node() const { return *node_; }
  const std::shared_ptr<const FunctionalNode>& ptr() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

 private:
  std::shared_ptr<const FunctionalNode> node_;
};

inline Functional FunctionalNode::derivative(int letter) const {
  if (letter < 0) throw DomainError("negative derivative letter");
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(letter); it != cache_.end()) return Functional(it->second);
  }
  Functional d = make_derivative(letter);
  if (!memoise_derivatives()) return d;
  std::lock_guard lock(cache_mutex_);
  cache_.emplace(letter, d.ptr());
  return d;
}

// --- construction helpers (declared first; nodes reference each other) ---

Functional constant(double c);
Functional sum(std::vector<Functional> terms);
Functional product(const Functional& a, const Functional& b);
Functional compose(const ScalarFunction& h, const Functional& inner);

inline Functional operator+(const Functional& a, const Functional& b) { return sum({a, b}); }
inline Functional operator*(const Functional& a, const Functional& b) { return product(a, b); }
inline Functional operator*(double c, const Functional& a) { return product(constant(c), a); }

namespace nodes {

class PointwiseNode : public FunctionalNode {
 public:
  bool pointwise() const override { return true; }
  double value(double t, const SampledPath& x) const override {
    return point(t, x(t));
  }
  std::vector<double> along(const SampledPath& x) const override {
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = point(x.times()[k], x.node(k));
    return out;
  }
};

class Constant final : public PointwiseNode {
 public:
  explicit Constant(double c) : c_(c) {}
  double point(double, std::span<const double>) const override { return c_; }
  std::vector<double> along(const SampledPath& x) const override {
    return std::vector<double>(x.size(), c_);
  }
  std::optional<double> constant_value() const override { return c_; }
  std::string describe() const override { return std::to_string(c_); }

 protected:
  Functional make_derivative(int) const override { return constant(0.0); }

 private:
  double c_;
};

class Time final : public PointwiseNode {
 public:
  double point(double t, std::span<const double>) const override { return t; }
  std::string describe() const override { return "t"; }

 protected:
  Functional make_derivative(int letter) const override {
    return constant(letter == 0 ? 1.0 : 0.0);
  }
};

/// x_t^i, 1-based coordinate.
class Coordinate final : public PointwiseNode {
 public:
  explicit Coordinate(int coord) : coord_(coord) {
    if (coord < 1) throw DomainError("coordinates are 1-based");
  }
  double point(double, std::span<const double> y) const override {
    if (static_cast<std::size_t>(coord_) > y.size())
      throw DomainError("coordinate " + std::to_string(coord_) + " beyond path dimension");
    return y[static_cast<std::size_t>(coord_ - 1)];
  }
  std::string describe() const override { return "x" + std::to_string(coord_); }

 protected:
  Functional make_derivative(int letter) const override {
    return constant(letter == coord_ ? 1.0 : 0.0);
  }

 private:
  int coord_;
};

class Sum final : public FunctionalNode {
 public:
  explicit Sum(std::vector<Functional> terms) : terms_(std::move(terms)) {}
  double value(double t, const SampledPath& x) const override {
    double acc = 0.0;
    for (const auto& f : terms_) acc += f.node().value(t, x);
    return acc;
  }
  std::vector<double> along(const SampledPath& x) const override {
    std::vector<double> out(x.size(), 0.0);
    for (const auto& f : terms_) {
      const auto v = f.along(x);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += v[k];
    }
    return out;
  }
  bool pointwise() const override {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& f) { return f.pointwise(); });
  }
  double point(double t, std::span<const double> y) const override {
    double acc = 0.0;
    for (const auto& f : terms_) acc += f.point(t, y);
    return acc;
  }
  SmoothnessClass smoothness() const override {
    SmoothnessClass c;
    for (const auto& f : terms_) c = meet(c, f.smoothness());
    return c;
  }
  std::string describe() const override {
    std::string s = "(";
    for (std::size_t k = 0; k < terms_.size(); ++k) s += (k ? " + " : "") + terms_[k].describe();
    return s + ")";
  }

 protected:
  Functional make_derivative(int letter) const override {
    std::vector<Functional> d;
    d.reserve(terms_.size());
    for (const auto& f : terms_) d.push_back(f.derivative(letter));
    return sum(std::move(d));
  }

 private:
  std::vector<Functional> terms_;
};

class Product final : public FunctionalNode {
 public:
  Product(Functional a, Functional b) : a_(std::move(a)), b_(std::move(b)) {}
  double value(double t, const SampledPath& x) const override {
    return a_.node().value(t, x) * b_.node().value(t, x);
  }
  std::vector<double> along(const SampledPath& x) const override {
    auto u = a_.along(x);
    const auto v = b_.along(x);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] *= v[k];
    return u;
  }
  bool pointwise() const override { return a_.pointwise() && b_.pointwise(); }
  double point(double t, std::span<const double> y) const override {
    return a_.point(t, y) * b_.point(t, y);
  }
  SmoothnessClass smoothness() const override { return meet(a_.smoothness(), b_.smoothness()); }
  std::string describe() const override { return a_.describe() + "*" + b_.describe(); }

 protected:
  Functional make_derivative(int letter) const override {
    return sum({product(a_.derivative(letter), b_), product(a_, b_.derivative(letter))});
  }

 private:
  Functional a_, b_;
};

class Compose final : public FunctionalNode {
 public:
  Compose(ScalarFunction h, Functional inner) : h_(std::move(h)), inner_(std::move(inner)) {}
  double value(double t, const SampledPath& x) const override {
    return h_(inner_.node().value(t, x));
  }
  std::vector<double> along(const SampledPath& x) const override {
    auto u = inner_.along(x);
    for (auto& v : u) v = h_(v);
    return u;
  }
  bool pointwise() const override { return inner_.pointwise(); }
  double point(double t, std::span<const double> y) const override {
    return h_(inner_.point(t, y));
  }
  SmoothnessClass smoothness() const override { return inner_.smoothness(); }
  std::string describe() const override { return h_.describe() + "[" + inner_.describe() + "]"; }

 protected:
  Functional make_derivative(int letter) const override {
    return product(compose(h_.derivative(), inner_), inner_.derivative(letter));
  }

 private:
  ScalarFunction h_;
  Functional inner_;
};

/// int_0^t h(r, x_r) dr for a pointwise integrand h. Trapezoidal on linear
/// paths, left-point on cadlag paths; the bumped value at t never enters.
class RunningIntegral final : public FunctionalNode {
 public:
  explicit RunningIntegral(Functional integrand) : h_(std::move(integrand)) {
    if (!h_.pointwise())
      throw ContractError("running integral needs an integrand of (t, x_t)");
  }

  double value(double t, const SampledPath& x) const override {
    const auto& ts = x.times();
    const bool linear = x.interpolation() == Interpolation::linear;
    double acc = 0.0;
    double prev = h_.point(ts[0], x.node(0));
    std::size_t k = 0;
    for (; k + 1 < ts.size() && ts[k + 1] <= t; ++k) {
      const double next = h_.point(ts[k + 1], x.node(k + 1));
      const double dt = ts[k + 1] - ts[k];
      acc += linear ? 0.5 * (prev + next) * dt : prev * dt;
      prev = next;
    }
    if (ts[k] < t) {
      const double dt = t - ts[k];
      if (linear) {
        const auto y = x.left_limit(t);
        acc += 0.5 * (prev + h_.point(t, y)) * dt;
      } else {
        acc += prev * dt;
      }
    }
    return acc;
  }

  std::vector<double> along(const SampledPath& x) const override {
    const auto g = h_.along(x);
    const auto& ts = x.times();
    const bool linear = x.interpolation() == Interpolation::linear;
    std::vector<double> out(ts.size(), 0.0);
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
      const double dt = ts[k + 1] - ts[k];
      out[k + 1] = out[k] + (linear ? 0.5 * (g[k] + g[k + 1]) * dt : g[k] * dt);
    }
    return out;
  }

  SmoothnessClass smoothness() const override { return h_.smoothness(); }
  std::string describe() const override { return "int[" + h_.describe() + "]"; }

 protected:
  Functional make_derivative(int letter) const override {
    return letter == 0 ? h_ : constant(0.0);
  }

 private:
  Functional h_;
};

}  // namespace nodes

inline Functional constant(double c) { return Functional(std::make_shared<nodes::Constant>(c)); }
inline Functional time_functional() { return Functional(std::make_shared<nodes::Time>()); }
inline Functional coordinate(int i) { return Functional(std::make_shared<nodes::Coordinate>(i)); }

inline Functional sum(std::vector<Functional> terms) {
  std::vector<Functional> kept;
  double folded = 0.0;
  for (auto& f : terms) {
    if (const auto c = f.constant_value())
      folded += *c;
    else
      kept.push_back(std::move(f));
  }
  if (folded != 0.0 || kept.empty()) kept.push_back(constant(folded));
  if (kept.size() == 1) return kept.front();
  return Functional(std::make_shared<nodes::Sum>(std::move(kept)));
}

inline Functional product(const Functional& a, const Functional& b) {
  const auto ca = a.constant_value();
  const auto cb = b.constant_value();
  if ((ca && *ca == 0.0) || (cb && *cb == 0.0)) return constant(0.0);
  if (ca && cb) return constant(*ca * *cb);
  if (ca && *ca == 1.0) return b;
  if (cb && *cb == 1.0) return a;
  return Functional(std::make_shared<nodes::Product>(a, b));
}

inline Functional compose(const ScalarFunction& h, const Functional& inner) {
  if (h.is_zero()) return constant(0.0);
  if (const auto c = inner.constant_value()) return constant(h(*c));
  return Functional(std::make_shared<nodes::Compose>(h, inner));
}

inline Functional running_integral(const Functional& integrand) {
  if (integrand.is_zero()) return constant(0.0);
  return Functional(std::make_shared<nodes::RunningIntegral>(integrand));
}

/// F(t, x) = f(int_0^t g(x_r^coord) dr).
inline Functional make_running_integral(const ScalarFunction& f, const ScalarFunction& g,
                                        int coord = 1) {
  return compose(f, running_integral(compose(g, coordinate(coord))));
}

// --- cylinder functionals ----------------------------------------------------

/// Smooth f(t, y) with its partial derivatives supplied as closures:
/// partial(0) is df/dt, partial(i) is df/dy^i, each again a
/// SmoothPointFunction. A null partial marks an unavailable derivative.
struct SmoothPointFunction {
  std::function<double(double, std::span<const double>)> eval;
  std::function<std::optional<SmoothPointFunction>(int)> partial;
  std::string name = "f";
};

namespace nodes {

class Cylinder final : public PointwiseNode {
 public:
  explicit Cylinder(SmoothPointFunction f) : f_(std::move(f)) {}
  double point(double t, std::span<const double> y) const override { return f_.eval(t, y); }
  std::string describe() const override { return f_.name + "(t,x_t)"; }

 protected:
  Functional make_derivative(int letter) const override {
    if (!f_.partial) throw ContractError(f_.name + " supplies no partial derivatives");
    auto p = f_.partial(letter);
    if (!p) throw ContractError(f_.name + " has no partial derivative in direction " +
                                std::to_string(letter));
    return Functional(std::make_shared<Cylinder>(std::move(*p)));
  }

 private:
  SmoothPointFunction f_;
};

}  // namespace nodes

/// F(t, x) = f(t, x_t).
inline Functional make_cylinder(SmoothPointFunction f) {
  return Functional(std::make_shared<nodes::Cylinder>(std::move(f)));
}

/// F(t, x) = h(x_t^coord) for a catalog function h.
inline Functional make_cylinder(const ScalarFunction& h, int coord = 1) {
  return compose(h, coordinate(coord));
}

// --- numeric Dupire derivatives ---------------------------------------------

/// One-sided quotient (F(t+h, a_t x) - F(t, x)) / h.
inline double time_quotient(const Functional& F, double t, const SampledPath& x, double h) {
  if (!(h > 0.0)) throw DomainError("time step must be positive");
  if (t + h > x.horizon())
    throw DomainError("time derivative needs t + h <= T (no extension past the horizon)");
  return (F(t + h, stop_at(x, t)) - F(t, x)) / h;
}

/// Time quotient with Richardson extrapolation over h and h/2.
inline double time_derivative(const Functional& F, double t, const SampledPath& x,
                              double h = 0.0) {
  if (h <= 0.0) h = DerivativeSteps{}.time_for(x);
  return 2.0 * time_quotient(F, t, x, 0.5 * h) - time_quotient(F, t, x, h);
}

/// Central quotient of the bump x +/- eps e_i 1_{. >= t}.
inline double space_derivative(const Functional& F, std::size_t i, double t,
                               const SampledPath& x, double eps = 0.0) {
  if (i < 1 || i > x.dim())
    throw DomainError("space derivative coordinate " + std::to_string(i) + " out of range");
  if (eps <= 0.0) eps = DerivativeSteps{}.space_for(x, t, i);
  return (F(t, bump(x, t, i, eps)) - F(t, bump(x, t, i, -eps))) / (2.0 * eps);
}

/// One-sided space quotient, for order measurements.
inline double space_quotient(const Functional& F, std::size_t i, double t, const SampledPath& x,
                             double eps) {
  return (F(t, bump(x, t, i, eps)) - F(t, x)) / eps;
}

namespace nodes {

/// Black-box functional; derivatives by difference quotients, nested at most
/// two deep.
class Callable final : public FunctionalNode {
 public:
  using Fn = std::function<double(double, const SampledPath&)>;
  Callable(Fn fn, SmoothnessClass cls, DerivativeSteps steps, std::string name)
      : fn_(std::move(fn)), cls_(cls), steps_(steps), name_(std::move(name)) {}

  double value(double t, const SampledPath& x) const override { return fn_(t, x); }
  SmoothnessClass smoothness() const override { return cls_; }
  std::string describe() const override { return name_; }
  const DerivativeSteps& steps() const { return steps_; }

 protected:
  Functional make_derivative(int letter) const override;
  // derivatives point back at this node
  bool memoise_derivatives() const override { return false; }

 private:
  Fn fn_;
  SmoothnessClass cls_;
  DerivativeSteps steps_;
  std::string name_;
};

class NumericDerivative final : public FunctionalNode {
 public:
  static constexpr std::size_t max_depth = 2;

  NumericDerivative(Functional base, DerivativeWord word, DerivativeSteps steps)
      : base_(std::move(base)), word_(std::move(word)), steps_(steps) {
    if (word_.size() > max_depth)
      throw ContractError("numeric derivative word " + word_.str() +
                          " too deep; supply analytic derivatives");
    if (!base_.smoothness().allows(word_))
      throw ContractError("derivative word " + word_.str() + " outside the class of " +
                          base_.describe());
  }

  double value(double t, const SampledPath& x) const override { return eval(0, t, x); }
  SmoothnessClass smoothness() const override { return base_.smoothness(); }
  std::string describe() const override { return "d" + word_.str() + "[" + base_.describe() + "]"; }

 protected:
  Functional make_derivative(int letter) const override {
    return Functional(std::make_shared<NumericDerivative>(base_, word_.prepend(letter), steps_));
  }

 private:
  double eval(std::size_t level, double t, const SampledPath& x) const {
    if (level == word_.size()) return base_(t, x);
    const int letter = word_[level];
    if (letter == 0) {
      const double h = steps_.time_for(x);
      auto q = [&](double step) {
        if (t + step > x.horizon())
          throw DomainError("time derivative needs t + h <= T (no extension past the horizon)");
        return (eval(level + 1, t + step, stop_at(x, t)) - eval(level + 1, t, x)) / step;
      };
      return 2.0 * q(0.5 * h) - q(h);
    }
    const auto i = static_cast<std::size_t>(letter);
    if (i > x.dim()) throw DomainError("space derivative coordinate out of range");
    const double eps = steps_.space_for(x, t, i);
    return (eval(level + 1, t, bump(x, t, i, eps)) - eval(level + 1, t, bump(x, t, i, -eps))) /
           (2.0 * eps);
  }

  Functional base_;
  DerivativeWord word_;
  DerivativeSteps steps_;
};

inline Functional Callable::make_derivative(int letter) const {
  auto self = std::static_pointer_cast<const FunctionalNode>(shared_from_this());
  return Functional(
      std::make_shared<NumericDerivative>(Functional(self), DerivativeWord{letter}, steps_));
}

}  // namespace nodes

/// Wraps a black-box nonanticipative functional of a declared class.
inline Functional make_callable(nodes::Callable::Fn fn, SmoothnessClass cls = {},
                                DerivativeSteps steps = {}, std::string name = "F") {
  return Functional(
      std::make_shared<nodes::Callable>(std::move(fn), cls, steps, std::move(name)));
}

/// d_w F(t, x). Analytic when every step of the chain is; difference
/// quotients for callables (at most two letters deep).
inline double derivative_word(const Functional& F, const DerivativeWord& w, double t,
                              const SampledPath& x) {
  return F.derivative(w)(t, x);
}

}  // namespace chenfliess
