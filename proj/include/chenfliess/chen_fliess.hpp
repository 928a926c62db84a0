#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chenfliess/derivations.hpp"
#include "chenfliess/errors.hpp"
#include "chenfliess/functional.hpp"
#include "chenfliess/iterated_integrals.hpp"
#include "chenfliess/multi_index.hpp"
#include "chenfliess/parallel.hpp"
#include "chenfliess/sde.hpp"

namespace chenfliess {

/// One realisation of the truncated expansion
///   F_t(Y) - F_s(Y) = sum_{I in A(m)} Vbar_I.F_s(Y) int_{s<t1<..<tk<t} o dX^I + R^m_st.
struct ExpansionReport {
  int m = 0;
  double s = 0.0;
  double t = 0.0;
  std::vector<MultiIndex> words;
  std::vector<double> coefficients;
  std::vector<double> integrals;
  double truncation_value = 0.0;
  double lhs = 0.0;
  double remainder = 0.0;

  void write_csv(std::ostream& os) const {
    os << "word,coefficient,integral,product\n" << std::setprecision(17);
    for (std::size_t k = 0; k < words.size(); ++k)
      os << words[k].str() << ',' << coefficients[k] << ',' << integrals[k] << ','
         << coefficients[k] * integrals[k] << '\n';
  }
};

/// Coefficient functionals Vbar_I . F for I in A(m), built once and reused
/// across Monte Carlo paths.
class Expansion {
 public:
  Expansion(Functional F, VectorFieldSet fields, int m)
      : F_(std::move(F)), fields_(std::move(fields)), m_(m), words_(enumerate_A(m, fields_.d())) {
    coefficients_.reserve(words_.size());
    for (const auto& w : words_) coefficients_.push_back(apply_word(fields_, w, F_));
  }

  int m() const noexcept { return m_; }
  const Functional& functional() const noexcept { return F_; }
  const VectorFieldSet& fields() const noexcept { return fields_; }
  const std::vector<MultiIndex>& words() const noexcept { return words_; }
  const std::vector<Functional>& coefficient_functionals() const noexcept { return coefficients_; }

  /// Expansion along an already solved path Y sharing the grid of drv.
  ExpansionReport expand_on(const SampledPath& Y, const Driver& drv, double s, double t) const {
    if (!(s < t)) throw DomainError("expansion needs s < t");
    ExpansionReport r;
    r.m = m_;
    r.s = s;
    r.t = t;
    r.words = words_;
    const auto sig = signature(drv, words_, s, t);
    r.integrals = sig.values;
    r.coefficients.reserve(words_.size());
    for (std::size_t k = 0; k < words_.size(); ++k) {
      r.coefficients.push_back(coefficients_[k](s, Y));
      r.truncation_value += r.coefficients.back() * r.integrals[k];
    }
    r.lhs = F_(t, Y) - F_(s, Y);
    r.remainder = r.lhs - r.truncation_value;
    return r;
  }

  ExpansionReport expand(std::span<const double> y0, const Driver& drv, double s,
                         double t) const {
    return expand_on(solve_stratonovich(fields_, y0, drv), drv, s, t);
  }

 private:
  Functional F_;
  VectorFieldSet fields_;
  int m_;
  std::vector<MultiIndex> words_;
  std::vector<Functional> coefficients_;
};

inline ExpansionReport expand(const Functional& F, const VectorFieldSet& fields,
                              std::span<const double> y0, const Driver& drv, double s, double t,
                              int m) {
  return Expansion(F, fields, m).expand(y0, drv, s, t);
}

struct L2Estimate {
  double rms = 0.0;
  double ci_halfwidth = 0.0;  // 95%, delta method on the mean square
  std::size_t n_paths = 0;
};

/// RMS and 95% half-width from per-path remainders.
inline L2Estimate summarize_l2(std::span<const double> remainders) {
  L2Estimate est;
  est.n_paths = remainders.size();
  if (remainders.empty()) return est;
  const double n = static_cast<double>(remainders.size());
  double mean_sq = 0.0;
  for (double r : remainders) mean_sq += r * r;
  mean_sq /= n;
  double var = 0.0;
  for (double r : remainders) var += (r * r - mean_sq) * (r * r - mean_sq);
  var = remainders.size() > 1 ? var / (n - 1.0) : 0.0;
  est.rms = std::sqrt(mean_sq);
  const double se_mean_sq = std::sqrt(var / n);
  est.ci_halfwidth = est.rms > 0.0 ? 1.96 * se_mean_sq / (2.0 * est.rms) : 0.0;
  return est;
}

/// Per-path remainders R^m_st over cfg.n_paths independent drivers.
inline std::vector<double> sample_remainders(const Expansion& ex, std::span<const double> y0,
                                             const SimulationConfig& cfg, double s, double t,
                                             std::size_t workers = 1) {
  cfg.validate();
  if (t > cfg.T) throw DomainError("t beyond the simulation horizon");
  const std::vector<double> y(y0.begin(), y0.end());
  return parallel_map(cfg.n_paths, workers, [&](std::size_t p) {
    return ex.expand(y, sample_driver(cfg, p), s, t).remainder;
  });
}

inline L2Estimate l2_remainder(const Functional& F, const VectorFieldSet& fields,
                               std::span<const double> y0, const SimulationConfig& cfg, double s,
                               double t, int m, std::size_t workers = 1) {
  const Expansion ex(F, fields, m);
  const auto rem = sample_remainders(ex, y0, cfg, s, t, workers);
  return summarize_l2(rem);
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LinearFit least_squares_line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  LinearFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  return f;
}

struct ScalingReport {
  int m = 0;
  std::vector<double> t_values;
  std::vector<double> rms;
  std::vector<double> ci_halfwidth;
  double slope = 0.0;
  double intercept = 0.0;
  double theory_slope = 0.0;
  double tolerance = 0.0;
  bool exact_expansion = false;  // every rms at rounding level; no regression
  bool pass = false;

  void write_csv(std::ostream& os) const {
    os << "t,rms,ci_halfwidth\n" << std::setprecision(17);
    for (std::size_t k = 0; k < t_values.size(); ++k)
      os << t_values[k] << ',' << rms[k] << ',' << ci_halfwidth[k] << '\n';
  }
};

/// Regression of log RMS(R^m_{0t}) on log t. Each t gets its own horizon
/// T = t, cfg.n_steps steps and an independent seed family.
inline ScalingReport scaling_regression(const Functional& F, const VectorFieldSet& fields,
                                        std::span<const double> y0, const SimulationConfig& cfg,
                                        int m, std::span<const double> t_list,
                                        double tolerance = 0.25, std::size_t workers = 1) {
  if (t_list.size() < 4) throw DomainError("scaling regression needs at least 4 t values");
  const auto [lo, hi] = std::minmax_element(t_list.begin(), t_list.end());
  if (!(*lo > 0.0) || *hi < 8.0 * *lo)
    throw DomainError("t values must be positive and span at least a factor 8");

  const Expansion ex(F, fields, m);
  ScalingReport rep;
  rep.m = m;
  rep.theory_slope = 0.5 * (m + 1);
  rep.tolerance = tolerance;
  for (std::size_t k = 0; k < t_list.size(); ++k) {
    SimulationConfig c = cfg;
    c.T = t_list[k];
    c.seed = rng::derive(cfg.seed, k);
    const auto est = summarize_l2(sample_remainders(ex, y0, c, 0.0, t_list[k], workers));
    rep.t_values.push_back(t_list[k]);
    rep.rms.push_back(est.rms);
    rep.ci_halfwidth.push_back(est.ci_halfwidth);
  }
  rep.exact_expansion =
      std::all_of(rep.rms.begin(), rep.rms.end(), [](double r) { return r <= 1e-12; });
  if (rep.exact_expansion) {
    rep.pass = true;
    return rep;
  }
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < rep.t_values.size(); ++k) {
    lx.push_back(std::log(rep.t_values[k]));
    ly.push_back(std::log(std::max(rep.rms[k], 1e-300)));
  }
  const auto fit = least_squares_line(lx, ly);
  rep.slope = fit.slope;
  rep.intercept = fit.intercept;
  rep.pass = std::abs(rep.slope - rep.theory_slope) <= tolerance;
  return rep;
}

enum class ItoForm {
  stratonovich,  // dF = d0F dt + sum_i diF o dY^i, midpoint weights
  ito,           // left point plus 1/2 sum_ij dijF dY^i dY^j
  driver,        // dF = sum_k (Vbar_k . F) o dX^k, midpoint weights
};

namespace detail {

inline std::size_t node_index(const SampledPath& Y, double t) {
  const auto& ts = Y.times();
  const auto it = std::lower_bound(ts.begin(), ts.end(), t);
  if (it == ts.end() || *it != t)
    throw DomainError("time " + std::to_string(t) + " is not a grid node");
  return static_cast<std::size_t>(it - ts.begin());
}

}  // namespace detail

/// |F_t(Y) - F_s(Y) - (discretised functional Ito/Stratonovich integrals)|
/// on the grid of the solved path. s and t must be grid nodes.
inline double verify_functional_ito_on(const Functional& F, const VectorFieldSet& fields,
                                       const SampledPath& Y, const Driver& drv, double s, double t,
                                       ItoForm form = ItoForm::stratonovich) {
  if (!(s < t)) throw DomainError("Ito check needs s < t");
  const std::size_t a = detail::node_index(Y, s);
  const std::size_t b = detail::node_index(Y, t);
  const auto& ts = Y.times();
  const auto e = static_cast<std::size_t>(fields.e());
  const auto Fv = F.along(Y);
  double integral = 0.0;

  if (form == ItoForm::driver) {
    const auto& X = drv.path();
    for (int k = 0; k <= fields.d(); ++k) {
      const auto g = apply_derivation(fields.lifted(k), F);
      if (g.is_zero()) continue;
      const auto gv = g.along(Y);
      for (std::size_t j = a; j < b; ++j)
        integral += 0.5 * (gv[j] + gv[j + 1]) *
                    (X.node(j + 1, static_cast<std::size_t>(k)) - X.node(j, static_cast<std::size_t>(k)));
    }
    return std::abs(Fv[b] - Fv[a] - integral);
  }

  const bool mid = form == ItoForm::stratonovich;
  const auto d0 = F.derivative(0).along(Y);
  for (std::size_t j = a; j < b; ++j)
    integral += (mid ? 0.5 * (d0[j] + d0[j + 1]) : d0[j]) * (ts[j + 1] - ts[j]);
  for (std::size_t i = 1; i <= e; ++i) {
    const auto di = F.derivative(static_cast<int>(i));
    if (di.is_zero()) continue;
    const auto dv = di.along(Y);
    for (std::size_t j = a; j < b; ++j) {
      const double dy = Y.node(j + 1, i - 1) - Y.node(j, i - 1);
      integral += (mid ? 0.5 * (dv[j] + dv[j + 1]) : dv[j]) * dy;
    }
    if (!mid) {
      for (std::size_t l = 1; l <= e; ++l) {
        const auto dil = di.derivative(static_cast<int>(l));
        if (dil.is_zero()) continue;
        const auto dd = dil.along(Y);
        for (std::size_t j = a; j < b; ++j)
          integral += 0.5 * dd[j] * (Y.node(j + 1, i - 1) - Y.node(j, i - 1)) *
                      (Y.node(j + 1, l - 1) - Y.node(j, l - 1));
      }
    }
  }
  return std::abs(Fv[b] - Fv[a] - integral);
}

inline double verify_functional_ito(const Functional& F, const VectorFieldSet& fields,
                                    std::span<const double> y0, const Driver& drv, double s,
                                    double t, ItoForm form = ItoForm::stratonovich) {
  return verify_functional_ito_on(F, fields, solve_stratonovich(fields, y0, drv), drv, s, t, form);
}

/// The remainder as the sum over boundary words I = (i1, ..., iN) of
///   int_{s<r1<..<rN<t} Vbar_I.F_{r1}(Y) o dX^{i1}_{r1} ... o dX^{iN}_{rN}.
/// s and t must be grid nodes.
inline double remainder_by_boundary_words(const Functional& F, const VectorFieldSet& fields,
                                          const SampledPath& Y, const Driver& drv, double s,
                                          double t, int m) {
  const std::size_t a = detail::node_index(Y, s);
  const std::size_t b = detail::node_index(Y, t);
  double total = 0.0;
  for (const auto& w : boundary_set(m, fields.d())) {
    const auto g = apply_word(fields, w, F);
    if (g.is_zero()) continue;
    const auto gv = g.along(Y);
    const std::span<const double> weights(gv.data() + a, b - a + 1);
    total += weighted_iterated_integral(drv, w, s, t, weights);
  }
  return total;
}

}  // namespace chenfliess
