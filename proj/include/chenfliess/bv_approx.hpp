#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "chenfliess/errors.hpp"
#include "chenfliess/functional.hpp"
#include "chenfliess/iterated_integrals.hpp"
#include "chenfliess/multi_index.hpp"
#include "chenfliess/parallel.hpp"
#include "chenfliess/path.hpp"
#include "chenfliess/sde.hpp"

namespace chenfliess {

/// P(t, b) = sum_I p_I int_{0<t1<..<tk<t} db^I, words over {0, ..., d}
/// where letter 0 is time.
struct PolynomialFunctional {
  int d = 1;
  std::vector<MultiIndex> words;
  std::vector<double> coefficients;

  int level() const {
    int n = 0;
    for (const auto& w : words) n = std::max(n, w.degree());
    return n;
  }

  void write_csv(std::ostream& os) const {
    os << "word,coefficient\n" << std::setprecision(17);
    for (std::size_t k = 0; k < words.size(); ++k) os << words[k].str() << ',' << coefficients[k] << '\n';
  }
};

/// Signature features of the stopped point (t, b): the BV iterated integrals
/// of (r, b_r) over [0, t] for the given words.
inline std::vector<double> signature_features(const StoppedPoint& p,
                                              const std::vector<MultiIndex>& words) {
  const auto drv = Driver::from_path(p.path, DriverKind::bounded_variation);
  return signature(drv, words, 0.0, p.t).values;
}

inline double eval_polynomial(const PolynomialFunctional& P, double t, const SampledPath& b) {
  if (P.words.empty()) return 0.0;
  if (static_cast<int>(b.dim()) != P.d) throw DomainError("path dimension differs from P.d");
  const auto f = signature_features({t, b}, P.words);
  double v = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) v += P.coefficients[k] * f[k];
  return v;
}

struct FitReport {
  PolynomialFunctional polynomial;
  double train_sup_error = 0.0;
  double holdout_sup_error = 0.0;
  std::size_t rank = 0;
  bool rank_deficient = false;
};

/// Least squares on signature features of degree 1..N (no constant word).
/// Columns are scaled to unit norm and solved by a complete orthogonal
/// decomposition, which gives the minimum-norm solution when rank deficient.
inline FitReport fit(const Functional& target, const std::vector<StoppedPoint>& corpus, int N,
                     const std::vector<StoppedPoint>& holdout = {}, std::size_t workers = 1) {
  if (N < 1) throw DomainError("fit level N must be at least 1");
  if (corpus.empty()) throw DomainError("fit needs a non-empty corpus");
  const int d = static_cast<int>(corpus.front().path.dim());
  for (const auto& p : corpus)
    if (static_cast<int>(p.path.dim()) != d) throw DomainError("corpus paths differ in dimension");

  const auto words = enumerate_by_degree(N, d);
  const auto rows = parallel_map(corpus.size(), workers,
                                 [&](std::size_t k) { return signature_features(corpus[k], words); });
  const auto n = static_cast<Eigen::Index>(corpus.size());
  const auto m = static_cast<Eigen::Index>(words.size());
  Eigen::MatrixXd A(n, m);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m; ++j) A(i, j) = row[static_cast<std::size_t>(j)];
    const auto& p = corpus[static_cast<std::size_t>(i)];
    y(i) = target(p.t, p.path);
  }
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < m; ++j)
    if (scale(j) == 0.0) scale(j) = 1.0;
  const Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(1e-10);
  cod.compute(As);
  const Eigen::VectorXd c = cod.solve(y).cwiseQuotient(scale);

  FitReport rep;
  rep.rank = static_cast<std::size_t>(cod.rank());
  rep.rank_deficient = cod.rank() < m;
  rep.polynomial.d = d;
  rep.polynomial.words = words;
  rep.polynomial.coefficients.assign(c.data(), c.data() + c.size());
  rep.train_sup_error = (A * c - y).cwiseAbs().maxCoeff();

  const auto errs = parallel_map(holdout.size(), workers, [&](std::size_t k) {
    const auto& p = holdout[k];
    return std::abs(eval_polynomial(rep.polynomial, p.t, p.path) - target(p.t, p.path));
  });
  for (double e : errs) rep.holdout_sup_error = std::max(rep.holdout_sup_error, e);
  return rep;
}

/// Paths r -> sum_{k=1}^{K} a_k sin(k pi r) per coordinate on [0, 1] with
/// |a_k| <= coefficient_bound, stopped at t uniform in [t_min, 1].
struct SineFamily {
  int d = 1;
  int n_terms = 3;
  double coefficient_bound = 1.0;
  std::size_t n_grid = 256;
  double t_min = 0.25;

  void validate() const {
    if (d < 1 || n_terms < 1) throw DomainError("sine family needs d >= 1 and n_terms >= 1");
    if (!(coefficient_bound > 0.0)) throw DomainError("coefficient bound must be positive");
    if (n_grid < 2) throw DomainError("sine family grid needs at least 2 cells");
    if (!(t_min > 0.0 && t_min <= 1.0)) throw DomainError("t_min must lie in (0, 1]");
  }

  std::vector<StoppedPoint> sample(std::size_t count, std::uint64_t seed) const {
    validate();
    std::vector<StoppedPoint> out;
    out.reserve(count);
    const auto K = static_cast<std::size_t>(n_terms);
    const auto D = static_cast<std::size_t>(d);
    for (std::size_t s = 0; s < count; ++s) {
      std::vector<double> a(K * D);
      for (std::size_t j = 0; j < a.size(); ++j)
        a[j] = coefficient_bound * (2.0 * rng::uniform(rng::key(seed, s, 0, j)) - 1.0);
      const double t = t_min + (1.0 - t_min) * rng::uniform(rng::key(seed, s, 1, 0));
      auto path = SampledPath::sample(
          [&](double r) {
            std::vector<double> v(D, 0.0);
            for (std::size_t c = 0; c < D; ++c)
              for (std::size_t k = 0; k < K; ++k)
                v[c] += a[c * K + k] * std::sin(static_cast<double>(k + 1) * std::numbers::pi * r);
            return v;
          },
          1.0, n_grid);
      out.push_back({t, std::move(path)});
    }
    return out;
  }
};

struct Separation {
  MultiIndex word;
  double difference = 0.0;  // integral along a minus integral along b
};

/// Searches (0) when the stopping times differ, then (0^k, i) for k = 0..L,
/// i = 1..d: the moments int_0^t r^k / k! d(a - b)^i. Returns the first
/// word whose integrals differ by more than tol.
inline std::optional<Separation> find_separating_word(const StoppedPoint& a, const StoppedPoint& b,
                                                      int L, double tol = 1e-9) {
  if (a.path.dim() != b.path.dim()) throw DomainError("paths differ in dimension");
  if (L < 0) throw DomainError("L must be non-negative");
  if (a.t != b.t) return Separation{MultiIndex{0}, a.t - b.t};
  for (std::size_t c = 0; c < a.path.dim(); ++c)
    if (a.path.node(0, c) != b.path.node(0, c))
      throw DomainError("paths must share their initial value");
  const int d = static_cast<int>(a.path.dim());
  std::vector<MultiIndex> words;
  for (int k = 0; k <= L; ++k)
    for (int i = 1; i <= d; ++i) {
      std::vector<int> letters(static_cast<std::size_t>(k), 0);
      letters.push_back(i);
      words.emplace_back(std::move(letters));
    }
  const auto fa = signature_features(a, words);
  const auto fb = signature_features(b, words);
  for (std::size_t j = 0; j < words.size(); ++j)
    if (std::abs(fa[j] - fb[j]) > tol) return Separation{words[j], fa[j] - fb[j]};
  return std::nullopt;
}

}  // namespace chenfliess
