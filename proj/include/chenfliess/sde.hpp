#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "chenfliess/derivations.hpp"
#include "chenfliess/errors.hpp"
#include "chenfliess/iterated_integrals.hpp"
#include "chenfliess/path.hpp"

namespace chenfliess {

struct SimulationConfig {
  int d = 1;
  int e = 1;
  double T = 1.0;
  std::size_t n_steps = 512;
  std::size_t substep_ratio = 1;
  std::uint64_t seed = 1;
  std::size_t n_paths = 1000;

  /// Nodes of the simulation grid minus one.
  std::size_t grid_steps() const { return n_steps * substep_ratio; }

  void validate() const {
    if (d < 1 || e < 1) throw DomainError("d and e must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("horizon T must be positive");
    if (n_steps < 1) throw DomainError("n_steps must be at least 1");
    if (substep_ratio < 1) throw DomainError("substep_ratio must be at least 1");
    if (n_paths < 1) throw DomainError("n_paths must be at least 1");
  }
};

/// Counter-based normal variates: each (seed, stream, step, coord) maps to
/// a fixed N(0,1) draw, so results do not depend on scheduling.
namespace rng {

inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t key(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                         std::uint64_t coord) {
  std::uint64_t h = mix(seed);
  h = mix(h ^ stream);
  h = mix(h ^ step);
  return mix(h ^ coord);
}

/// Uniform on (0, 1].
inline double uniform(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                     std::uint64_t coord) {
  const std::uint64_t k = key(seed, stream, step, coord);
  const double u1 = uniform(mix(k));
  const double u2 = uniform(mix(k ^ 0xa0761d6478bd642fULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Seed for an independent family of paths (e.g. one per t value).
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t family) {
  return mix(seed ^ mix(family + 0x632be59bd9b4e019ULL));
}

}  // namespace rng

/// Brownian driver (t, B^1, ..., B^d) on the uniform grid of cfg.grid_steps()
/// cells over [0, T]; a pure function of (cfg.seed, path_index).
inline Driver sample_driver(const SimulationConfig& cfg, std::uint64_t path_index) {
  cfg.validate();
  const std::size_t n = cfg.grid_steps();
  const std::size_t w = static_cast<std::size_t>(cfg.d) + 1;
  std::vector<double> times(n + 1);
  std::vector<double> vals((n + 1) * w, 0.0);
  for (std::size_t k = 0; k <= n; ++k)
    times[k] = k == n ? cfg.T : cfg.T * static_cast<double>(k) / static_cast<double>(n);
  for (std::size_t k = 0; k <= n; ++k) vals[k * w] = times[k];
  for (std::size_t k = 0; k < n; ++k) {
    const double sd = std::sqrt(times[k + 1] - times[k]);
    for (std::size_t c = 1; c < w; ++c)
      vals[(k + 1) * w + c] = vals[k * w + c] + sd * rng::normal(cfg.seed, path_index, k, c);
  }
  return Driver(SampledPath(std::move(times), std::move(vals), w), DriverKind::stratonovich);
}

/// Keeps every `factor`-th node; the coarse increments are sums of fine ones.
inline Driver coarsen(const Driver& fine, std::size_t factor) {
  const auto& p = fine.path();
  const std::size_t cells = p.size() - 1;
  if (factor < 1 || cells % factor != 0)
    throw DomainError("coarsening factor must divide the number of cells");
  std::vector<double> times, vals;
  for (std::size_t k = 0; k <= cells; k += factor) {
    times.push_back(p.times()[k]);
    const auto v = p.node(k);
    vals.insert(vals.end(), v.begin(), v.end());
  }
  return Driver(SampledPath(std::move(times), std::move(vals), p.dim()), fine.kind());
}

/// Heun (predictor-corrector) scheme for dY = sum_i V_i(Y) o dX^i:
///   yhat = y + sum_i V_i(y) dX^i,  y' = y + sum_i (V_i(y) + V_i(yhat)) dX^i / 2.
inline SampledPath solve_stratonovich(const VectorFieldSet& fields, std::span<const double> y0,
                                      const Driver& drv) {
  const auto e = static_cast<std::size_t>(fields.e());
  if (y0.size() != e) throw DomainError("initial state has wrong dimension");
  if (fields.d() != drv.d()) throw DomainError("driver and vector fields differ in d");
  const auto& p = drv.path();
  const std::size_t n = p.size();
  const std::size_t w = p.dim();
  std::vector<double> vals(n * e);
  std::copy(y0.begin(), y0.end(), vals.begin());

  std::vector<char> active(w);
  for (std::size_t i = 0; i < w; ++i) active[i] = !fields.field(static_cast<int>(i)).is_zero();

  std::vector<double> y(e), yhat(e), f0(w * e), f1(e), dx(w);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    std::copy(vals.begin() + static_cast<std::ptrdiff_t>(k * e),
              vals.begin() + static_cast<std::ptrdiff_t>((k + 1) * e), y.begin());
    for (std::size_t i = 0; i < w; ++i) dx[i] = p.node(k + 1, i) - p.node(k, i);
    yhat = y;
    for (std::size_t i = 0; i < w; ++i) {
      if (!active[i]) continue;
      std::span<double> fi(f0.data() + i * e, e);
      fields.field(static_cast<int>(i)).eval(y, fi);
      for (std::size_t j = 0; j < e; ++j) yhat[j] += fi[j] * dx[i];
    }
    double* out = vals.data() + (k + 1) * e;
    for (std::size_t j = 0; j < e; ++j) out[j] = y[j];
    for (std::size_t i = 0; i < w; ++i) {
      if (!active[i]) continue;
      fields.field(static_cast<int>(i)).eval(yhat, f1);
      for (std::size_t j = 0; j < e; ++j) out[j] += 0.5 * (f0[i * e + j] + f1[j]) * dx[i];
    }
    for (std::size_t j = 0; j < e; ++j)
      if (!std::isfinite(out[j])) throw NumericalBlowup("non-finite SDE state", k + 1);
  }
  return SampledPath(p.times(), std::move(vals), e);
}

}  // namespace chenfliess
