#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chenfliess/errors.hpp"

namespace chenfliess {

enum class Interpolation { linear, cadlag };

/// A path sampled on a finite time grid [0, T] with values in R^e.
///
/// Times are non-decreasing, start at 0 and end at T. A time may appear at
/// most twice in a row: the pair (t, x(t-)), (t, x(t)) encodes a jump at t.
/// Evaluation is right-continuous, so x(t) at a jump returns the later node.
/// Between distinct nodes the interpolation tag decides: `linear` joins
/// neighbouring nodes by segments, `cadlag` holds the value of the last node
/// at or before t.
class SampledPath {
 public:
  SampledPath() = default;

  SampledPath(std::vector<double> times, std::vector<double> values, std::size_t dim,
              Interpolation interp = Interpolation::linear)
      : times_(std::move(times)), values_(std::move(values)), dim_(dim), interp_(interp) {
    validate();
  }

  /// Constant path on the two-node grid {0, T}.
  static SampledPath constant(std::span<const double> value, double horizon,
                              Interpolation interp = Interpolation::linear) {
    std::vector<double> vals(value.begin(), value.end());
    vals.insert(vals.end(), value.begin(), value.end());
    return SampledPath({0.0, horizon}, std::move(vals), value.size(), interp);
  }

  /// Samples `fn(t) -> std::vector<double>` on n+1 uniform nodes of [0, T].
  template <class Fn>
  static SampledPath sample(Fn&& fn, double horizon, std::size_t n,
                            Interpolation interp = Interpolation::linear) {
    std::vector<double> times(n + 1);
    std::vector<double> vals;
    std::size_t dim = 0;
    for (std::size_t k = 0; k <= n; ++k) {
      times[k] = k == n ? horizon : horizon * static_cast<double>(k) / static_cast<double>(n);
      const auto v = fn(times[k]);
      if (k == 0) dim = v.size();
      vals.insert(vals.end(), v.begin(), v.end());
    }
    return SampledPath(std::move(times), std::move(vals), dim, interp);
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return times_.size(); }
  double horizon() const noexcept { return times_.back(); }
  Interpolation interpolation() const noexcept { return interp_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& raw_values() const noexcept { return values_; }

  std::span<const double> node(std::size_t k) const {
    return {values_.data() + k * dim_, dim_};
  }
  double node(std::size_t k, std::size_t coord) const { return values_[k * dim_ + coord]; }

  bool has_jumps() const noexcept {
    for (std::size_t k = 1; k < times_.size(); ++k)
      if (times_[k] == times_[k - 1]) return true;
    return false;
  }

  /// Right-continuous value at t.
  std::vector<double> operator()(double t) const {
    std::vector<double> out(dim_);
    for (std::size_t c = 0; c < dim_; ++c) out[c] = value(t, c);
    return out;
  }

  double value(double t, std::size_t coord) const {
    check_time(t);
    const std::size_t k = last_at_or_before(t);
    if (k + 1 == times_.size() || interp_ == Interpolation::cadlag || times_[k] == t)
      return node(k, coord);
    return lerp(k, coord, t);
  }

  /// Left limit x(t-); equals x(0) at t = 0.
  double left_limit(double t, std::size_t coord) const {
    check_time(t);
    if (t == 0.0) return node(0, coord);
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    const auto k = static_cast<std::size_t>(it - times_.begin());
    if (interp_ == Interpolation::cadlag) return node(k - 1, coord);
    if (k < times_.size() && times_[k] == t) return node(k, coord);
    return lerp(k - 1, coord, t);
  }

  std::vector<double> left_limit(double t) const {
    std::vector<double> out(dim_);
    for (std::size_t c = 0; c < dim_; ++c) out[c] = left_limit(t, c);
    return out;
  }

  bool has_node_at(double t) const {
    return std::binary_search(times_.begin(), times_.end(), t);
  }

  /// Index of the last node with time <= t.
  std::size_t last_at_or_before(double t) const {
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return static_cast<std::size_t>(it - times_.begin()) - 1;
  }

  void check_time(double t) const {
    if (!(t >= 0.0 && t <= horizon()))
      throw DomainError("time " + std::to_string(t) + " outside [0, " +
                        std::to_string(horizon()) + "]");
  }

 private:
  double lerp(std::size_t k, std::size_t coord, double t) const {
    const double t0 = times_[k], t1 = times_[k + 1];
    const double a = node(k, coord), b = node(k + 1, coord);
    return a + (b - a) * ((t - t0) / (t1 - t0));
  }

  void validate() const {
    if (dim_ == 0) throw DomainError("path dimension must be positive");
    if (times_.size() < 2) throw DomainError("path needs at least two nodes");
    if (values_.size() != times_.size() * dim_)
      throw DomainError("path values do not match times x dimension");
    if (times_.front() != 0.0) throw DomainError("path grid must start at 0");
    if (!(times_.back() > 0.0)) throw DomainError("path horizon must be positive");
    for (std::size_t k = 1; k < times_.size(); ++k) {
      if (!(times_[k] >= times_[k - 1])) throw DomainError("path times must be non-decreasing");
      if (k >= 2 && times_[k] == times_[k - 2])
        throw DomainError("a path time may appear at most twice");
    }
    if (times_[1] == 0.0) throw DomainError("a jump at time 0 is not representable");
    for (double v : values_)
      if (!std::isfinite(v)) throw DomainError("path values must be finite");
  }

  std::vector<double> times_;
  std::vector<double> values_;
  std::size_t dim_ = 0;
  Interpolation interp_ = Interpolation::linear;
};

/// A point (t, x) of the path space on which nonanticipative functionals act.
struct StoppedPoint {
  double t = 0.0;
  SampledPath path;
};

/// The stopping operator: agrees with x on [0, t] and is frozen at x(t) after.
inline SampledPath stop_at(const SampledPath& x, double t) {
  x.check_time(t);
  const std::size_t e = x.dim();
  std::vector<double> times;
  std::vector<double> vals;
  const std::size_t last = x.last_at_or_before(t);
  times.reserve(last + 3);
  vals.reserve((last + 3) * e);
  for (std::size_t k = 0; k <= last; ++k) {
    times.push_back(x.times()[k]);
    const auto v = x.node(k);
    vals.insert(vals.end(), v.begin(), v.end());
  }
  const auto frozen = x(t);
  if (times.back() != t) {
    times.push_back(t);
    vals.insert(vals.end(), frozen.begin(), frozen.end());
  }
  if (t < x.horizon()) {
    times.push_back(x.horizon());
    vals.insert(vals.end(), frozen.begin(), frozen.end());
  }
  return SampledPath(std::move(times), std::move(vals), e, x.interpolation());
}

/// Dupire bump x + eps * e_i * 1_{. >= t}. `coord` is 1-based. For t > 0 the
/// jump is stored as a duplicated node (t, x(t-)), (t, x(t) + eps e_i).
inline SampledPath bump(const SampledPath& x, double t, std::size_t coord, double eps) {
  x.check_time(t);
  if (coord < 1 || coord > x.dim())
    throw DomainError("bump coordinate " + std::to_string(coord) + " outside 1.." +
                      std::to_string(x.dim()));
  if (eps == 0.0) return x;
  const std::size_t e = x.dim();
  const std::size_t c = coord - 1;
  std::vector<double> times;
  std::vector<double> vals;
  times.reserve(x.size() + 2);
  vals.reserve((x.size() + 2) * e);
  auto push = [&](double time, std::span<const double> v, double shift) {
    times.push_back(time);
    vals.insert(vals.end(), v.begin(), v.end());
    vals[vals.size() - e + c] += shift;
  };

  if (t == 0.0) {
    for (std::size_t k = 0; k < x.size(); ++k) push(x.times()[k], x.node(k), eps);
    return SampledPath(std::move(times), std::move(vals), e, x.interpolation());
  }

  std::size_t k = 0;
  for (; k < x.size() && x.times()[k] < t; ++k) push(x.times()[k], x.node(k), 0.0);
  const bool has_jump = k + 1 < x.size() && x.times()[k] == t && x.times()[k + 1] == t;
  if (has_jump) {
    push(t, x.node(k), 0.0);
    ++k;
  } else {
    const auto left = x.left_limit(t);
    push(t, left, 0.0);
    if (k < x.size() && x.times()[k] == t) {
      push(t, x.node(k), eps);
      ++k;
    } else {
      const auto here = x(t);
      push(t, here, eps);
    }
  }
  for (; k < x.size(); ++k) push(x.times()[k], x.node(k), eps);
  return SampledPath(std::move(times), std::move(vals), e, x.interpolation());
}

/// Sum of Euclidean norms of node increments. Exact 1-variation for linear
/// interpolation; counts jump magnitudes for cadlag paths.
inline double one_var_norm(const SampledPath& x) {
  double total = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) {
    double sq = 0.0;
    for (std::size_t c = 0; c < x.dim(); ++c) {
      const double dv = x.node(k, c) - x.node(k - 1, c);
      sq += dv * dv;
    }
    total += std::sqrt(sq);
  }
  return total;
}

namespace detail {

// Node sequence of a - b on the union of both grids, with left limits
// emitted at every positive time so jumps in either operand are preserved.
inline std::vector<std::vector<double>> merged_difference(const SampledPath& a,
                                                          const SampledPath& b) {
  if (a.dim() != b.dim()) throw DomainError("paths differ in dimension");
  if (a.horizon() != b.horizon()) throw DomainError("paths differ in horizon");
  if (a.interpolation() != b.interpolation())
    throw DomainError("paths differ in interpolation");
  std::vector<double> grid;
  grid.reserve(a.size() + b.size());
  std::merge(a.times().begin(), a.times().end(), b.times().begin(), b.times().end(),
             std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<std::vector<double>> out;
  out.reserve(2 * grid.size());
  const std::size_t e = a.dim();
  for (double t : grid) {
    if (t > 0.0) {
      std::vector<double> d(e);
      for (std::size_t c = 0; c < e; ++c) d[c] = a.left_limit(t, c) - b.left_limit(t, c);
      out.push_back(std::move(d));
    }
    std::vector<double> d(e);
    for (std::size_t c = 0; c < e; ++c) d[c] = a.value(t, c) - b.value(t, c);
    out.push_back(std::move(d));
  }
  return out;
}

inline double euclid(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

}  // namespace detail

/// |t - s| + |a_t x - a_s y|_{1-var}.
inline double rho_one_var(const StoppedPoint& a, const StoppedPoint& b) {
  const auto diff = detail::merged_difference(stop_at(a.path, a.t), stop_at(b.path, b.t));
  double var = 0.0;
  for (std::size_t k = 1; k < diff.size(); ++k) {
    double sq = 0.0;
    for (std::size_t c = 0; c < diff[k].size(); ++c) {
      const double dv = diff[k][c] - diff[k - 1][c];
      sq += dv * dv;
    }
    var += std::sqrt(sq);
  }
  return std::abs(a.t - b.t) + var;
}

/// |t - s| + sup_r |a_t x(r) - a_s y(r)|.
inline double rho_infty(const StoppedPoint& a, const StoppedPoint& b) {
  const auto diff = detail::merged_difference(stop_at(a.path, a.t), stop_at(b.path, b.t));
  double sup = 0.0;
  for (const auto& d : diff) sup = std::max(sup, detail::euclid(d));
  return std::abs(a.t - b.t) + sup;
}

// --- CSV ------------------------------------------------------------------

inline void write_path_csv(std::ostream& os, const SampledPath& x) {
  os << "t";
  for (std::size_t c = 1; c <= x.dim(); ++c) os << ",x" << c;
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t k = 0; k < x.size(); ++k) {
    os << x.times()[k];
    for (std::size_t c = 0; c < x.dim(); ++c) os << ',' << x.node(k, c);
    os << '\n';
  }
}

inline SampledPath read_path_csv(std::istream& is,
                                 Interpolation interp = Interpolation::linear) {
  std::string line;
  if (!std::getline(is, line)) throw DomainError("empty path CSV");
  std::size_t dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  if (line.rfind("t,", 0) != 0 || dim == 0) throw DomainError("bad path CSV header: " + line);
  std::vector<double> times, vals;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      const double v = std::stod(cell);
      if (col == 0)
        times.push_back(v);
      else
        vals.push_back(v);
      ++col;
    }
    if (col != dim + 1) throw DomainError("path CSV row has wrong column count: " + line);
  }
  return SampledPath(std::move(times), std::move(vals), dim, interp);
}

inline void save_path_csv(const std::string& file, const SampledPath& x) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file);
  write_path_csv(os, x);
}

inline SampledPath load_path_csv(const std::string& file,
                                 Interpolation interp = Interpolation::linear) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot read " + file);
  return read_path_csv(is, interp);
}

}  // namespace chenfliess
