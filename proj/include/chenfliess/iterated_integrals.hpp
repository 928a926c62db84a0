#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chenfliess/errors.hpp"
#include "chenfliess/multi_index.hpp"
#include "chenfliess/path.hpp"

namespace chenfliess {

enum class DriverKind { bounded_variation, stratonovich };

/// Driving path X = (X^0, ..., X^d) with X^0_t = t.
///
/// bounded_variation: iterated integrals are those of the piecewise-linear
/// interpolant, computed exactly cell by cell (Chen's relation with the
/// segment signature prod(dX)/k!).
/// stratonovich: every level uses the midpoint weight
/// 1/2 (J(t_j) + J(t_{j+1})) (X_{t_{j+1}} - X_{t_j}).
class Driver {
 public:
  Driver(SampledPath path, DriverKind kind) : path_(std::move(path)), kind_(kind) {
    if (path_.dim() < 2) throw DomainError("driver needs a time coordinate and at least one noise");
    if (path_.has_jumps()) throw DomainError("driver paths must be continuous");
    if (path_.interpolation() != Interpolation::linear)
      throw DomainError("driver paths must use linear interpolation");
    for (std::size_t k = 0; k < path_.size(); ++k)
      if (path_.node(k, 0) != path_.times()[k])
        throw DomainError("driver coordinate 0 must equal the grid times");
  }

  /// Prepends the time coordinate to a d-dimensional path.
  static Driver from_path(const SampledPath& b, DriverKind kind) {
    std::vector<double> vals;
    vals.reserve(b.size() * (b.dim() + 1));
    for (std::size_t k = 0; k < b.size(); ++k) {
      vals.push_back(b.times()[k]);
      const auto v = b.node(k);
      vals.insert(vals.end(), v.begin(), v.end());
    }
    return Driver(SampledPath(b.times(), std::move(vals), b.dim() + 1), kind);
  }

  const SampledPath& path() const noexcept { return path_; }
  DriverKind kind() const noexcept { return kind_; }
  /// Number of noise coordinates d (letters run over 0..d).
  int d() const noexcept { return static_cast<int>(path_.dim()) - 1; }
  double horizon() const noexcept { return path_.horizon(); }

  /// Nodes of [s, t]: s, grid nodes strictly inside, t. Values interpolated
  /// at the ends; coordinate 0 is the node time.
  struct Window {
    std::vector<double> times;
    std::vector<double> values;  // row-major, (d+1) per node
    std::size_t width = 0;
    double increment(std::size_t j, int letter) const {
      return values[(j + 1) * width + letter] - values[j * width + letter];
    }
  };

  Window window(double s, double t) const {
    if (!(s <= t)) throw DomainError("iterated integral needs s <= t");
    path_.check_time(s);
    path_.check_time(t);
    Window w;
    w.width = path_.dim();
    auto push = [&](double time) {
      w.times.push_back(time);
      for (std::size_t c = 0; c < w.width; ++c)
        w.values.push_back(c == 0 ? time : path_.value(time, c));
    };
    push(s);
    const auto& ts = path_.times();
    for (std::size_t k = path_.last_at_or_before(s) + 1; k < ts.size() && ts[k] < t; ++k) {
      if (ts[k] <= s) continue;
      w.times.push_back(ts[k]);
      const auto v = path_.node(k);
      w.values.insert(w.values.end(), v.begin(), v.end());
    }
    if (t > s) push(t);
    return w;
  }

 private:
  SampledPath path_;
  DriverKind kind_;
};

/// Values of iterated integrals for an ordered list of words.
struct Signature {
  std::vector<MultiIndex> words;
  std::vector<double> values;

  double at(const MultiIndex& w) const {
    for (std::size_t k = 0; k < words.size(); ++k)
      if (words[k] == w) return values[k];
    throw DomainError("word " + w.str() + " not in signature");
  }
};

namespace detail {

// Prefix tree over a word set; parents precede children.
struct WordTrie {
  std::vector<int> parent;
  std::vector<int> letter;
  std::vector<std::vector<int>> chain;  // ancestors from depth 1 to self
  std::map<MultiIndex, int> index;

  int insert(const MultiIndex& w) {
    if (auto it = index.find(w); it != index.end()) return it->second;
    const int p = w.size() > 1 ? insert(w.prefix()) : -1;
    const int id = static_cast<int>(letter.size());
    parent.push_back(p);
    letter.push_back(w.back());
    chain.push_back(p < 0 ? std::vector<int>{} : chain[static_cast<std::size_t>(p)]);
    chain.back().push_back(id);
    index.emplace(w, id);
    return id;
  }
};

inline double inv_factorial(std::size_t k) {
  double f = 1.0;
  for (std::size_t j = 2; j <= k; ++j) f *= static_cast<double>(j);
  return 1.0 / f;
}

// One sweep over the window; `root` optionally weights the innermost
// integrand node by node (defaults to 1).
inline std::vector<double> sweep(const WordTrie& trie, const Driver::Window& win,
                                 DriverKind kind, std::span<const double> root = {}) {
  const std::size_t n = trie.letter.size();
  std::vector<double> cur(n, 0.0), nxt(n, 0.0);
  const std::size_t cells = win.times.size() - 1;
  const std::size_t width = win.width;
  std::vector<double> dx(width);
  std::vector<double> seg;
  for (std::size_t j = 0; j < cells; ++j) {
    for (std::size_t c = 0; c < width; ++c) dx[c] = win.increment(j, static_cast<int>(c));
    dx[0] = win.times[j + 1] - win.times[j];
    if (kind == DriverKind::stratonovich) {
      const double r0 = root.empty() ? 1.0 : root[j];
      const double r1 = root.empty() ? 1.0 : root[j + 1];
      for (std::size_t w = 0; w < n; ++w) {
        const int p = trie.parent[w];
        const double lo = p < 0 ? r0 : cur[static_cast<std::size_t>(p)];
        const double hi = p < 0 ? r1 : nxt[static_cast<std::size_t>(p)];
        nxt[w] = cur[w] + 0.5 * (lo + hi) * dx[static_cast<std::size_t>(trie.letter[w])];
      }
    } else {
      for (std::size_t w = 0; w < n; ++w) {
        const auto& ch = trie.chain[w];
        const std::size_t k = ch.size();
        double acc = cur[w];
        double prod = 1.0;
        // suffix ch[i..k-1] integrated over the cell, prefix up to ch[i-1] carried
        for (std::size_t i = k; i-- > 0;) {
          prod *= dx[static_cast<std::size_t>(trie.letter[static_cast<std::size_t>(ch[i])])];
          const double pre = i == 0 ? (root.empty() ? 1.0 : root[j])
                                    : cur[static_cast<std::size_t>(ch[i - 1])];
          acc += pre * prod * inv_factorial(k - i);
        }
        nxt[w] = acc;
      }
    }
    std::swap(cur, nxt);
  }
  return cur;
}

inline void check_letters(const Driver& drv, const MultiIndex& w) {
  if (w.empty()) throw DomainError("iterated integral of the empty word");
  if (w.max_letter() > drv.d())
    throw DomainError("word " + w.str() + " uses a letter beyond driver dimension " +
                      std::to_string(drv.d()));
}

}  // namespace detail

/// Integral of dX^{i1} ... dX^{ik} over s <= t1 <= ... <= tk <= t, with the
/// last letter outermost.
inline double iterated_integral(const Driver& drv, const MultiIndex& word, double s, double t) {
  detail::check_letters(drv, word);
  detail::WordTrie trie;
  const int id = trie.insert(word);
  const auto win = drv.window(s, t);
  return detail::sweep(trie, win, drv.kind())[static_cast<std::size_t>(id)];
}

/// Iterated integral whose innermost integrand is weighted by G(t1); the
/// weights are given on the nodes of drv.window(s, t).
inline double weighted_iterated_integral(const Driver& drv, const MultiIndex& word, double s,
                                         double t, std::span<const double> weights) {
  detail::check_letters(drv, word);
  const auto win = drv.window(s, t);
  if (weights.size() != win.times.size())
    throw DomainError("weights do not match the window of [s, t]");
  detail::WordTrie trie;
  const int id = trie.insert(word);
  return detail::sweep(trie, win, drv.kind(), weights)[static_cast<std::size_t>(id)];
}

/// Iterated integrals for every word in `words` in one sweep, sharing
/// inner prefixes.
inline Signature signature(const Driver& drv, std::vector<MultiIndex> words, double s, double t) {
  detail::WordTrie trie;
  std::vector<int> ids;
  ids.reserve(words.size());
  for (const auto& w : words) {
    detail::check_letters(drv, w);
    ids.push_back(trie.insert(w));
  }
  const auto win = drv.window(s, t);
  const auto all = detail::sweep(trie, win, drv.kind());
  Signature sig;
  sig.words = std::move(words);
  sig.values.reserve(ids.size());
  for (int id : ids) sig.values.push_back(all[static_cast<std::size_t>(id)]);
  return sig;
}

/// Iterated integrals for all of A(m), canonical order.
inline Signature signature_up_to(const Driver& drv, int m, double s, double t) {
  return signature(drv, enumerate_A(m, drv.d()), s, t);
}

inline void write_signature_csv(std::ostream& os, const Signature& sig) {
  os << "word,value\n" << std::setprecision(17);
  for (std::size_t k = 0; k < sig.words.size(); ++k)
    os << sig.words[k].str() << ',' << sig.values[k] << '\n';
}

}  // namespace chenfliess
