#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <set>
#include <string>
#include <vector>

#include "chenfliess/errors.hpp"

namespace chenfliess {

/// A word over the alphabet {0, 1, ..., d}. Letter 0 is the time direction.
///
/// The first letter pairs with the innermost (earliest) integration variable
/// and with the outermost derivation; see derivations.hpp.
class MultiIndex {
 public:
  MultiIndex() = default;
  MultiIndex(std::initializer_list<int> letters) : letters_(letters) { check(); }
  explicit MultiIndex(std::vector<int> letters) : letters_(std::move(letters)) { check(); }

  const std::vector<int>& letters() const noexcept { return letters_; }
  bool empty() const noexcept { return letters_.empty(); }
  std::size_t size() const noexcept { return letters_.size(); }
  int operator[](std::size_t k) const { return letters_[k]; }
  int front() const { return letters_.front(); }
  int back() const { return letters_.back(); }

  /// |I|: number of letters.
  int degree() const noexcept { return static_cast<int>(letters_.size()); }

  /// ||I|| = |I| + number of zero letters.
  int weight() const noexcept {
    return degree() + static_cast<int>(std::count(letters_.begin(), letters_.end(), 0));
  }

  int max_letter() const noexcept {
    return letters_.empty() ? -1 : *std::max_element(letters_.begin(), letters_.end());
  }

  /// (i2, ..., iN).
  MultiIndex tail() const {
    return letters_.empty() ? MultiIndex{}
                            : MultiIndex(std::vector<int>(letters_.begin() + 1, letters_.end()));
  }

  /// (i1, ..., i_{N-1}).
  MultiIndex prefix() const {
    return letters_.empty() ? MultiIndex{}
                            : MultiIndex(std::vector<int>(letters_.begin(), letters_.end() - 1));
  }

  MultiIndex prepend(int letter) const {
    std::vector<int> v;
    v.reserve(letters_.size() + 1);
    v.push_back(letter);
    v.insert(v.end(), letters_.begin(), letters_.end());
    return MultiIndex(std::move(v));
  }

  MultiIndex append(int letter) const {
    auto v = letters_;
    v.push_back(letter);
    return MultiIndex(std::move(v));
  }

  friend MultiIndex operator*(const MultiIndex& a, const MultiIndex& b) {
    auto v = a.letters_;
    v.insert(v.end(), b.letters_.begin(), b.letters_.end());
    return MultiIndex(std::move(v));
  }

  /// Dotted text form, e.g. "1.1.0".
  std::string str() const {
    std::string s;
    for (std::size_t k = 0; k < letters_.size(); ++k) {
      if (k) s += '.';
      s += std::to_string(letters_[k]);
    }
    return s;
  }

  static MultiIndex parse(const std::string& text) {
    std::vector<int> v;
    std::size_t pos = 0;
    if (text.empty()) throw DomainError("empty word");
    while (pos <= text.size()) {
      const auto dot = text.find('.', pos);
      const auto tok = text.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
      if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw DomainError("malformed word '" + text + "'");
      v.push_back(std::stoi(tok));
      if (dot == std::string::npos) break;
      pos = dot + 1;
    }
    return MultiIndex(std::move(v));
  }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex& a, const MultiIndex& b) {
    return a.letters_ <=> b.letters_;
  }

 private:
  void check() const {
    for (int l : letters_)
      if (l < 0) throw DomainError("negative letter in word");
  }

  std::vector<int> letters_;
};

/// Canonical ordering: weight, then degree, then lexicographic.
struct CanonicalOrder {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const {
    if (a.weight() != b.weight()) return a.weight() < b.weight();
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    return a.letters() < b.letters();
  }
};

inline void sort_canonical(std::vector<MultiIndex>& words) {
  std::sort(words.begin(), words.end(), CanonicalOrder{});
}

/// All nonempty words over {0..d} with weight <= m, in canonical order.
inline std::vector<MultiIndex> enumerate_A(int m, int d) {
  if (m < 1 || d < 1) throw DomainError("enumerate_A needs m >= 1 and d >= 1");
  std::vector<MultiIndex> out;
  std::vector<MultiIndex> frontier{MultiIndex{}};
  while (!frontier.empty()) {
    std::vector<MultiIndex> next;
    for (const auto& w : frontier)
      for (int a = 0; a <= d; ++a) {
        auto v = w.append(a);
        if (v.weight() <= m) next.push_back(std::move(v));
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  sort_canonical(out);
  return out;
}

/// Words of degree 1..max_degree over {0..d}, canonical order. These are the
/// features of a level-N polynomial functional.
inline std::vector<MultiIndex> enumerate_by_degree(int max_degree, int d) {
  if (max_degree < 1 || d < 1) throw DomainError("enumerate_by_degree needs N >= 1 and d >= 1");
  std::vector<MultiIndex> out;
  std::vector<MultiIndex> frontier{MultiIndex{}};
  for (int k = 1; k <= max_degree; ++k) {
    std::vector<MultiIndex> next;
    for (const auto& w : frontier)
      for (int a = 0; a <= d; ++a) next.push_back(w.append(a));
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::stable_sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    return a.letters() < b.letters();
  });
  return out;
}

/// Words (i1, ..., iN) outside A(m) whose tail (i2, ..., iN) lies in A(m);
/// a single letter qualifies when it lies outside A(m) (empty tail). Members
/// have weight m+1 or m+2. Words longer than max_degree are dropped.
inline std::vector<MultiIndex> boundary_set(int m, int d, int max_degree = 64) {
  if (m < 1 || d < 1) throw DomainError("boundary_set needs m >= 1 and d >= 1");
  std::set<MultiIndex> found;
  for (int a = 0; a <= d; ++a) {
    MultiIndex single{a};
    if (single.weight() > m) found.insert(single);
  }
  for (const auto& tail : enumerate_A(m, d))
    for (int a = 0; a <= d; ++a) {
      auto w = tail.prepend(a);
      if (w.weight() > m && w.degree() <= max_degree) found.insert(std::move(w));
    }
  std::vector<MultiIndex> out(found.begin(), found.end());
  sort_canonical(out);
  return out;
}

/// All interleavings of a and b, with multiplicity.
inline std::vector<MultiIndex> shuffles(const MultiIndex& a, const MultiIndex& b) {
  if (a.empty()) return {b};
  if (b.empty()) return {a};
  std::vector<MultiIndex> out;
  for (auto& w : shuffles(a.prefix(), b)) out.push_back(w.append(a.back()));
  for (auto& w : shuffles(a, b.prefix())) out.push_back(w.append(b.back()));
  return out;
}

}  // namespace chenfliess
