#pragma once

#include <cctype>
#include <cstddef>
#include <exception>
#include <set>
#include <string>
#include <vector>

#include "chenfliess/config.hpp"
#include "chenfliess/derivations.hpp"
#include "chenfliess/errors.hpp"
#include "chenfliess/functional.hpp"
#include "chenfliess/scalar_function.hpp"

// Text forms used by experiment configs.
//
//   scalar function   poly(c0,c1,...) | sin(a,w,p) | cos(a,w,p) | gauss(a,w)
//                     | logistic(a,w,b)
//   vector field      components separated by ';', terms by '+', factors by
//                     '*'. A factor is a number or fn@j, fn applied to y^j.
//                     Example: "0.5*sin(1,1,0)@1 ; 1 + -0.2*poly(0,1)@2"
//   functional        a [functional] section with a `type` key; product and
//                     sum refer to other sections [functional.NAME].

namespace chenfliess::catalog {

namespace detail {

inline std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const char c = s[k];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    // a '+' right after an exponent marker belongs to the number
    const bool exponent = sep == '+' && k > 0 && (s[k - 1] == 'e' || s[k - 1] == 'E') &&
                          k > 1 && (std::isdigit(static_cast<unsigned char>(s[k - 2])) || s[k - 2] == '.');
    if (c == sep && depth == 0 && !exponent) {
      out.push_back(Config::trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(Config::trim(cur));
  return out;
}

inline double number(const std::string& s, int line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) throw ConfigError("expected a number, got '" + s + "'", line);
  return v;
}

inline bool is_number(const std::string& s) {
  std::size_t pos = 0;
  try {
    std::stod(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == s.size();
}

inline int index(const std::string& s, int lo, int hi, int line, const std::string& what) {
  const double v = number(s, line);
  if (v != static_cast<double>(static_cast<int>(v)) || v < lo || v > hi)
    throw ConfigError(what + " must be an integer in " + std::to_string(lo) + ".." +
                          std::to_string(hi) + ", got '" + s + "'",
                      line);
  return static_cast<int>(v);
}

}  // namespace detail

inline ScalarFunction scalar_function(const std::string& text, int line = 0) {
  const std::string s = Config::trim(text);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')')
    throw ConfigError("expected name(args) for a scalar function, got '" + s + "'", line);
  const std::string name = Config::trim(s.substr(0, open));
  std::vector<double> args;
  const std::string inner = s.substr(open + 1, s.size() - open - 2);
  if (!Config::trim(inner).empty())
    for (const auto& a : detail::split_top(inner, ',')) args.push_back(detail::number(a, line));
  auto need = [&](std::size_t n) {
    if (args.size() != n)
      throw ConfigError(name + " takes " + std::to_string(n) + " arguments", line);
  };
  if (name == "poly") {
    if (args.empty()) throw ConfigError("poly needs at least one coefficient", line);
    return ScalarFunction::polynomial(args);
  }
  if (name == "sin") return need(3), ScalarFunction::sine(args[0], args[1], args[2]);
  if (name == "cos") return need(3), ScalarFunction::cosine(args[0], args[1], args[2]);
  if (name == "logistic") return need(3), ScalarFunction::logistic(args[0], args[1], args[2]);
  if (name == "gauss") {
    need(2);
    if (!(args[1] > 0.0)) throw ConfigError("gauss width must be positive", line);
    return ScalarFunction::gauss(args[0], args[1]);
  }
  throw ConfigError("unknown catalog function '" + name + "'", line);
}

/// One component of a vector field: a sum of products of numbers and fn@j.
inline Functional field_component(const std::string& text, int e, int line = 0) {
  std::vector<Functional> terms;
  for (const auto& term : detail::split_top(text, '+')) {
    if (term.empty()) throw ConfigError("empty term in vector field '" + text + "'", line);
    Functional prod = constant(1.0);
    for (const auto& factor : detail::split_top(term, '*')) {
      if (detail::is_number(factor)) {
        prod = detail::number(factor, line) * prod;
        continue;
      }
      const auto at = factor.rfind('@');
      if (at == std::string::npos)
        throw ConfigError("factor '" + factor + "' is neither a number nor fn@coordinate", line);
      const int j = detail::index(Config::trim(factor.substr(at + 1)), 1, e, line, "state coordinate");
      prod = prod * compose(scalar_function(factor.substr(0, at), line), coordinate(j));
    }
    terms.push_back(prod);
  }
  return sum(std::move(terms));
}

inline VectorField vector_field(const std::string& text, int e, int line = 0) {
  const auto parts = detail::split_top(text, ';');
  VectorField v;
  if (parts.size() == 1 && parts[0] == "0") return VectorField::zero(e);
  if (parts.size() != static_cast<std::size_t>(e))
    throw ConfigError("vector field needs " + std::to_string(e) + " components separated by ';'",
                      line);
  for (const auto& p : parts) v.components.push_back(field_component(p, e, line));
  return v;
}

/// [fields] V0 = ..., V1 = ..., ..., Vd = ... ; a missing V0 means zero drift.
inline VectorFieldSet vector_fields(const Config& cfg, int d, int e) {
  std::set<std::string> allowed;
  for (int i = 0; i <= d; ++i) allowed.insert("V" + std::to_string(i));
  cfg.require_keys("fields", allowed);
  std::vector<VectorField> fields;
  for (int i = 0; i <= d; ++i) {
    const std::string key = "V" + std::to_string(i);
    if (i == 0 && !cfg.has("fields", key)) {
      fields.push_back(VectorField::zero(e));
      continue;
    }
    fields.push_back(vector_field(cfg.get("fields", key), e, cfg.line_of("fields", key)));
  }
  return VectorFieldSet(e, std::move(fields));
}

namespace detail {

inline Functional functional_section(const Config& cfg, const std::string& section, int dim,
                                     std::vector<std::string>& stack) {
  for (const auto& s : stack)
    if (s == section) throw ConfigError("functional [" + section + "] refers to itself",
                                        cfg.line_of(section, "type"));
  if (!cfg.has_section(section)) {
    const int line = stack.empty() ? 0 : cfg.line_of(stack.back(), "type");
    throw ConfigError("missing functional section [" + section + "]", line);
  }
  stack.push_back(section);
  const std::string type = cfg.get(section, "type");
  const int tl = cfg.line_of(section, "type");
  auto coord = [&] {
    return cfg.has(section, "coord")
               ? index(cfg.get(section, "coord"), 1, dim, cfg.line_of(section, "coord"), "coord")
               : 1;
  };
  auto fn = [&](const std::string& key) {
    return scalar_function(cfg.get(section, key), cfg.line_of(section, key));
  };
  auto ref = [&](const std::string& name) {
    return functional_section(cfg, "functional." + Config::trim(name), dim, stack);
  };
  Functional out;
  if (type == "cylinder") {
    cfg.require_keys(section, {"type", "f", "coord"});
    out = make_cylinder(fn("f"), coord());
  } else if (type == "running_integral") {
    cfg.require_keys(section, {"type", "f", "g", "coord"});
    out = make_running_integral(fn("f"), fn("g"), coord());
  } else if (type == "coordinate") {
    cfg.require_keys(section, {"type", "coord"});
    out = coordinate(coord());
  } else if (type == "time") {
    cfg.require_keys(section, {"type"});
    out = time_functional();
  } else if (type == "constant") {
    cfg.require_keys(section, {"type", "value"});
    out = constant(cfg.get_double(section, "value"));
  } else if (type == "linear") {
    // sum_j c_j x^j_t with weights = c_1, ..., c_dim
    cfg.require_keys(section, {"type", "weights"});
    const auto w = cfg.get_doubles(section, "weights");
    if (w.size() != static_cast<std::size_t>(dim))
      throw ConfigError("weights needs " + std::to_string(dim) + " entries",
                        cfg.line_of(section, "weights"));
    std::vector<Functional> terms;
    for (std::size_t j = 0; j < w.size(); ++j)
      terms.push_back(w[j] * coordinate(static_cast<int>(j) + 1));
    out = sum(std::move(terms));
  } else if (type == "product") {
    cfg.require_keys(section, {"type", "left", "right"});
    out = product(ref(cfg.get(section, "left")), ref(cfg.get(section, "right")));
  } else if (type == "sum") {
    cfg.require_keys(section, {"type", "terms"});
    std::vector<Functional> terms;
    for (const auto& name : split_top(cfg.get(section, "terms"), ',')) terms.push_back(ref(name));
    out = sum(std::move(terms));
  } else {
    throw ConfigError("unknown functional type '" + type + "'", tl);
  }
  stack.pop_back();
  return out;
}

}  // namespace detail

/// The functional described by `section` over paths of dimension `dim`.
inline Functional functional(const Config& cfg, int dim, const std::string& section = "functional") {
  std::vector<std::string> stack;
  return detail::functional_section(cfg, section, dim, stack);
}

}  // namespace chenfliess::catalog
