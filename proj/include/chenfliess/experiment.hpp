#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "chenfliess/bv_approx.hpp"
#include "chenfliess/catalog.hpp"
#include "chenfliess/chen_fliess.hpp"
#include "chenfliess/config.hpp"
#include "chenfliess/errors.hpp"
#include "chenfliess/parallel.hpp"
#include "chenfliess/path.hpp"
#include "chenfliess/sde.hpp"

namespace chenfliess {

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"ito-check", "expand", "l2-error",
                                              "scaling",   "fit-bv", "separate"};
  return kinds;
}

/// Command-line overrides. Everything except `workers` is written back into
/// the config, so the summary records what was actually run.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::size_t> steps;
  std::optional<std::string> out;
  std::size_t workers = 1;
};

struct RunResult {
  std::string kind;
  bool pass = true;
  std::string line;
  std::filesystem::path out_dir;
  nlohmann::ordered_json summary;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

template <class Writer>
void write_csv(const std::filesystem::path& p, Writer&& w) {
  std::ostringstream os;
  w(os);
  write_text(p, os.str());
}

struct SdeSetup {
  SimulationConfig sim;
  VectorFieldSet fields;
  Functional F;
  std::vector<double> y0;
};

inline SdeSetup sde_setup(const Config& cfg) {
  cfg.require_keys("simulation", {"d", "e", "T", "n_steps", "substep_ratio", "seed", "n_paths"});
  cfg.require_keys("state", {"y0"});
  SimulationConfig sim;
  sim.d = static_cast<int>(cfg.get_int("simulation", "d", 1));
  sim.e = static_cast<int>(cfg.get_int("simulation", "e", 1));
  sim.T = cfg.get_double("simulation", "T", 1.0);
  sim.n_steps = cfg.get_count("simulation", "n_steps", 512);
  sim.substep_ratio = cfg.get_count("simulation", "substep_ratio", 1);
  sim.seed = static_cast<std::uint64_t>(cfg.get_int("simulation", "seed", 1));
  sim.n_paths = cfg.get_count("simulation", "n_paths", 1000);
  try {
    sim.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), cfg.line_of("simulation", "d"));
  }
  std::vector<double> y0 = cfg.has("state", "y0") ? cfg.get_doubles("state", "y0")
                                                  : std::vector<double>(static_cast<std::size_t>(sim.e), 0.0);
  if (y0.size() != static_cast<std::size_t>(sim.e))
    throw ConfigError("y0 needs e entries", cfg.line_of("state", "y0"));
  auto fields = catalog::vector_fields(cfg, sim.d, sim.e);
  auto F = catalog::functional(cfg, sim.e);
  return {sim, std::move(fields), std::move(F), std::move(y0)};
}

/// Writes the solved state paths of the first `count` Monte Carlo paths.
inline void write_paths(const Config& cfg, const SdeSetup& su, const std::filesystem::path& dir) {
  const std::size_t count = static_cast<std::size_t>(cfg.get_int("output", "write_paths", 0));
  if (count == 0) return;
  std::filesystem::create_directories(dir / "paths");
  for (std::size_t p = 0; p < std::min(count, su.sim.n_paths); ++p) {
    const auto Y = solve_stratonovich(su.fields, su.y0, sample_driver(su.sim, p));
    write_csv(dir / "paths" / ("path_" + std::to_string(p) + ".csv"),
              [&](std::ostream& os) { write_path_csv(os, Y); });
  }
}

inline std::pair<double, double> interval(const Config& cfg, const SimulationConfig& sim) {
  const double s = cfg.get_double("experiment", "s", 0.0);
  const double t = cfg.get_double("experiment", "t", sim.T);
  if (!(0.0 <= s && s < t && t <= sim.T))
    throw ConfigError("need 0 <= s < t <= T", cfg.line_of("experiment", "t"));
  return {s, t};
}

inline int truncation(const Config& cfg) {
  const long long m = cfg.get_int("experiment", "m", 1);
  if (m < 1 || m > 6) throw ConfigError("m must lie in 1..6", cfg.line_of("experiment", "m"));
  return static_cast<int>(m);
}

inline void run_expand(const Config& cfg, const RunOptions& opt, RunResult& res) {
  cfg.require_keys("experiment", {"kind", "m", "s", "t", "max_remainder"});
  auto su = sde_setup(cfg);
  const int m = truncation(cfg);
  const auto [s, t] = interval(cfg, su.sim);
  const Expansion ex(su.F, su.fields, m);
  const auto reports = parallel_map(su.sim.n_paths, opt.workers, [&](std::size_t p) {
    return ex.expand(su.y0, sample_driver(su.sim, p), s, t);
  });
  double worst = 0.0;
  for (const auto& r : reports) worst = std::max(worst, std::abs(r.remainder));
  write_csv(res.out_dir / "expansion.csv", [&](std::ostream& os) { reports.front().write_csv(os); });
  write_csv(res.out_dir / "remainders.csv", [&](std::ostream& os) {
    os << "path,lhs,truncation,remainder\n" << std::setprecision(17);
    for (std::size_t p = 0; p < reports.size(); ++p)
      os << p << ',' << reports[p].lhs << ',' << reports[p].truncation_value << ','
         << reports[p].remainder << '\n';
  });
  write_paths(cfg, su, res.out_dir);
  if (cfg.has("experiment", "max_remainder"))
    res.pass = worst <= cfg.get_double("experiment", "max_remainder");
  res.summary["m"] = m;
  res.summary["s"] = s;
  res.summary["t"] = t;
  res.summary["n_paths"] = su.sim.n_paths;
  res.summary["n_terms"] = reports.front().words.size();
  res.summary["remainder_path0"] = reports.front().remainder;
  res.summary["max_abs_remainder"] = worst;
  res.line = "expand m=" + std::to_string(m) + " max|R|=" + fmt(worst);
}

inline void run_l2(const Config& cfg, const RunOptions& opt, RunResult& res) {
  cfg.require_keys("experiment", {"kind", "m", "s", "t", "max_rms"});
  auto su = sde_setup(cfg);
  const int m = truncation(cfg);
  const auto [s, t] = interval(cfg, su.sim);
  const auto est = l2_remainder(su.F, su.fields, su.y0, su.sim, s, t, m, opt.workers);
  write_paths(cfg, su, res.out_dir);
  if (cfg.has("experiment", "max_rms")) res.pass = est.rms <= cfg.get_double("experiment", "max_rms");
  res.summary["m"] = m;
  res.summary["s"] = s;
  res.summary["t"] = t;
  res.summary["n_paths"] = est.n_paths;
  res.summary["rms"] = est.rms;
  res.summary["ci"] = est.ci_halfwidth;
  res.line = "l2-error m=" + std::to_string(m) + " rms=" + fmt(est.rms) + " +- " + fmt(est.ci_halfwidth);
}

inline void run_scaling(const Config& cfg, const RunOptions& opt, RunResult& res) {
  cfg.require_keys("experiment", {"kind", "m", "t_values", "tolerance"});
  auto su = sde_setup(cfg);
  const int m = truncation(cfg);
  const auto ts = cfg.get_doubles("experiment", "t_values");
  const double tol = cfg.get_double("experiment", "tolerance", 0.25);
  ScalingReport rep;
  try {
    rep = scaling_regression(su.F, su.fields, su.y0, su.sim, m, ts, tol, opt.workers);
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), cfg.line_of("experiment", "t_values"));
  }
  write_csv(res.out_dir / "scaling.csv", [&](std::ostream& os) { rep.write_csv(os); });
  res.pass = rep.pass;
  res.summary["m"] = m;
  res.summary["s"] = 0.0;
  res.summary["t"] = ts;
  res.summary["n_paths"] = su.sim.n_paths;
  res.summary["rms"] = rep.rms;
  res.summary["ci"] = rep.ci_halfwidth;
  res.summary["slope"] = rep.slope;
  res.summary["slope_theory"] = rep.theory_slope;
  res.summary["tolerance"] = rep.tolerance;
  res.summary["exact_expansion"] = rep.exact_expansion;
  res.line = "scaling m=" + std::to_string(m) + " slope=" + fmt(rep.slope) +
             " theory=" + fmt(rep.theory_slope) + " tol=" + fmt(tol);
}

inline ItoForm ito_form(const Config& cfg) {
  const std::string f = cfg.get_or("ito", "form", "stratonovich");
  if (f == "stratonovich") return ItoForm::stratonovich;
  if (f == "ito") return ItoForm::ito;
  if (f == "driver") return ItoForm::driver;
  throw ConfigError("unknown Ito form '" + f + "'", cfg.line_of("ito", "form"));
}

/// Residuals on dyadic coarsenings of one fine driver per path; the order is
/// the slope of log RMS residual against log step size.
inline void run_ito(const Config& cfg, const RunOptions& opt, RunResult& res) {
  cfg.require_keys("experiment", {"kind", "s", "t"});
  cfg.require_keys("ito", {"form", "coarsest", "min_order"});
  auto su = sde_setup(cfg);
  const auto form = ito_form(cfg);
  const std::size_t fine = su.sim.grid_steps();
  const std::size_t coarsest = cfg.get_count("ito", "coarsest", std::max<std::size_t>(fine / 16, 1));
  const double min_order = cfg.get_double("ito", "min_order", 0.9);
  std::vector<std::size_t> levels;
  for (std::size_t n = coarsest; n <= fine; n *= 2) {
    if (fine % n != 0) break;
    levels.push_back(n);
  }
  if (levels.size() < 2 || levels.back() != fine)
    throw ConfigError("fine grid must be coarsest * 2^k with k >= 1", cfg.line_of("ito", "coarsest"));
  const auto [s, t] = interval(cfg, su.sim);

  const auto per_path = parallel_map(su.sim.n_paths, opt.workers, [&](std::size_t p) {
    const auto drv = sample_driver(su.sim, p);
    std::vector<double> r;
    for (std::size_t n : levels) {
      const auto c = coarsen(drv, fine / n);
      const auto Y = solve_stratonovich(su.fields, su.y0, c);
      r.push_back(verify_functional_ito_on(su.F, su.fields, Y, c, s, t, form));
    }
    return r;
  });
  std::vector<double> rms(levels.size(), 0.0), lx, ly;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    for (const auto& r : per_path) rms[l] += r[l] * r[l];
    rms[l] = std::sqrt(rms[l] / static_cast<double>(per_path.size()));
  }
  const bool exact = std::all_of(rms.begin(), rms.end(), [](double r) { return r <= 1e-13; });
  double order = 0.0;
  if (!exact) {
    for (std::size_t l = 0; l < levels.size(); ++l) {
      lx.push_back(std::log((t - s) / static_cast<double>(levels[l])));
      ly.push_back(std::log(std::max(rms[l], 1e-300)));
    }
    order = least_squares_line(lx, ly).slope;
  }
  res.pass = exact || order >= min_order;
  write_csv(res.out_dir / "ito.csv", [&](std::ostream& os) {
    os << "n_steps,rms_residual\n" << std::setprecision(17);
    for (std::size_t l = 0; l < levels.size(); ++l) os << levels[l] << ',' << rms[l] << '\n';
  });
  write_paths(cfg, su, res.out_dir);
  res.summary["form"] = cfg.get_or("ito", "form", "stratonovich");
  res.summary["s"] = s;
  res.summary["t"] = t;
  res.summary["n_paths"] = su.sim.n_paths;
  res.summary["n_steps"] = levels;
  res.summary["rms"] = rms;
  res.summary["order"] = order;
  res.summary["min_order"] = min_order;
  res.summary["exact"] = exact;
  res.line = "ito-check order=" + fmt(order) + " (min " + fmt(min_order) + ")";
}

inline SineFamily sine_family(const Config& cfg) {
  cfg.require_keys("family", {"d", "n_terms", "bound", "n_grid", "t_min"});
  SineFamily f;
  f.d = static_cast<int>(cfg.get_int("family", "d", 1));
  f.n_terms = static_cast<int>(cfg.get_int("family", "n_terms", 3));
  f.coefficient_bound = cfg.get_double("family", "bound", 1.0);
  f.n_grid = cfg.get_count("family", "n_grid", 256);
  f.t_min = cfg.get_double("family", "t_min", 0.25);
  try {
    f.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), cfg.line_of("family", "d"));
  }
  return f;
}

inline void run_fit(const Config& cfg, const RunOptions& opt, RunResult& res) {
  cfg.require_keys("experiment", {"kind"});
  cfg.require_keys("fit", {"max_level", "train", "holdout", "seed", "max_train_error"});
  const auto fam = sine_family(cfg);
  const auto F = catalog::functional(cfg, fam.d);
  const int max_level = static_cast<int>(cfg.get_int("fit", "max_level", 4));
  if (max_level < 1 || max_level > 8)
    throw ConfigError("max_level must lie in 1..8", cfg.line_of("fit", "max_level"));
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("fit", "seed", 1));
  const auto train = fam.sample(cfg.get_count("fit", "train", 200), rng::derive(seed, 0));
  const auto hold = fam.sample(cfg.get_count("fit", "holdout", 200), rng::derive(seed, 1));

  std::vector<FitReport> reps;
  for (int N = 1; N <= max_level; ++N) reps.push_back(fit(F, train, N, hold, opt.workers));
  bool monotone = true;
  for (std::size_t k = 1; k < reps.size(); ++k)
    monotone = monotone && reps[k].train_sup_error <= reps[k - 1].train_sup_error;
  res.pass = monotone;
  if (cfg.has("fit", "max_train_error"))
    res.pass = res.pass && reps.back().train_sup_error <= cfg.get_double("fit", "max_train_error");

  write_csv(res.out_dir / "fit.csv", [&](std::ostream& os) {
    os << "N,train_sup_error,holdout_sup_error\n" << std::setprecision(17);
    for (std::size_t k = 0; k < reps.size(); ++k)
      os << k + 1 << ',' << reps[k].train_sup_error << ',' << reps[k].holdout_sup_error << '\n';
  });
  write_csv(res.out_dir / "fit_coefficients.csv",
            [&](std::ostream& os) { reps.back().polynomial.write_csv(os); });
  std::vector<double> train_err, hold_err;
  std::vector<bool> deficient;
  for (const auto& r : reps) {
    train_err.push_back(r.train_sup_error);
    hold_err.push_back(r.holdout_sup_error);
    deficient.push_back(r.rank_deficient);
  }
  res.summary["n_train"] = train.size();
  res.summary["n_holdout"] = hold.size();
  res.summary["train_sup_error"] = train_err;
  res.summary["holdout_sup_error"] = hold_err;
  res.summary["rank_deficient"] = deficient;
  res.summary["train_non_increasing"] = monotone;
  res.line = "fit-bv N=1.." + std::to_string(max_level) + " train sup " + fmt(train_err.front()) +
             " -> " + fmt(train_err.back()) + (monotone ? " (non-increasing)" : " (increases)");
}

/// Path given per coordinate as catalog functions of r, separated by ';'.
inline SampledPath path_from_spec(const Config& cfg, const std::string& key, double horizon,
                                  std::size_t n_grid) {
  const int line = cfg.line_of("separate", key);
  std::vector<ScalarFunction> comps;
  for (const auto& c : catalog::detail::split_top(cfg.get("separate", key), ';'))
    comps.push_back(catalog::scalar_function(c, line));
  return SampledPath::sample(
      [&](double r) {
        std::vector<double> v;
        for (const auto& f : comps) v.push_back(f(r));
        return v;
      },
      horizon, n_grid);
}

inline void run_separate(const Config& cfg, const RunOptions&, RunResult& res) {
  cfg.require_keys("experiment", {"kind"});
  cfg.require_keys("separate", {"a", "b", "t_a", "t_b", "max_zeros", "n_grid", "tolerance", "expect"});
  const double ta = cfg.get_double("separate", "t_a", 1.0);
  const double tb = cfg.get_double("separate", "t_b", ta);
  if (!(ta > 0.0 && tb > 0.0)) throw ConfigError("t_a and t_b must be positive", cfg.line_of("separate", "t_a"));
  const std::size_t n = cfg.get_count("separate", "n_grid", 4096);
  const double horizon = std::max(ta, tb);
  const StoppedPoint a{ta, path_from_spec(cfg, "a", horizon, n)};
  const StoppedPoint b{tb, path_from_spec(cfg, "b", horizon, n)};
  if (a.path.dim() != b.path.dim())
    throw ConfigError("paths a and b differ in dimension", cfg.line_of("separate", "b"));
  const auto L = static_cast<int>(cfg.get_int("separate", "max_zeros", 4));
  std::optional<Separation> sep;
  try {
    sep = find_separating_word(a, b, L, cfg.get_double("separate", "tolerance", 1e-9));
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), cfg.line_of("separate", "a"));
  }
  res.pass = sep.has_value();
  if (cfg.has("separate", "expect"))
    res.pass = sep && sep->word.str() == cfg.get("separate", "expect");
  if (sep) {
    res.summary["word"] = sep->word.str();
    res.summary["difference"] = sep->difference;
  } else {
    res.summary["word"] = nullptr;
    res.summary["difference"] = nullptr;
  }
  res.line = sep ? "separate word=" + sep->word.str() + " difference=" + fmt(sep->difference)
                 : std::string("separate: no separating word up to L=") + std::to_string(L);
}

}  // namespace detail

/// Runs one experiment and writes summary.json plus its CSVs into the
/// output directory. `kind` overrides nothing: a subcommand must agree with
/// the config's [experiment] kind when that is set.
inline RunResult run_experiment(Config cfg, const RunOptions& opt,
                                const std::optional<std::string>& kind = std::nullopt) {
  std::string k;
  if (cfg.has("experiment", "kind")) {
    k = cfg.get("experiment", "kind");
    if (kind && *kind != k)
      throw ConfigError("config is a '" + k + "' experiment, not '" + *kind + "'",
                        cfg.line_of("experiment", "kind"));
  } else if (kind) {
    k = *kind;
    cfg.set("experiment", "kind", k);
  } else {
    throw ConfigError("missing key 'kind' in [experiment]");
  }
  if (std::find(experiment_kinds().begin(), experiment_kinds().end(), k) == experiment_kinds().end())
    throw ConfigError("unknown experiment kind '" + k + "'", cfg.line_of("experiment", "kind"));
  cfg.require_keys("output", {"dir", "write_paths"});

  const bool bv = k == "fit-bv" || k == "separate";
  if (opt.seed) cfg.set(k == "fit-bv" ? "fit" : "simulation", "seed", std::to_string(*opt.seed));
  if (opt.paths) cfg.set(k == "fit-bv" ? "fit" : "simulation", k == "fit-bv" ? "train" : "n_paths",
                         std::to_string(*opt.paths));
  if (opt.steps)
    cfg.set(bv ? (k == "fit-bv" ? "family" : "separate") : "simulation",
            bv ? "n_grid" : "n_steps", std::to_string(*opt.steps));
  if (opt.out) cfg.set("output", "dir", *opt.out);

  RunResult res;
  res.kind = k;
  res.out_dir = cfg.get_or("output", "dir", "out/" + k);
  std::filesystem::create_directories(res.out_dir);
  res.summary["kind"] = k;
  if (k == "expand") detail::run_expand(cfg, opt, res);
  if (k == "l2-error") detail::run_l2(cfg, opt, res);
  if (k == "scaling") detail::run_scaling(cfg, opt, res);
  if (k == "ito-check") detail::run_ito(cfg, opt, res);
  if (k == "fit-bv") detail::run_fit(cfg, opt, res);
  if (k == "separate") detail::run_separate(cfg, opt, res);
  res.summary["pass"] = res.pass;
  // the output location is not a parameter of the run
  auto config_json = cfg.to_json();
  if (config_json.contains("output")) config_json["output"].erase("dir");
  res.summary["config"] = config_json;
  detail::write_text(res.out_dir / "summary.json", res.summary.dump(2) + "\n");
  res.line += res.pass ? "  [pass]" : "  [FAIL]";
  return res;
}

}  // namespace chenfliess
