#pragma once

// Sweep orchestration behind the command-line tool.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tasnoma/csv.hpp"
#include "tasnoma/errors.hpp"
#include "tasnoma/mc_sim.hpp"
#include "tasnoma/outage.hpp"
#include "tasnoma/run_config.hpp"
#include "tasnoma/series.hpp"

namespace tasnoma::cli {

enum exit_code : int {
  exit_ok = 0,
  exit_invalid_config = 1,
  exit_numerical_failure = 2,  // strict mode only
};

// Command-line values that replace the file's settings.
struct overrides {
  std::optional<std::string> output;
  std::optional<std::size_t> terms;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  bool no_mc = false;
  bool strict = false;
};

inline config::run_spec apply(config::run_spec spec, const overrides& o) {
  if (o.output) spec.output = *o.output;
  if (o.terms) spec.series_terms = *o.terms;
  if (o.trials) spec.mc.run.trials = *o.trials;
  if (o.seed) spec.mc.run.seed = *o.seed;
  if (o.workers) spec.mc.run.workers = *o.workers;
  if (o.no_mc) spec.mc.enabled = false;
  if (o.strict) spec.strict_numerics = true;
  spec.validate();
  return spec;
}

struct sweep_result {
  std::vector<csv::row> rows;
  std::size_t flagged_points = 0;
  std::vector<std::string> notes;  // diagnostics worth showing
};

// Analytical sweep (and Monte Carlo when enabled). Coefficients are built once.
inline sweep_result execute(const config::run_spec& spec) {
  spec.validate();
  const auto grid = spec.snr_db.points();
  const auto base = spec.scenario(grid.front());

  sweep_result out;
  for (auto& w : base.warnings()) out.notes.push_back("warning: " + w);

  const outage::analytic_model model(base, spec.series_terms);
  const auto& tas = model.u2().coefficients();
  if (tas.precision_truncated)
    out.notes.push_back("note: U2 series truncated to " + std::to_string(tas.size()) + " of " +
                        std::to_string(tas.requested_terms) + " terms where the recurrence lost precision");

  const auto reports = outage::sweep(base, model, grid);
  std::optional<std::vector<mc::outage_estimates>> sims;
  if (spec.mc.enabled) sims = mc::estimate_outage_sweep(base, grid, spec.mc.run);

  out.rows.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv::row r{reports[i], std::nullopt};
    if (sims) r.simulated = (*sims)[i];
    if (r.analytic.flag_overall()) ++out.flagged_points;
    out.rows.push_back(r);
  }
  if (out.flagged_points > 0)
    out.notes.push_back("warning: " + std::to_string(out.flagged_points) +
                        " SNR point(s) flagged for cancellation or slow convergence; compare against Monte Carlo");
  return out;
}

namespace detail {

inline std::string fixed(double v, const char* fmt = "%.4e") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace detail

// Human-readable table. Monte Carlo comparisons are only shown where the
// estimate has at least 10 events.
inline void print_summary(std::ostream& os, const std::vector<csv::row>& rows) {
  const bool with_mc = !rows.empty() && rows.front().simulated.has_value();
  os << "  snr_db      p_u1        p_u2        p_overall   asym_overall flags";
  if (with_mc) os << "  mc_overall  |z|";
  os << '\n';
  for (const auto& r : rows) {
    const auto& a = r.analytic;
    os << detail::fixed(a.snr_db, "%8.2f") << "  " << detail::fixed(a.p_u1) << "  " << detail::fixed(a.p_u2) << "  "
       << detail::fixed(a.p_overall) << "  " << detail::fixed(a.asym_overall) << "   " << (a.flag_u1 ? 'F' : '.')
       << (a.flag_u2 ? 'F' : '.');
    if (with_mc) {
      const auto& e = r.simulated->overall;
      os << "     " << detail::fixed(e.p_hat) << "  ";
      if (e.resolvable())
        os << detail::fixed(e.deviation(a.p_overall), "%.2f");
      else
        os << "n/a (<10 events)";
    }
    os << '\n';
  }
}

// Runs a parsed spec. The CSV goes to spec.output, or to `out` when unset;
// the summary goes to `out` unless the CSV already does, and all
// diagnostics go to `err`.
inline int run(const config::run_spec& spec, std::ostream& out, std::ostream& err) {
  sweep_result res;
  try {
    res = execute(spec);
  } catch (const invalid_parameter& e) {
    err << "error: " << e.what() << '\n';
    return exit_invalid_config;
  }
  for (const auto& n : res.notes) err << n << '\n';

  if (spec.strict_numerics && res.flagged_points > 0) {
    err << "error: strict numerics requested and " << res.flagged_points << " point(s) were flagged; no CSV written\n";
    return exit_numerical_failure;
  }

  try {
    if (spec.output) {
      csv::write_file(*spec.output, res.rows);
      print_summary(out, res.rows);
    } else {
      csv::write(out, res.rows);
      print_summary(err, res.rows);
    }
  } catch (const csv::io_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_invalid_config;
  }
  return exit_ok;
}

inline int run(const std::string& config_path, const overrides& o, std::ostream& out, std::ostream& err) {
  config::run_spec spec;
  try {
    spec = apply(config::load(config_path), o);
  } catch (const invalid_parameter& e) {
    err << "error: " << e.what() << '\n';
    return exit_invalid_config;
  }
  return run(spec, out, err);
}

}  // namespace tasnoma::cli
