#pragma once

// JSON run specification for the sweep harness.
//
//   {
//     "alpha": 0.7, "mu": 0.5, "h_hat": 2,
//     "num_tx_antennas": 2, "num_rx_antennas": 4, "combiner": "mrc",
//     "rho": 0.5, "xi": 1, "threshold_u1": 0.5, "threshold_u2": 0.5,
//     "snr_db": {"start": 0, "stop": 40, "step": 2},
//     "series_terms": 200,
//     "mc": {"enabled": true, "trials": 1000000, "seed": 1, "workers": 1},
//     "strict_numerics": false,
//     "output": "fig1.csv"
//   }
//
// Unknown keys are rejected.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "tasnoma/errors.hpp"
#include "tasnoma/fading.hpp"
#include "tasnoma/mc_sim.hpp"
#include "tasnoma/outage.hpp"
#include "tasnoma/series.hpp"

namespace tasnoma::config {

struct snr_grid {
  double start_db = 0;
  double stop_db = 0;
  double step_db = 1;

  // start, start + step, ... up to stop (inclusive, with a half-step tolerance
  // so 0:2:40 ends on 40 despite rounding).
  std::vector<double> points() const {
    std::vector<double> out;
    const auto count = static_cast<long>(std::floor((stop_db - start_db) / step_db + 0.5)) + 1;
    for (long i = 0; i < count; ++i) out.push_back(start_db + static_cast<double>(i) * step_db);
    return out;
  }

  friend bool operator==(const snr_grid&, const snr_grid&) = default;
};

struct mc_settings {
  bool enabled = false;
  mc::mc_config run{};

  friend bool operator==(const mc_settings& a, const mc_settings& b) {
    return a.enabled == b.enabled && a.run.trials == b.run.trials && a.run.seed == b.run.seed &&
           a.run.workers == b.run.workers;
  }
};

struct run_spec {
  double alpha = 0;
  double mu = 0;
  double h_hat = 0;
  int num_tx_antennas = 0;
  int num_rx_antennas = 0;
  series::combining combiner = series::combining::mrc;
  double rho = 0;
  double xi = 0;
  double threshold_u1 = 0;
  double threshold_u2 = 0;
  snr_grid snr_db;
  std::size_t series_terms = series::default_terms;
  mc_settings mc;
  bool strict_numerics = false;
  std::optional<std::string> output;  // CSV path; stdout when absent

  // Scenario at a given SNR (dB).
  outage::system_config scenario(double snr_db_value) const {
    return {num_tx_antennas,
            num_rx_antennas,
            rho,
            xi,
            threshold_u1,
            threshold_u2,
            outage::db_to_linear(snr_db_value),
            fading::alpha_mu_params(alpha, mu, h_hat),
            combiner};
  }

  // Throws invalid_parameter naming the offending field.
  void validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
      throw invalid_parameter("invalid '" + field + "': " + why);
    };
    auto positive = [&](const char* field, double v) {
      if (!std::isfinite(v) || v <= 0.0) fail(field, "must be finite and > 0");
    };
    positive("alpha", alpha);
    positive("mu", mu);
    positive("h_hat", h_hat);
    if (!std::isfinite(snr_db.start_db)) fail("snr_db.start", "must be finite");
    if (!std::isfinite(snr_db.stop_db)) fail("snr_db.stop", "must be finite");
    if (!(snr_db.start_db <= snr_db.stop_db)) fail("snr_db", "start must be <= stop");
    positive("snr_db.step", snr_db.step_db);
    if ((snr_db.stop_db - snr_db.start_db) / snr_db.step_db > 1e5) fail("snr_db", "more than 100000 grid points");
    if (series_terms < 1) fail("series_terms", "must be >= 1");
    scenario(snr_db.start_db).validate();
    mc.run.validate();
  }

  friend bool operator==(const run_spec&, const run_spec&) = default;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& prefix) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw invalid_parameter("unknown key '" + prefix + key + "'");
}

inline const json& require(const json& j, const std::string& key, const std::string& prefix) {
  if (!j.contains(key)) throw invalid_parameter("missing key '" + prefix + key + "'");
  return j.at(key);
}

inline double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw invalid_parameter("invalid '" + field + "': expected a number");
  return v.get<double>();
}

inline std::int64_t integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw invalid_parameter("invalid '" + field + "': expected an integer");
  return v.get<std::int64_t>();
}

inline std::int64_t positive_integer(const json& v, const std::string& field) {
  const auto x = integer(v, field);
  if (x < 1) throw invalid_parameter("invalid '" + field + "': must be >= 1");
  return x;
}

inline bool boolean(const json& v, const std::string& field) {
  if (!v.is_boolean()) throw invalid_parameter("invalid '" + field + "': expected true or false");
  return v.get<bool>();
}

inline int antenna_count(const json& v, const std::string& field) {
  const auto x = positive_integer(v, field);
  if (x > 64) throw invalid_parameter("invalid '" + field + "': at most 64 supported");
  return static_cast<int>(x);
}

}  // namespace detail

inline series::combining parse_combiner(const std::string& s) {
  if (s == "egc") return series::combining::egc;
  if (s == "mrc") return series::combining::mrc;
  throw invalid_parameter("invalid 'combiner': expected \"egc\" or \"mrc\", got \"" + s + "\"");
}

// Parses and validates a run spec. Missing optional keys take their defaults;
// unknown keys and type mismatches throw invalid_parameter.
inline run_spec from_json(const nlohmann::json& j) {
  using namespace detail;
  if (!j.is_object()) throw invalid_parameter("config must be a JSON object");
  reject_unknown(j,
                 {"alpha", "mu", "h_hat", "num_tx_antennas", "num_rx_antennas", "combiner", "rho", "xi",
                  "threshold_u1", "threshold_u2", "snr_db", "series_terms", "mc", "strict_numerics", "output"},
                 "");
  run_spec r;
  r.alpha = number(require(j, "alpha", ""), "alpha");
  r.mu = number(require(j, "mu", ""), "mu");
  r.h_hat = number(require(j, "h_hat", ""), "h_hat");
  r.num_tx_antennas = antenna_count(require(j, "num_tx_antennas", ""), "num_tx_antennas");
  r.num_rx_antennas = antenna_count(require(j, "num_rx_antennas", ""), "num_rx_antennas");
  const auto& comb = require(j, "combiner", "");
  if (!comb.is_string()) throw invalid_parameter("invalid 'combiner': expected \"egc\" or \"mrc\"");
  r.combiner = parse_combiner(comb.get<std::string>());
  r.rho = number(require(j, "rho", ""), "rho");
  r.xi = number(require(j, "xi", ""), "xi");
  r.threshold_u1 = number(require(j, "threshold_u1", ""), "threshold_u1");
  r.threshold_u2 = number(require(j, "threshold_u2", ""), "threshold_u2");

  const auto& grid = require(j, "snr_db", "");
  if (!grid.is_object()) throw invalid_parameter("invalid 'snr_db': expected an object {start, stop, step}");
  reject_unknown(grid, {"start", "stop", "step"}, "snr_db.");
  r.snr_db.start_db = number(require(grid, "start", "snr_db."), "snr_db.start");
  r.snr_db.stop_db = number(require(grid, "stop", "snr_db."), "snr_db.stop");
  r.snr_db.step_db = number(require(grid, "step", "snr_db."), "snr_db.step");

  if (j.contains("series_terms"))
    r.series_terms = static_cast<std::size_t>(positive_integer(j.at("series_terms"), "series_terms"));

  if (j.contains("mc")) {
    const auto& m = j.at("mc");
    if (!m.is_object()) throw invalid_parameter("invalid 'mc': expected an object");
    reject_unknown(m, {"enabled", "trials", "seed", "workers"}, "mc.");
    if (m.contains("enabled")) r.mc.enabled = boolean(m.at("enabled"), "mc.enabled");
    if (m.contains("trials")) r.mc.run.trials = static_cast<std::uint64_t>(positive_integer(m.at("trials"), "mc.trials"));
    if (m.contains("seed")) {
      const auto& s = m.at("seed");
      if (s.is_number_unsigned())
        r.mc.run.seed = s.get<std::uint64_t>();
      else if (s.is_number_integer())
        r.mc.run.seed = static_cast<std::uint64_t>(s.get<std::int64_t>());
      else
        throw invalid_parameter("invalid 'mc.seed': expected a 64-bit integer");
    }
    if (m.contains("workers")) r.mc.run.workers = static_cast<unsigned>(positive_integer(m.at("workers"), "mc.workers"));
  }
  if (j.contains("strict_numerics")) r.strict_numerics = boolean(j.at("strict_numerics"), "strict_numerics");
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw invalid_parameter("invalid 'output': expected a path string");
    r.output = j.at("output").get<std::string>();
  }
  r.validate();
  return r;
}

inline nlohmann::json to_json(const run_spec& r) {
  nlohmann::json j;
  j["alpha"] = r.alpha;
  j["mu"] = r.mu;
  j["h_hat"] = r.h_hat;
  j["num_tx_antennas"] = r.num_tx_antennas;
  j["num_rx_antennas"] = r.num_rx_antennas;
  j["combiner"] = std::string(series::to_string(r.combiner));
  j["rho"] = r.rho;
  j["xi"] = r.xi;
  j["threshold_u1"] = r.threshold_u1;
  j["threshold_u2"] = r.threshold_u2;
  j["snr_db"] = {{"start", r.snr_db.start_db}, {"stop", r.snr_db.stop_db}, {"step", r.snr_db.step_db}};
  j["series_terms"] = r.series_terms;
  j["mc"] = {{"enabled", r.mc.enabled}, {"trials", r.mc.run.trials}, {"seed", r.mc.run.seed},
             {"workers", r.mc.run.workers}};
  j["strict_numerics"] = r.strict_numerics;
  if (r.output) j["output"] = *r.output;
  return j;
}

inline run_spec parse(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw invalid_parameter(std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

inline run_spec load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_parameter("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const invalid_parameter& e) {
    throw invalid_parameter(path + ": " + e.what());
  }
}

}  // namespace tasnoma::config
