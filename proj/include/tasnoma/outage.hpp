#pragma once

// Exact and asymptotic outage probabilities of the two-user TAS-NOMA downlink.
//
// U1 (near user) decodes after imperfect SIC with residual level xi:
//   gamma_1 = rho / (xi^2 (1 - rho) + 1/Phi_1)
// U2 (far user) treats U1's signal as noise:
//   gamma_2 = (1 - rho) / (rho + 1/Phi_2)
// so gamma_k <= R_k is equivalent to Phi_k <= 1 / D_k with
//   D_1 = rho / R_1 - xi^2 (1 - rho),   D_2 = (1 - rho) / R_2 - rho,
// and outage is certain when D_k <= 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "tasnoma/errors.hpp"
#include "tasnoma/fading.hpp"
#include "tasnoma/series.hpp"

namespace tasnoma::outage {

using series::combining;

struct system_config {
  int num_tx_antennas;  // A
  int num_rx_antennas;  // N
  double rho;           // power fraction of U1
  double xi;            // SIC imperfection, 0 = perfect
  double threshold_u1;  // linear SINR threshold
  double threshold_u2;
  double snr;  // Es/N0, linear
  fading::alpha_mu_params fading;
  combining scheme;

  series::combiner_spec combiner() const { return {scheme, num_rx_antennas}; }

  // D_1 and D_2; outage is certain when <= 0.
  double margin_u1() const noexcept { return rho / threshold_u1 - xi * xi * (1.0 - rho); }
  double margin_u2() const noexcept { return (1.0 - rho) / threshold_u2 - rho; }

  void validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
      throw invalid_parameter("invalid '" + field + "': " + why);
    };
    if (num_tx_antennas < 1) fail("num_tx_antennas", "must be >= 1");
    if (num_rx_antennas < 1) fail("num_rx_antennas", "must be >= 1");
    if (!(rho > 0.0 && rho < 1.0)) fail("rho", "must lie in (0, 1), got " + std::to_string(rho));
    if (!(xi >= 0.0 && xi <= 1.0)) fail("xi", "must lie in [0, 1], got " + std::to_string(xi));
    if (!(threshold_u1 > 0.0) || !std::isfinite(threshold_u1)) fail("threshold_u1", "must be finite and > 0");
    if (!(threshold_u2 > 0.0) || !std::isfinite(threshold_u2)) fail("threshold_u2", "must be finite and > 0");
    if (!(snr > 0.0) || !std::isfinite(snr)) fail("snr", "must be finite and > 0");
  }

  std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    if (rho >= 0.5) w.emplace_back("rho >= 0.5 allocates at least as much power to the near user as to the far user");
    return w;
  }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// SINR threshold for a spectral-efficiency target in bit/s/Hz: 2^R - 1.
// Never applied implicitly.
inline double threshold_from_rate(double bits_per_hz) { return std::exp2(bits_per_hz) - 1.0; }

// Analytical model of one scenario. Coefficients do not depend on the SNR,
// thresholds, rho or xi, so one model serves a whole sweep.
class analytic_model {
 public:
  explicit analytic_model(const system_config& cfg, std::size_t terms = series::default_terms,
                          const series::recurrence_options& rec = {})
      : u1_(series::build_series(cfg.fading, cfg.combiner(), terms)),
        u2_(series::tas_power_coeffs(u1_.coefficients(), cfg.num_tx_antennas, terms, rec)) {}

  const series::phi_distribution& u1() const noexcept { return u1_; }
  const series::tas_distribution& u2() const noexcept { return u2_; }

 private:
  series::phi_distribution u1_;
  series::tas_distribution u2_;
};

struct outage_value {
  double p = 1.0;
  bool flagged = false;
  series::series_value detail{};
};

namespace detail {

inline void check_match(const system_config& cfg, const series::series_coefficients& c) {
  if (!(c.source_params == cfg.fading) || !(c.combiner == cfg.combiner()))
    throw invalid_parameter("series coefficients were built for a different fading/combiner setup");
}

inline outage_value certain_outage() { return {1.0, false, {1.0, 0.0, 1.0, 0, true, false, false}}; }

// O_c = g D (leading coefficient)^(-1/O_d), with the leading coefficient in log form.
inline double coding_gain(double gain, double margin, log_real log_leading, double diversity) {
  return static_cast<double>(gain * margin * std::exp(-log_leading / diversity));
}

// log(beta eta_0) = log(c_0 beta / Gamma(N alpha mu / vartheta + 1))
inline log_real log_leading_u1(const series::phi_distribution& u1) {
  const auto& c = u1.coefficients();
  return c.beta_log + c.eta(0).log_magnitude;
}

// log(beta^A rho_0) = A log(c_0 beta / Gamma(N alpha mu / vartheta + 1))
inline log_real log_leading_u2(const series::tas_distribution& u2) {
  const auto& t = u2.coefficients();
  return t.num_antennas * t.base.beta_log + t.terms[0].log_magnitude;
}

}  // namespace detail

// Non-throwing forms; precision problems surface through outage_value::flagged.
inline outage_value evaluate_u1(const system_config& cfg, const series::phi_distribution& d,
                                const series::eval_options& opt = {}) {
  cfg.validate();
  detail::check_match(cfg, d.coefficients());
  const double margin = cfg.margin_u1();
  if (margin <= 0.0) return detail::certain_outage();
  const auto v = d.cdf(cfg.snr * cfg.combiner().gain(), 1.0 / margin, opt);
  return {v.value, v.flagged, v};
}

inline outage_value evaluate_u2(const system_config& cfg, const series::tas_distribution& d,
                                const series::eval_options& opt = {}) {
  cfg.validate();
  detail::check_match(cfg, d.coefficients().base);
  if (d.coefficients().num_antennas != cfg.num_tx_antennas)
    throw invalid_parameter("TAS coefficients were built for a different number of transmit antennas");
  const double margin = cfg.margin_u2();
  if (margin <= 0.0) return detail::certain_outage();
  const auto v = d.cdf(cfg.snr * cfg.combiner().gain(), 1.0 / margin, opt);
  return {v.value, v.flagged, v};
}

// Outage probability of U1. Independent of the number of transmit antennas.
inline double op_u1(const system_config& cfg, const series::phi_distribution& d, const series::eval_options& opt = {}) {
  const auto v = evaluate_u1(cfg, d, opt);
  series::detail::raise_on_guard(v.detail, "op_u1");
  return v.p;
}

inline double op_u2(const system_config& cfg, const series::tas_distribution& d, const series::eval_options& opt = {}) {
  const auto v = evaluate_u2(cfg, d, opt);
  series::detail::raise_on_guard(v.detail, "op_u2");
  return v.p;
}

// Outage at either user; the users' SINRs are independent.
inline double op_overall(double p1, double p2) {
  if (!(p1 >= 0.0 && p1 <= 1.0) || !(p2 >= 0.0 && p2 <= 1.0))
    throw domain_error("outage probabilities must lie in [0, 1]");
  // 1 - (1 - p1)(1 - p2), written so rounding never drops it below max(p1, p2)
  const double hi = std::max(p1, p2), lo = std::min(p1, p2);
  return std::min(1.0, hi + lo * (1.0 - hi));
}

struct asymptotic_gains_t {
  double diversity_u1;
  double coding_u1;
  double diversity_u2;
  double coding_u2;
};

// Diversity (O_d) and coding (O_c) gains of the high-SNR power laws
// P_k ~ (O_c,k Es/N0)^(-O_d,k).
inline asymptotic_gains_t asymptotic_gains(const system_config& cfg, const series::phi_distribution& u1,
                                           const series::tas_distribution& u2) {
  cfg.validate();
  detail::check_match(cfg, u1.coefficients());
  detail::check_match(cfg, u2.coefficients().base);
  const double d1 = cfg.margin_u1(), d2 = cfg.margin_u2();
  if (!(d1 > 0.0)) throw invalid_parameter("U1 threshold is infeasible; no high-SNR asymptote exists");
  if (!(d2 > 0.0)) throw invalid_parameter("U2 threshold is infeasible; no high-SNR asymptote exists");

  const double a = cfg.fading.alpha(), m = cfg.fading.mu();
  const int N = cfg.num_rx_antennas, A = cfg.num_tx_antennas;
  const double g = cfg.combiner().gain();

  asymptotic_gains_t out{};
  out.diversity_u1 = a * m * N / 2.0;
  out.diversity_u2 = a * m * A * N / 2.0;
  out.coding_u1 = detail::coding_gain(g, d1, detail::log_leading_u1(u1), out.diversity_u1);
  out.coding_u2 = detail::coding_gain(g, d2, detail::log_leading_u2(u2), out.diversity_u2);
  return out;
}

struct asymptotic_op_t {
  double p_u1;
  double p_u2;
  double p_overall;
};

inline double power_law(double coding, double diversity, double snr) {
  return std::min(1.0, std::exp(-diversity * std::log(coding * snr)));
}

inline asymptotic_op_t asymptotic_op(const system_config& cfg, const asymptotic_gains_t& g) {
  const double p1 = power_law(g.coding_u1, g.diversity_u1, cfg.snr);
  const double p2 = power_law(g.coding_u2, g.diversity_u2, cfg.snr);
  return {p1, p2, op_overall(p1, p2)};
}

struct outage_report {
  double snr_db = 0;
  double p_u1 = 1, p_u2 = 1, p_overall = 1;
  double asym_u1 = 1, asym_u2 = 1, asym_overall = 1;
  double diversity_u1 = std::numeric_limits<double>::quiet_NaN();
  double diversity_u2 = std::numeric_limits<double>::quiet_NaN();
  double coding_u1 = std::numeric_limits<double>::quiet_NaN();
  double coding_u2 = std::numeric_limits<double>::quiet_NaN();
  bool flag_u1 = false;
  bool flag_u2 = false;

  bool flag_overall() const noexcept { return flag_u1 || flag_u2; }
};

// Full report at cfg.snr. Precision problems set the flags instead of throwing.
inline outage_report evaluate(const system_config& cfg, const analytic_model& model,
                              const series::eval_options& opt = {}) {
  outage_report r;
  r.snr_db = linear_to_db(cfg.snr);
  const auto v1 = evaluate_u1(cfg, model.u1(), opt);
  const auto v2 = evaluate_u2(cfg, model.u2(), opt);
  r.p_u1 = v1.p;
  r.p_u2 = v2.p;
  r.p_overall = op_overall(v1.p, v2.p);
  r.flag_u1 = v1.flagged;
  r.flag_u2 = v2.flagged;

  const double a = cfg.fading.alpha(), m = cfg.fading.mu();
  r.diversity_u1 = a * m * cfg.num_rx_antennas / 2.0;
  r.diversity_u2 = a * m * cfg.num_tx_antennas * cfg.num_rx_antennas / 2.0;
  // A user with an infeasible threshold has no asymptote; its outage is 1 at every SNR.
  const double g = cfg.combiner().gain();
  if (cfg.margin_u1() > 0.0) {
    r.coding_u1 = detail::coding_gain(g, cfg.margin_u1(), detail::log_leading_u1(model.u1()), r.diversity_u1);
    r.asym_u1 = power_law(r.coding_u1, r.diversity_u1, cfg.snr);
  }
  if (cfg.margin_u2() > 0.0) {
    r.coding_u2 = detail::coding_gain(g, cfg.margin_u2(), detail::log_leading_u2(model.u2()), r.diversity_u2);
    r.asym_u2 = power_law(r.coding_u2, r.diversity_u2, cfg.snr);
  }
  r.asym_overall = op_overall(r.asym_u1, r.asym_u2);
  return r;
}

inline void check_grid(std::span<const double> grid_db) {
  if (grid_db.empty()) throw invalid_parameter("SNR grid is empty");
  for (std::size_t i = 0; i < grid_db.size(); ++i) {
    if (!std::isfinite(grid_db[i])) throw invalid_parameter("SNR grid contains a non-finite value");
    if (i > 0 && !(grid_db[i] > grid_db[i - 1])) throw invalid_parameter("SNR grid must be strictly increasing");
  }
}

// One report per grid point (dB); cfg.snr is ignored.
inline std::vector<outage_report> sweep(const system_config& cfg, const analytic_model& model,
                                        std::span<const double> grid_db, const series::eval_options& opt = {}) {
  check_grid(grid_db);
  std::vector<outage_report> out;
  out.reserve(grid_db.size());
  system_config point = cfg;
  for (double db : grid_db) {
    point.snr = db_to_linear(db);
    auto r = evaluate(point, model, opt);
    r.snr_db = db;
    out.push_back(r);
  }
  return out;
}

inline std::vector<outage_report> sweep(const system_config& cfg, std::span<const double> grid_db,
                                        std::size_t terms = series::default_terms) {
  check_grid(grid_db);
  system_config first = cfg;
  first.snr = db_to_linear(grid_db.front());
  first.validate();
  const analytic_model model(cfg, terms);
  return sweep(cfg, model, grid_db);
}

}  // namespace tasnoma::outage
