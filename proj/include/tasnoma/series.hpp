#pragma once

// Power-series representations of the post-combining SNR distributions.
//
// Single branch. With Y = |h|^vartheta, expanding exp(-mu y^(alpha/vartheta) / h_hat^alpha)
// in the alpha-mu density gives
//
//   f_Y(y) = B0 * sum_j u_j * y^(P_j - 1) / Gamma(P_j),
//   P_j = alpha (j + mu) / vartheta,
//   u_j = (-mu h_hat^-alpha)^j / j! * Gamma(P_j),
//   B0  = alpha mu^mu / (Gamma(mu) vartheta h_hat^(alpha mu)).
//
// N branches. Convolving y^(p-1)/Gamma(p) with y^(q-1)/Gamma(q) gives
// y^(p+q-1)/Gamma(p+q), so in this Gamma-normalized basis the density of
// S = sum_n |h_n|^vartheta is beta * sum_i c_i s^(Q_i - 1) / Gamma(Q_i) with
// beta = B0^N, Q_i = alpha (i + N mu) / vartheta and c = u^{*N}, the plain
// N-th Cauchy power of the coefficient sequence u.
//
// Phi = K S^(2/vartheta) then gives, with x = phi / K,
//
//   F(phi) = beta * sum_i eta_i x^(alpha (i + N mu) / 2),  eta_i = c_i / Gamma(Q_i + 1).
//
// Antenna selection. The best of A independent antennas has CDF F^A. Raising
// the eta-series to the A-th power gives coefficients rho_i through
//
//   rho_0 = eta_0^A,
//   rho_i = 1 / (i eta_0) * sum_{k=1..i} (k A - i + k) eta_k rho_{i-k},
//
// so that F_A(phi) = beta^A * sum_i rho_i x^(alpha (i + A N mu) / 2).
//
// The recurrence mixes terms of both signs and its rounding error grows
// geometrically with i. It runs in 100-digit arithmetic, a 50-digit rerun
// measures the error, and the series stops at the first coefficient whose
// error exceeds the configured relative tolerance.
//
// Coefficient tables are built in 50-digit arithmetic. Evaluation normally
// runs in long double on sign/log copies of the coefficients; when the sum
// cancels so much that the long double error estimate is too large, the
// 50-digit tables are summed instead.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "tasnoma/errors.hpp"
#include "tasnoma/fading.hpp"
#include "tasnoma/signed_log.hpp"

namespace tasnoma::series {

inline constexpr std::size_t default_terms = 200;

enum class combining { egc, mrc };

inline std::string_view to_string(combining c) noexcept { return c == combining::egc ? "egc" : "mrc"; }

// Combining scheme on N receive branches: EGC has vartheta = 1, g = 1/N;
// MRC has vartheta = 2, g = 1.
class combiner_spec {
 public:
  combiner_spec(combining scheme, int num_branches) : scheme_(scheme), num_branches_(num_branches) {
    if (num_branches < 1)
      throw invalid_parameter("number of receive branches must be >= 1, got " + std::to_string(num_branches));
  }

  combining scheme() const noexcept { return scheme_; }
  int num_branches() const noexcept { return num_branches_; }
  int vartheta() const noexcept { return scheme_ == combining::egc ? 1 : 2; }
  double gain() const noexcept { return scheme_ == combining::egc ? 1.0 / num_branches_ : 1.0; }

  friend bool operator==(const combiner_spec&, const combiner_spec&) = default;

 private:
  combining scheme_;
  int num_branches_;
};

struct build_options {
  // Any |log magnitude| above this is treated as overflow.
  log_real log_magnitude_bound = 10000;
};

using precise_real = boost::multiprecision::cpp_bin_float_50;

inline signed_log to_signed_log(const precise_real& v) {
  if (v == 0) return signed_log::zero();
  return {v < 0 ? -1 : 1, static_cast<log_real>(log(abs(v)))};
}

struct normalized_series {
  std::vector<signed_log> terms;     // u_0 .. u_{J-1}
  std::vector<precise_real> values;  // the same, in 50 digits
  fading::alpha_mu_params params;
  combiner_spec combiner;
};

struct series_coefficients {
  std::vector<signed_log> terms;         // c_0 .. c_{I-1}
  std::vector<precise_real> values;      // c_i in 50 digits
  std::vector<precise_real> eta_values;  // eta_i in 50 digits
  int num_branches;
  combiner_spec combiner;
  fading::alpha_mu_params source_params;
  log_real beta_log;
  std::size_t truncation_count;

  // Q_i = alpha (i + N mu) / vartheta
  log_real shape(std::size_t i) const noexcept {
    return static_cast<log_real>(source_params.alpha()) *
           (static_cast<log_real>(i) + num_branches * static_cast<log_real>(source_params.mu())) /
           combiner.vartheta();
  }

  // eta_i = c_i / Gamma(Q_i + 1), the CDF coefficients.
  signed_log eta(std::size_t i) const { return to_signed_log(eta_values.at(i)); }

  // (vartheta / 2) c_i / Gamma(Q_i) = (vartheta / 2) Q_i eta_i, the PDF coefficients of phi/K.
  precise_real pdf_value(std::size_t i) const {
    const precise_real q = precise_real(source_params.alpha()) * (precise_real(static_cast<unsigned>(i)) +
                           num_branches * precise_real(source_params.mu())) / combiner.vartheta();
    return eta_values.at(i) * q * combiner.vartheta() / 2;
  }
  signed_log pdf_coefficient(std::size_t i) const { return to_signed_log(pdf_value(i)); }
};

struct tas_coefficients {
  std::vector<signed_log> terms;     // rho_0 .. rho_{M-1}
  std::vector<precise_real> values;  // the same, in 50 digits
  std::vector<log_real> log_error;   // log of the measured |error(rho_i)|
  int num_antennas;
  series_coefficients base;
  std::size_t requested_terms;
  // True when the recurrence stopped before requested_terms because the
  // error of the next coefficient exceeded the tolerance.
  bool precision_truncated = false;

  std::size_t size() const noexcept { return terms.size(); }
};

namespace detail {

inline void check_bound(const signed_log& t, const build_options& opt, const char* what) {
  if (t.sign != 0 && !(std::fabs(t.log_magnitude) <= opt.log_magnitude_bound))
    throw precision_loss(std::string(what) + ": coefficient magnitude exceeds the representable range");
}

inline log_real log_b0(const fading::alpha_mu_params& p, int vartheta) {
  const precise_real a = p.alpha(), m = p.mu();
  const precise_real v = log(a) + m * log(m) - boost::math::lgamma(m) - log(precise_real(vartheta)) -
                         a * m * log(precise_real(p.h_hat()));
  return static_cast<log_real>(v);
}

}  // namespace detail

// u_j = a_j Gamma(P_j) for j < max_terms.
inline normalized_series build_normalized_series(const fading::alpha_mu_params& params, const combiner_spec& combiner,
                                                 std::size_t max_terms, const build_options& opt = {}) {
  if (max_terms < 1) throw invalid_parameter("series needs at least one term");
  const precise_real a = params.alpha(), m = params.mu();
  const int th = combiner.vartheta();
  // log(mu h_hat^-alpha)
  const precise_real log_rate = log(m) - a * log(precise_real(params.h_hat()));

  normalized_series out{{}, {}, params, combiner};
  out.terms.reserve(max_terms);
  out.values.reserve(max_terms);
  for (std::size_t j = 0; j < max_terms; ++j) {
    const precise_real jj = static_cast<unsigned>(j);
    const precise_real p_j = a * (jj + m) / th;
    const precise_real log_u = jj * log_rate - boost::math::lgamma(jj + 1) + boost::math::lgamma(p_j);
    const signed_log u{(j % 2 == 0) ? 1 : -1, static_cast<log_real>(log_u)};
    detail::check_bound(u, opt, "build_normalized_series");
    out.terms.push_back(u);
    out.values.push_back(j % 2 == 0 ? exp(log_u) : -exp(log_u));
  }
  return out;
}

// Truncated Cauchy product of two coefficient sequences.
template <class T>
std::vector<T> cauchy_product(std::span<const T> a, std::span<const T> b, std::size_t max_terms) {
  if (a.empty() || b.empty()) return {};
  const std::size_t n = std::min(max_terms, a.size() + b.size() - 1);
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    T sum = 0;
    const std::size_t lo = i >= b.size() ? i - b.size() + 1 : 0;
    for (std::size_t k = lo; k <= i && k < a.size(); ++k) sum += a[k] * b[i - k];
    out[i] = sum;
  }
  return out;
}

// c = u^{*N}, truncated to max_terms. Every product in c_i carries the sign
// (-1)^i, so the sums do not cancel.
inline series_coefficients sum_power_coeffs(const normalized_series& single, int num_branches, std::size_t max_terms,
                                            const build_options& opt = {}) {
  if (num_branches < 1) throw invalid_parameter("N must be >= 1");
  if (num_branches != single.combiner.num_branches())
    throw invalid_parameter("combiner was built for " + std::to_string(single.combiner.num_branches()) +
                            " branches, not " + std::to_string(num_branches));
  if (max_terms < 1 || single.values.empty()) throw invalid_parameter("series needs at least one term");

  const std::size_t n = std::min(max_terms, single.values.size());
  std::span<const precise_real> u(single.values.data(), n);
  std::vector<precise_real> c(u.begin(), u.end());
  for (int k = 1; k < num_branches; ++k) c = cauchy_product<precise_real>(c, u, n);

  series_coefficients out{{}, {}, {}, num_branches, single.combiner, single.params,
                          num_branches * detail::log_b0(single.params, single.combiner.vartheta()), n};
  out.terms.reserve(n);
  out.eta_values.reserve(n);
  const precise_real a = single.params.alpha(), m = single.params.mu();
  for (std::size_t i = 0; i < n; ++i) {
    out.terms.push_back(to_signed_log(c[i]));
    detail::check_bound(out.terms.back(), opt, "sum_power_coeffs");
    const precise_real q = a * (precise_real(static_cast<unsigned>(i)) + num_branches * m) / single.combiner.vartheta();
    out.eta_values.push_back(c[i] / boost::math::tgamma(q + 1));
  }
  out.values = std::move(c);
  return out;
}

// Convenience: builds u and c in one go.
inline series_coefficients build_series(const fading::alpha_mu_params& params, const combiner_spec& combiner,
                                        std::size_t max_terms = default_terms, const build_options& opt = {}) {
  return sum_power_coeffs(build_normalized_series(params, combiner, max_terms, opt), combiner.num_branches(),
                          max_terms, opt);
}

struct recurrence_options {
  // Stop once the estimated error of rho_i exceeds this fraction of |rho_i|.
  double max_relative_error = 1e-8;
  // Throw precision_loss instead of truncating.
  bool throw_on_truncation = false;
};

using recurrence_real = boost::multiprecision::cpp_bin_float_100;
using recurrence_check_real = boost::multiprecision::cpp_bin_float_50;

namespace detail {

// rho_0 .. rho_{m-1} for the A-th power of eta, in arithmetic of type Real.
template <class Real>
std::vector<Real> power_recurrence(std::span<const precise_real> eta_in, int A) {
  const std::size_t m = eta_in.size();
  std::vector<Real> eta(m), rho(m);
  for (std::size_t i = 0; i < m; ++i) eta[i] = Real(eta_in[i]);
  rho[0] = pow(eta[0], A);
  for (std::size_t i = 1; i < m; ++i) {
    Real sum = 0;
    for (std::size_t k = 1; k <= i; ++k) {
      const long weight = static_cast<long>(k) * (A + 1) - static_cast<long>(i);
      if (weight == 0 || eta[k] == 0) continue;
      sum += eta[k] * rho[i - k] * weight;
    }
    rho[i] = sum / (eta[0] * static_cast<long>(i));
  }
  return rho;
}

}  // namespace detail

// rho-coefficients of the A-th power of the eta-series.
//
// The recurrence runs in Real; a second pass in the lower precision Check
// measures the rounding error, which is reported per coefficient. Since the
// error grows geometrically with the index, the series is cut at the first
// coefficient whose measured error exceeds the tolerance.
template <class Real = recurrence_real, class Check = recurrence_check_real>
tas_coefficients tas_power_coeffs(const series_coefficients& s, int num_antennas, std::size_t max_terms,
                                  const recurrence_options& opt = {}) {
  if (num_antennas < 1) throw invalid_parameter("A must be >= 1, got " + std::to_string(num_antennas));
  if (s.eta_values.empty() || !(s.eta_values[0] > 0)) throw invalid_parameter("c_0 must be positive");
  if (max_terms < 1) throw invalid_parameter("series needs at least one term");

  const std::size_t m = std::min(max_terms, s.eta_values.size());
  const int A = num_antennas;
  const std::span<const precise_real> eta(s.eta_values.data(), m);

  const auto rho = detail::power_recurrence<Real>(eta, A);
  const auto check = detail::power_recurrence<Check>(eta, A);

  tas_coefficients out{{}, {}, {}, A, s, m, false};
  out.terms.reserve(m);
  out.values.reserve(m);
  out.log_error.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    using std::abs;
    const Real diff = abs(rho[i] - Real(check[i]));
    const Real mag = abs(rho[i]);
    if (mag == 0 || !(diff <= opt.max_relative_error * mag)) {
      if (opt.throw_on_truncation)
        throw precision_loss("power-series recurrence lost precision at index " + std::to_string(i));
      out.precision_truncated = true;
      break;
    }
    out.values.push_back(precise_real(rho[i]));
    out.terms.push_back(to_signed_log(out.values.back()));
    // Floor at the check precision so an exact agreement still reports an error.
    const Real floor = mag * std::numeric_limits<Check>::epsilon() * (A + 1);
    out.log_error.push_back(static_cast<log_real>(log(diff > floor ? diff : floor)));
  }
  return out;
}

struct eval_options {
  // Maximum tolerated max|term| / |sum| in long double before the result is rejected.
  log_real guard_factor = 1e12;
  // A term is negligible once |term| < convergence_tol * |partial sum| ...
  log_real convergence_tol = 1e-14;
  // ... and the series has converged after this many negligible terms in a row.
  int convergence_run = 5;
  // Results whose error estimate exceeds this fraction of the value are flagged.
  double flag_rel_tol = 1e-6;
  // Long double results less accurate than this are recomputed from the 50-digit tables.
  double precise_rel_tol = 1e-13;
  // Guard for the 50-digit sums: losing 30 digits still leaves about 20.
  log_real precise_guard_factor = 1e30;
  bool allow_precise = true;
};

struct series_value {
  double value = 0;
  double error_estimate = 0;
  double cancellation = 1;  // max |term| / |sum|
  std::size_t terms_used = 0;
  bool converged = true;
  bool guard_tripped = false;
  bool flagged = false;
  bool precise = false;  // summed in 50-digit arithmetic
};

namespace detail {

// sum_i prefactor * coeff_i * x^(step (i + offset) - shift)
struct series_view {
  std::span<const signed_log> coeffs;
  std::span<const log_real> coeff_rel_error;  // empty when coefficients are exact to rounding
  log_real log_prefactor;
  log_real step;
  log_real offset;
  log_real shift;
};

inline series_value evaluate(const series_view& v, log_real x, const eval_options& opt) {
  constexpr log_real eps = std::numeric_limits<log_real>::epsilon();
  series_value r;
  const std::size_t n = v.coeffs.size();
  if (n == 0) {
    r.converged = false;
    r.flagged = true;
    return r;
  }

  const log_real lx = std::log(x);
  std::vector<log_real> log_t(n);
  std::vector<log_real> rel_err(n);
  log_real peak = -std::numeric_limits<log_real>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = v.coeffs[i];
    if (c.sign == 0) {
      log_t[i] = -std::numeric_limits<log_real>::infinity();
      rel_err[i] = 0;
      continue;
    }
    const log_real e = v.step * (static_cast<log_real>(i) + v.offset) - v.shift;
    log_t[i] = v.log_prefactor + c.log_magnitude + e * lx;
    // Rounding in the exponent argument, plus the coefficient's own error.
    rel_err[i] = eps * (4 + std::fabs(v.log_prefactor) + std::fabs(c.log_magnitude) + std::fabs(e * lx));
    if (!v.coeff_rel_error.empty()) rel_err[i] += v.coeff_rel_error[i];
    peak = std::max(peak, log_t[i]);
  }

  compensated_sum<log_real> acc;
  log_real err_scaled = 0;
  log_real last_abs = 0;
  int run = 0;
  std::size_t used = 0;
  r.converged = false;
  for (std::size_t i = 0; i < n; ++i) {
    const int sign = v.coeffs[i].sign;
    used = i + 1;
    if (sign == 0) continue;
    const log_real t = std::exp(log_t[i] - peak);
    acc.add(sign * t);
    err_scaled += t * rel_err[i];
    last_abs = t;
    if (t < opt.convergence_tol * std::fabs(acc.value())) {
      if (++run >= opt.convergence_run) {
        r.converged = true;
        break;
      }
    } else {
      run = 0;
    }
  }

  const log_real s = acc.value();
  const log_real scale = std::exp(peak);
  r.terms_used = used;
  r.cancellation = s == 0 ? std::numeric_limits<double>::infinity() : static_cast<double>(1 / std::fabs(s));
  const log_real truncation = r.converged ? last_abs : 2 * last_abs;
  const log_real err = (err_scaled + truncation + eps * acc.abs_total()) * scale;
  r.value = static_cast<double>(s * scale);
  r.error_estimate = static_cast<double>(err);
  r.guard_tripped = !(r.cancellation <= opt.guard_factor);
  r.flagged = r.guard_tripped || !r.converged || !(r.error_estimate <= opt.flag_rel_tol * std::fabs(r.value));
  return r;
}

// The same sum over 50-digit coefficients. Powers of x are built by
// repeated multiplication, so the rounding error of term i grows like i eps.
struct precise_view {
  std::span<const precise_real> coeffs;
  std::span<const log_real> coeff_rel_error;  // empty when coefficients are exact to rounding
  log_real log_prefactor;
  log_real step;
  log_real offset;
  log_real shift;
};

inline series_value evaluate_precise(const precise_view& v, log_real x, const eval_options& opt) {
  using R = precise_real;
  const R eps = std::numeric_limits<R>::epsilon();
  series_value r;
  r.precise = true;
  const std::size_t n = v.coeffs.size();
  if (n == 0) {
    r.converged = false;
    r.flagged = true;
    return r;
  }

  const R lx = log(R(x));
  const R y = exp(R(v.step) * lx);
  R power = exp(R(v.log_prefactor) + (R(v.step) * R(v.offset) - R(v.shift)) * lx);
  R sum = 0, abs_total = 0, err = 0, peak = 0, last_abs = 0;
  const R tol = R(opt.convergence_tol);
  int run = 0;
  std::size_t used = 0;
  r.converged = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) power *= y;
    used = i + 1;
    if (v.coeffs[i] == 0) continue;
    const R t = v.coeffs[i] * power;
    const R a = abs(t);
    sum += t;
    abs_total += a;
    if (a > peak) peak = a;
    R rel = eps * (8 + static_cast<unsigned>(i));
    if (!v.coeff_rel_error.empty()) rel += R(v.coeff_rel_error[i]);
    err += a * rel;
    last_abs = a;
    if (a < tol * abs(sum)) {
      if (++run >= opt.convergence_run) {
        r.converged = true;
        break;
      }
    } else {
      run = 0;
    }
  }

  r.terms_used = used;
  r.cancellation = sum == 0 ? std::numeric_limits<double>::infinity() : static_cast<double>(peak / abs(sum));
  const R truncation = r.converged ? last_abs : 2 * last_abs;
  r.value = static_cast<double>(sum);
  r.error_estimate = static_cast<double>(err + truncation + eps * abs_total);
  r.guard_tripped = !(r.cancellation <= opt.precise_guard_factor);
  r.flagged = r.guard_tripped || !r.converged || !(r.error_estimate <= opt.flag_rel_tol * std::fabs(r.value));
  return r;
}

// Long double first, 50 digits when that is not accurate enough.
inline series_value evaluate_adaptive(const series_view& fast, const precise_view& slow, log_real x,
                                      const eval_options& opt) {
  auto r = evaluate(fast, x, opt);
  if (opt.allow_precise && !(r.error_estimate <= opt.precise_rel_tol * std::fabs(r.value)))
    r = evaluate_precise(slow, x, opt);
  return r;
}

inline void check_scale(double K) {
  if (!(K > 0.0) || !std::isfinite(K)) throw invalid_parameter("K must be finite and > 0");
}

inline void check_phi(double phi, bool strictly_positive) {
  if (std::isnan(phi) || phi < 0.0 || (strictly_positive && phi == 0.0))
    throw domain_error("phi out of range: " + std::to_string(phi));
}

inline series_value clamp_probability(series_value r) {
  if (r.value < 0.0) {
    r.value = 0.0;
    r.flagged = true;
  } else if (r.value > 1.0) {
    if (r.value - 1.0 > r.error_estimate) r.flagged = true;
    r.value = 1.0;
  }
  return r;
}

inline series_value clamp_density(series_value r) {
  if (r.value < 0.0) {
    r.value = 0.0;
    r.flagged = true;
  }
  return r;
}

inline series_value raise_on_guard(series_value r, const char* what) {
  if (r.guard_tripped)
    throw precision_loss(std::string(what) + ": series cancellation " + std::to_string(r.cancellation) +
                         " exceeds the guard factor");
  return r;
}

inline std::vector<signed_log> eta_terms(const series_coefficients& s) {
  std::vector<signed_log> out(s.eta_values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s.eta(i);
  return out;
}

inline std::vector<precise_real> pdf_values(const series_coefficients& s) {
  std::vector<precise_real> out(s.eta_values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s.pdf_value(i);
  return out;
}

// rho_i (alpha / 2) (i + A N mu)
inline std::vector<precise_real> tas_pdf_values(const tas_coefficients& t) {
  const precise_real offset = t.num_antennas * t.base.num_branches * precise_real(t.base.source_params.mu());
  const precise_real half_alpha = precise_real(t.base.source_params.alpha()) / 2;
  std::vector<precise_real> out(t.values.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = t.values[i] * half_alpha * (precise_real(static_cast<unsigned>(i)) + offset);
  return out;
}

inline std::vector<signed_log> to_signed_logs(const std::vector<precise_real>& v) {
  std::vector<signed_log> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = to_signed_log(v[i]);
  return out;
}

}  // namespace detail

// Distribution of Phi = K S^(2/vartheta) for the N-branch sum. Coefficient
// tables are precomputed so repeated evaluation is cheap.
class phi_distribution {
 public:
  explicit phi_distribution(series_coefficients s)
      : series_(std::move(s)),
        cdf_(detail::eta_terms(series_)),
        pdf_precise_(detail::pdf_values(series_)),
        pdf_(detail::to_signed_logs(pdf_precise_)) {}

  const series_coefficients& coefficients() const noexcept { return series_; }
  std::span<const signed_log> cdf_coefficients() const noexcept { return cdf_; }
  std::span<const signed_log> pdf_coefficients() const noexcept { return pdf_; }

  series_value cdf(double K, double phi, const eval_options& opt = {}) const {
    detail::check_scale(K);
    detail::check_phi(phi, false);
    if (phi == 0.0) return {};
    const log_real x = static_cast<log_real>(phi) / K;
    return detail::clamp_probability(
        detail::evaluate_adaptive(fast(cdf_, 0, 0), slow(series_.eta_values, 0, 0), x, opt));
  }

  series_value pdf(double K, double phi, const eval_options& opt = {}) const {
    detail::check_scale(K);
    detail::check_phi(phi, true);
    const log_real lk = std::log(static_cast<log_real>(K));
    const log_real x = static_cast<log_real>(phi) / K;
    return detail::clamp_density(detail::evaluate_adaptive(fast(pdf_, 1, lk), slow(pdf_precise_, 1, lk), x, opt));
  }

 private:
  detail::series_view fast(std::span<const signed_log> coeffs, int shift, log_real log_k) const {
    const auto& p = series_.source_params;
    return {coeffs,
            {},
            series_.beta_log - log_k,
            static_cast<log_real>(p.alpha()) / 2,
            series_.num_branches * static_cast<log_real>(p.mu()),
            static_cast<log_real>(shift)};
  }
  detail::precise_view slow(std::span<const precise_real> coeffs, int shift, log_real log_k) const {
    const auto f = fast({}, shift, log_k);
    return {coeffs, {}, f.log_prefactor, f.step, f.offset, f.shift};
  }

  series_coefficients series_;
  std::vector<signed_log> cdf_;
  std::vector<precise_real> pdf_precise_;
  std::vector<signed_log> pdf_;
};

// Distribution of the selected-antenna Phi (best of A).
class tas_distribution {
 public:
  explicit tas_distribution(tas_coefficients t)
      : tas_(std::move(t)), pdf_precise_(detail::tas_pdf_values(tas_)), pdf_(detail::to_signed_logs(pdf_precise_)) {
    rel_error_.resize(tas_.terms.size());
    for (std::size_t i = 0; i < rel_error_.size(); ++i)
      rel_error_[i] = std::exp(tas_.log_error[i] - tas_.terms[i].log_magnitude);
  }

  const tas_coefficients& coefficients() const noexcept { return tas_; }

  series_value cdf(double K, double phi, const eval_options& opt = {}) const {
    detail::check_scale(K);
    detail::check_phi(phi, false);
    if (phi == 0.0) return {};
    const log_real x = static_cast<log_real>(phi) / K;
    return detail::clamp_probability(
        detail::evaluate_adaptive(fast(tas_.terms, 0, 0), slow(tas_.values, 0, 0), x, opt));
  }

  series_value pdf(double K, double phi, const eval_options& opt = {}) const {
    detail::check_scale(K);
    detail::check_phi(phi, true);
    const log_real lk = std::log(static_cast<log_real>(K));
    const log_real x = static_cast<log_real>(phi) / K;
    return detail::clamp_density(detail::evaluate_adaptive(fast(pdf_, 1, lk), slow(pdf_precise_, 1, lk), x, opt));
  }

 private:
  detail::series_view fast(std::span<const signed_log> coeffs, int shift, log_real log_k) const {
    const auto& p = tas_.base.source_params;
    const int A = tas_.num_antennas;
    return {coeffs,
            rel_error_,
            A * tas_.base.beta_log - log_k,
            static_cast<log_real>(p.alpha()) / 2,
            A * tas_.base.num_branches * static_cast<log_real>(p.mu()),
            static_cast<log_real>(shift)};
  }
  detail::precise_view slow(std::span<const precise_real> coeffs, int shift, log_real log_k) const {
    const auto f = fast({}, shift, log_k);
    return {coeffs, rel_error_, f.log_prefactor, f.step, f.offset, f.shift};
  }

  tas_coefficients tas_;
  std::vector<precise_real> pdf_precise_;
  std::vector<signed_log> pdf_;
  std::vector<log_real> rel_error_;
};

// Throwing entry points: precision_loss when the cancellation guard trips.
inline series_value eval_cdf(const phi_distribution& d, double K, double phi, const eval_options& opt = {}) {
  return detail::raise_on_guard(d.cdf(K, phi, opt), "eval_cdf");
}
inline series_value eval_cdf(const tas_distribution& d, double K, double phi, const eval_options& opt = {}) {
  return detail::raise_on_guard(d.cdf(K, phi, opt), "eval_cdf");
}
inline series_value eval_pdf(const phi_distribution& d, double K, double phi, const eval_options& opt = {}) {
  return detail::raise_on_guard(d.pdf(K, phi, opt), "eval_pdf");
}
inline series_value eval_pdf(const tas_distribution& d, double K, double phi, const eval_options& opt = {}) {
  return detail::raise_on_guard(d.pdf(K, phi, opt), "eval_pdf");
}

// Debug dump: index, sign, log10 magnitude.
inline void write_coefficients_csv(std::ostream& os, std::span<const signed_log> terms) {
  os << "index,sign,log10_magnitude\n";
  const log_real to_log10 = 1 / std::log(log_real(10));
  const auto old_precision = os.precision(17);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    os << i << ',' << terms[i].sign << ',';
    if (terms[i].sign == 0)
      os << "-inf";
    else
      os << static_cast<double>(terms[i].log_magnitude * to_log10);
    os << '\n';
  }
  os.precision(old_precision);
}

}  // namespace tasnoma::series
