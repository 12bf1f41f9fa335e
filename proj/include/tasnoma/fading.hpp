#pragma once

// alpha-mu envelope distribution: density, distribution, moments, sampling.
//
// An envelope h follows the alpha-mu law when mu * (h / h_hat)^alpha is a
// unit-scale gamma variate with shape mu. Rayleigh (alpha = 2, mu = 1),
// Nakagami-m (alpha = 2, mu = m) and Weibull (mu = 1) are special cases.

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "tasnoma/errors.hpp"

namespace tasnoma::fading {

class alpha_mu_params {
 public:
  alpha_mu_params(double alpha, double mu, double h_hat) : alpha_(alpha), mu_(mu), h_hat_(h_hat) {
    check("alpha", alpha);
    check("mu", mu);
    check("h_hat", h_hat);
  }

  double alpha() const noexcept { return alpha_; }
  double mu() const noexcept { return mu_; }
  double h_hat() const noexcept { return h_hat_; }

  friend bool operator==(const alpha_mu_params&, const alpha_mu_params&) = default;

 private:
  static void check(const char* name, double v) {
    if (!std::isfinite(v) || v <= 0.0)
      throw invalid_parameter(std::string("alpha-mu parameter '") + name + "' must be finite and > 0, got " +
                              std::to_string(v));
  }

  double alpha_;
  double mu_;
  double h_hat_;
};

namespace detail {

inline void check_envelope(double h) {
  if (!(h >= 0.0)) throw domain_error("envelope must be >= 0, got " + std::to_string(h));
}

// mu * (h / h_hat)^alpha
inline double gamma_argument(const alpha_mu_params& p, double h) {
  return p.mu() * std::pow(h / p.h_hat(), p.alpha());
}

}  // namespace detail

// Natural log of the density; -inf at h = 0 when alpha*mu > 1.
inline double log_pdf(const alpha_mu_params& p, double h) {
  detail::check_envelope(h);
  const double a = p.alpha(), m = p.mu();
  const double am = a * m;
  if (h == 0.0) {
    if (am > 1.0) return -std::numeric_limits<double>::infinity();
    if (am < 1.0) return std::numeric_limits<double>::infinity();
  }
  const double log_h = (h == 0.0) ? 0.0 : std::log(h);
  return std::log(a) + m * std::log(m) + (am - 1.0) * log_h - detail::gamma_argument(p, h) -
         boost::math::lgamma(m) - am * std::log(p.h_hat());
}

// Density of the envelope. At h = 0 this is the one-sided limit, which is
// +inf when alpha*mu < 1.
inline double pdf(const alpha_mu_params& p, double h) { return std::exp(log_pdf(p, h)); }

// P(mu, mu (h/h_hat)^alpha), the regularized lower incomplete gamma.
inline double cdf(const alpha_mu_params& p, double h) {
  detail::check_envelope(h);
  if (h == 0.0) return 0.0;
  if (std::isinf(h)) return 1.0;
  return boost::math::gamma_p(p.mu(), detail::gamma_argument(p, h));
}

// E[h^k] = h_hat^k Gamma(mu + k/alpha) / (mu^(k/alpha) Gamma(mu)).
inline double moment(const alpha_mu_params& p, double k) {
  const double shift = k / p.alpha();
  if (!std::isfinite(k) || !(p.mu() + shift > 0.0))
    throw domain_error("moment order " + std::to_string(k) + " needs mu + k/alpha > 0");
  const double log_m = k * std::log(p.h_hat()) + boost::math::lgamma(p.mu() + shift) -
                       shift * std::log(p.mu()) - boost::math::lgamma(p.mu());
  return std::exp(log_m);
}

// Draws envelopes as h_hat * (G / mu)^(1/alpha), G ~ Gamma(mu, 1).
//
// The sampler owns a gamma distribution whose internal state (the cached
// normal deviate) is part of the stream; keep one sampler per rng stream.
class sampler {
 public:
  explicit sampler(const alpha_mu_params& p) : params_(p), gamma_(p.mu(), 1.0), inv_alpha_(1.0 / p.alpha()) {}

  template <class URBG>
  double operator()(URBG& rng) {
    return params_.h_hat() * std::pow(gamma_(rng) / params_.mu(), inv_alpha_);
  }

  // The underlying Gamma(mu, 1) draw; h = h_hat (G / mu)^(1/alpha).
  template <class URBG>
  double gamma_variate(URBG& rng) {
    return gamma_(rng);
  }

  // Drops cached state so the next draw depends only on the rng.
  void reset() { gamma_.reset(); }

  const alpha_mu_params& params() const noexcept { return params_; }

 private:
  alpha_mu_params params_;
  std::gamma_distribution<double> gamma_;
  double inv_alpha_;
};

template <class URBG>
double sample(const alpha_mu_params& p, URBG& rng) {
  return sampler(p)(rng);
}

}  // namespace tasnoma::fading
