#pragma once

// Monte Carlo oracle for the TAS-NOMA outage probabilities.
//
// Every trial draws the A x N envelopes of both users from its own Philox
// substream (seed, trial index), applies TAS on U2's combined metric, and
// forms the post-combining SNRs of both users on the chosen antenna.
// Workers take contiguous trial ranges and only integer counters are
// merged, so results do not depend on the worker count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tasnoma/errors.hpp"
#include "tasnoma/fading.hpp"
#include "tasnoma/outage.hpp"
#include "tasnoma/random.hpp"
#include "tasnoma/series.hpp"
#include "tasnoma/stats.hpp"

namespace tasnoma::mc {

using outage::system_config;

struct mc_config {
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 1;
  unsigned workers = 1;

  void validate() const {
    if (trials < 1) throw invalid_parameter("invalid 'mc.trials': must be >= 1");
    if (workers < 1) throw invalid_parameter("invalid 'mc.workers': must be >= 1");
  }
};

struct mc_estimate {
  double p_hat = 0;
  double std_error = 0;
  double ci95_low = 0;
  double ci95_high = 0;
  std::uint64_t trials = 0;
  std::uint64_t count = 0;

  // The normal approximation is unreliable below 10 expected events.
  bool resolvable() const noexcept { return count >= 10; }

  // |p - p_hat| in units of the standard error; infinite when p_hat has no spread.
  double deviation(double p) const noexcept {
    const double d = std::fabs(p - p_hat);
    if (std_error > 0.0) return d / std_error;
    return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
};

inline mc_estimate make_estimate(std::uint64_t count, std::uint64_t trials) {
  if (trials == 0) throw invalid_parameter("invalid 'mc.trials': must be >= 1");
  if (count > trials) throw invalid_parameter("event count exceeds trial count");
  mc_estimate e;
  e.trials = trials;
  e.count = count;
  e.p_hat = static_cast<double>(count) / static_cast<double>(trials);
  e.std_error = std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(trials));
  e.ci95_low = std::max(0.0, e.p_hat - 1.959963984540054 * e.std_error);
  e.ci95_high = std::min(1.0, e.p_hat + 1.959963984540054 * e.std_error);
  return e;
}

struct outage_counts {
  std::uint64_t u1 = 0;
  std::uint64_t u2 = 0;
  std::uint64_t both = 0;
  std::uint64_t either = 0;

  outage_counts& operator+=(const outage_counts& o) noexcept {
    u1 += o.u1;
    u2 += o.u2;
    both += o.both;
    either += o.either;
    return *this;
  }
  friend bool operator==(const outage_counts&, const outage_counts&) = default;
};

struct outage_estimates {
  mc_estimate u1;
  mc_estimate u2;
  mc_estimate overall;
  outage_counts counts;
};

inline outage_estimates make_estimates(const outage_counts& c, std::uint64_t trials) {
  return {make_estimate(c.u1, trials), make_estimate(c.u2, trials), make_estimate(c.either, trials), c};
}

// Combined channel gains without the SNR: Phi_k = snr * gain_k.
struct channel_gains {
  double u1;
  double u2;
  int selected_antenna;
};

// A receiver setup evaluated on a shared set of draws.
struct receiver_variant {
  int num_rx_antennas;
  series::combining scheme;

  friend bool operator==(const receiver_variant&, const receiver_variant&) = default;
};

// Draws per-trial channels for one fading law and antenna count.
//
// Each trial draws the A x N_max envelopes of both users, where N_max is the
// largest branch count among the variants. A variant with N branches uses
// branches 1..N, so all variants see the same channels.
class channel_sampler {
 public:
  channel_sampler(const fading::alpha_mu_params& f, int num_tx_antennas, std::vector<receiver_variant> variants)
      : num_tx_(num_tx_antennas), variants_(std::move(variants)), sampler_(f) {
    if (num_tx_ < 1) throw invalid_parameter("number of transmit antennas must be >= 1");
    if (variants_.empty()) throw invalid_parameter("no receiver variants");
    for (const auto& v : variants_) {
      if (v.num_rx_antennas < 1) throw invalid_parameter("number of receive antennas must be >= 1");
      max_rx_ = std::max(max_rx_, v.num_rx_antennas);
    }
    inv_mu_ = 1.0 / f.mu();
    inv_alpha_ = 1.0 / f.alpha();
    h_hat_ = f.h_hat();
    const std::size_t cells = static_cast<std::size_t>(num_tx_) * (max_rx_ + 1);
    for (auto* t : {&u1_, &u2_}) {
      t->linear.assign(cells, 0.0);
      t->squared.assign(cells, 0.0);
    }
  }

  explicit channel_sampler(const system_config& cfg)
      : channel_sampler(cfg.fading, cfg.num_tx_antennas, {{cfg.num_rx_antennas, cfg.scheme}}) {}

  const std::vector<receiver_variant>& variants() const noexcept { return variants_; }

  // Draw order: U2 then U1; antennas 1..A; branches 1..N_max.
  template <class URBG>
  void draw(URBG& rng, std::span<channel_gains> out) {
    if (out.size() != variants_.size()) throw invalid_parameter("output size does not match the variant count");
    sampler_.reset();
    fill(rng, u2_);
    fill(rng, u1_);
    for (std::size_t v = 0; v < variants_.size(); ++v) {
      const auto& var = variants_[v];
      // TAS maximizes U2's combined SNR, i.e. sum_n h^vartheta.
      double best = -1.0;
      int chosen = 0;
      for (int a = 0; a < num_tx_; ++a) {
        const double m = metric(u2_, a, var);
        if (m > best) {
          best = m;
          chosen = a;
        }
      }
      out[v] = {combined(metric(u1_, chosen, var), var), combined(best, var), chosen};
    }
  }

  template <class URBG>
  channel_gains draw(URBG& rng) {
    channel_gains g{};
    draw(rng, std::span<channel_gains>(&g, 1));
    return g;
  }

 private:
  // Prefix sums over branches: cell a * (N_max + 1) + n holds the sum of the
  // first n envelopes (or squared envelopes) of antenna a.
  struct prefix_table {
    std::vector<double> linear;
    std::vector<double> squared;
  };

  template <class URBG>
  void fill(URBG& rng, prefix_table& t) {
    const int stride = max_rx_ + 1;
    for (int a = 0; a < num_tx_; ++a) {
      const int base = a * stride;
      for (int n = 0; n < max_rx_; ++n) {
        // h = h_hat (G/mu)^(1/alpha)
        const double h = h_hat_ * std::pow(sampler_.gamma_variate(rng) * inv_mu_, inv_alpha_);
        t.linear[base + n + 1] = t.linear[base + n] + h;
        t.squared[base + n + 1] = t.squared[base + n] + h * h;
      }
    }
  }

  // sum_n h^vartheta over the variant's branches
  double metric(const prefix_table& t, int antenna, const receiver_variant& v) const noexcept {
    const std::size_t cell = static_cast<std::size_t>(antenna) * (max_rx_ + 1) + v.num_rx_antennas;
    return v.scheme == series::combining::mrc ? t.squared[cell] : t.linear[cell];
  }

  // g * S^(2/vartheta)
  static double combined(double s, const receiver_variant& v) noexcept {
    return v.scheme == series::combining::mrc ? s : s * s / v.num_rx_antennas;
  }

  int num_tx_;
  std::vector<receiver_variant> variants_;
  fading::sampler sampler_;
  int max_rx_ = 0;
  double inv_mu_ = 0;
  double inv_alpha_ = 0;
  double h_hat_ = 0;
  prefix_table u1_;
  prefix_table u2_;
};

// (Phi_1, Phi_2) for one trial.
template <class URBG>
std::pair<double, double> sample_phis(const system_config& cfg, URBG& rng) {
  cfg.validate();
  channel_sampler s(cfg);
  const auto g = s.draw(rng);
  return {cfg.snr * g.u1, cfg.snr * g.u2};
}

namespace detail {

// Runs body(begin, end, worker) over contiguous chunks of [0, trials).
template <class Body>
void parallel_trials(std::uint64_t trials, unsigned workers, Body&& body) {
  const std::uint64_t w = std::max<std::uint64_t>(1, std::min<std::uint64_t>(workers, trials));
  if (w == 1) {
    body(std::uint64_t{0}, trials, 0u);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::uint64_t k = 0; k < w; ++k) {
    const std::uint64_t begin = trials * k / w, end = trials * (k + 1) / w;
    pool.emplace_back([&body, begin, end, k] { body(begin, end, static_cast<unsigned>(k)); });
  }
  for (auto& t : pool) t.join();
}

inline void check_shared_channel(const system_config& ref, const system_config& p) {
  if (!(p.fading == ref.fading) || p.num_tx_antennas != ref.num_tx_antennas)
    throw invalid_parameter("all evaluation points must share the fading law and transmit antenna count");
}

inline outage_counts classify(const system_config& p, const channel_gains& g) {
  const double phi1 = p.snr * g.u1, phi2 = p.snr * g.u2;
  const double gamma1 = p.rho / (p.xi * p.xi * (1.0 - p.rho) + 1.0 / phi1);
  const double gamma2 = (1.0 - p.rho) / (p.rho + 1.0 / phi2);
  const bool o1 = gamma1 <= p.threshold_u1, o2 = gamma2 <= p.threshold_u2;
  return {o1, o2, o1 && o2, o1 || o2};
}

}  // namespace detail

// Estimates at several points sharing the fading law and transmit antenna
// count. All points see the same channel draws, so for a fixed point the
// result also depends on the largest receive antenna count in the set.
inline std::vector<outage_estimates> estimate_outage_points(std::span<const system_config> points,
                                                            const mc_config& mc) {
  mc.validate();
  if (points.empty()) throw invalid_parameter("no evaluation points");
  std::vector<receiver_variant> variants;
  std::vector<std::size_t> variant_of(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i].validate();
    detail::check_shared_channel(points.front(), points[i]);
    const receiver_variant v{points[i].num_rx_antennas, points[i].scheme};
    auto it = std::find(variants.begin(), variants.end(), v);
    variant_of[i] = static_cast<std::size_t>(it - variants.begin());
    if (it == variants.end()) variants.push_back(v);
  }

  const std::size_t w = std::max<std::uint64_t>(1, std::min<std::uint64_t>(mc.workers, mc.trials));
  std::vector<std::vector<outage_counts>> partial(w, std::vector<outage_counts>(points.size()));
  detail::parallel_trials(mc.trials, mc.workers, [&](std::uint64_t begin, std::uint64_t end, unsigned k) {
    channel_sampler sampler(points.front().fading, points.front().num_tx_antennas, variants);
    std::vector<channel_gains> gains(variants.size());
    auto& counts = partial[k];
    for (std::uint64_t t = begin; t < end; ++t) {
      random::philox_stream rng(mc.seed, t);
      sampler.draw(rng, gains);
      for (std::size_t i = 0; i < points.size(); ++i) counts[i] += detail::classify(points[i], gains[variant_of[i]]);
    }
  });

  std::vector<outage_estimates> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    outage_counts total;
    for (const auto& c : partial) total += c[i];
    out.push_back(make_estimates(total, mc.trials));
  }
  return out;
}

inline outage_estimates estimate_outage(const system_config& cfg, const mc_config& mc) {
  return estimate_outage_points(std::span<const system_config>(&cfg, 1), mc).front();
}

// One estimate per SNR (dB); cfg.snr is ignored.
inline std::vector<outage_estimates> estimate_outage_sweep(const system_config& cfg, std::span<const double> grid_db,
                                                           const mc_config& mc) {
  outage::check_grid(grid_db);
  std::vector<system_config> points(grid_db.size(), cfg);
  for (std::size_t i = 0; i < grid_db.size(); ++i) points[i].snr = outage::db_to_linear(grid_db[i]);
  return estimate_outage_points(points, mc);
}

struct phi_samples {
  std::vector<double> phi1;
  std::vector<double> phi2;
};

// Per-trial (Phi_1, Phi_2) at cfg.snr, in trial order.
inline phi_samples collect_phis(const system_config& cfg, const mc_config& mc) {
  cfg.validate();
  mc.validate();
  phi_samples s{std::vector<double>(mc.trials), std::vector<double>(mc.trials)};
  detail::parallel_trials(mc.trials, mc.workers, [&](std::uint64_t begin, std::uint64_t end, unsigned) {
    channel_sampler sampler(cfg);
    for (std::uint64_t t = begin; t < end; ++t) {
      random::philox_stream rng(mc.seed, t);
      const auto g = sampler.draw(rng);
      s.phi1[t] = cfg.snr * g.u1;
      s.phi2[t] = cfg.snr * g.u2;
    }
  });
  return s;
}

struct independence_report {
  stats::ks_result ks;       // Phi_1 at A = 1 versus Phi_1 at A = cfg.A
  double correlation = 0;    // corr(Phi_1, Phi_2) at A = cfg.A
  double correlation_bound = 0;
  bool pass = false;
};

// Checks that antenna selection leaves U1 untouched. The A = 1 reference
// sample uses a seed derived from mc.seed so the two samples are independent.
inline independence_report independence_check(const system_config& cfg, const mc_config& mc, double level = 0.01) {
  system_config single = cfg;
  single.num_tx_antennas = 1;
  mc_config ref = mc;
  ref.seed = random::derive_seed(mc.seed, 1);

  const auto with_tas = collect_phis(cfg, mc);
  const auto without = collect_phis(single, ref);

  independence_report r;
  r.ks = stats::ks_two_sample(without.phi1, with_tas.phi1, level);
  r.correlation = stats::correlation(with_tas.phi1, with_tas.phi2);
  r.correlation_bound = 4.0 / std::sqrt(static_cast<double>(mc.trials));
  r.pass = r.ks.accept && std::fabs(r.correlation) <= r.correlation_bound;
  return r;
}

}  // namespace tasnoma::mc
