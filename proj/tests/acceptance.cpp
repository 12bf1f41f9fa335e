// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/statistics/linear_regression.hpp>

#include "oracles.hpp"
#include "tasnoma/csv.hpp"
#include "tasnoma/mc_sim.hpp"
#include "tasnoma/outage.hpp"
#include "tasnoma/run_config.hpp"
#include "tasnoma/runner.hpp"
#include "tasnoma/series.hpp"

using namespace tasnoma;
using fading::alpha_mu_params;
using outage::system_config;
using series::combiner_spec;
using series::combining;

namespace {

struct outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const char* name(combining s) { return s == combining::egc ? "EGC" : "MRC"; }

constexpr combining schemes[] = {combining::egc, combining::mrc};

system_config fig1(int N, combining s, double snr_db = 0) {
  return {2, N, 0.5, 1, 0.5, 0.5, outage::db_to_linear(snr_db), alpha_mu_params(0.7, 0.5, 2), s};
}

system_config fig2(double rho, combining s, double snr_db = 0) {
  return {3, 5, rho, 1, 0.5, 0.5, outage::db_to_linear(snr_db), alpha_mu_params(0.5, 1, 2), s};
}

system_config fig3(double xi, combining s, double snr_db = 0) {
  return {7, 5, 0.4, xi, 0.5, 0.5, outage::db_to_linear(snr_db), alpha_mu_params(0.5, 1, 2), s};
}

constexpr double fig2_rhos[] = {0.35, 0.4, 0.45, 0.5};
constexpr double fig3_xis[] = {0.0, 1.0};

std::vector<double> grid(double a, double b, double step) {
  std::vector<double> g;
  for (int i = 0; a + i * step <= b + 1e-9; ++i) g.push_back(a + i * step);
  return g;
}

// 1. Rayleigh: F(phi) = 1 - exp(-phi / (K h^2)).
outcome rayleigh_reduction() {
  const double h = 1.3, K = 2.5;
  const auto base = series::build_series(alpha_mu_params(2, 1, h), combiner_spec(combining::mrc, 1));
  const series::phi_distribution phi(base);
  const series::tas_distribution tas(series::tas_power_coeffs(base, 1, series::default_terms));
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const double x = 5.0 * k / 99;
    const double expected = oracle::rayleigh_envelope_cdf(std::sqrt(x) * h, h);
    const double p = x * K * h * h;
    worst = std::max({worst, std::fabs(series::eval_cdf(phi, K, p).value - expected),
                      std::fabs(series::eval_cdf(tas, K, p).value - expected)});
  }
  return {worst <= 1e-9, fmt("max abs error %.2e over 100 points (N=1, A=1)", worst)};
}

// 2. Nakagami-m MRC: Phi / K ~ Gamma(N m, h^2 / m). Grid covers CDF values 1e-6 .. 1 - 1e-6.
outcome nakagami_reduction() {
  const double h = 2, K = 10;
  std::vector<double> levels;
  for (double q : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
    levels.push_back(q);
    levels.push_back(1 - q);
  }
  for (int k = 1; k < 40; ++k) levels.push_back(k / 40.0);

  double worst = 0;
  int points = 0;
  std::string where;
  for (double m : {0.5, 1.0, 2.5}) {
    for (int N : {2, 4}) {
      const series::phi_distribution d(series::build_series(alpha_mu_params(2, m, h), combiner_spec(combining::mrc, N)));
      const boost::math::gamma_distribution<double> g(N * m, h * h / m);
      for (double q : levels) {
        const double x = boost::math::quantile(g, q);
        const double err = std::fabs(series::eval_cdf(d, K, K * x).value - oracle::nakagami_mrc_phi_cdf(x, N, m, h));
        ++points;
        if (err > worst) {
          worst = err;
          where = fmt("m=%g N=%d F=%g", m, N, q);
        }
      }
    }
  }
  return {worst <= 1e-8, fmt("max abs error %.2e over %d points (worst at %s)", worst, points, where.c_str())};
}

// 3. TAS recurrence against repeated Cauchy products.
outcome coefficient_recursion() {
  struct set {
    double a, m;
    combining s;
    int N;
  };
  std::vector<set> sets;
  for (int N = 2; N <= 8; ++N)
    for (auto s : schemes) sets.push_back({0.7, 0.5, s, N});
  for (auto s : schemes) sets.push_back({0.5, 1, s, 5});

  double worst = 0;
  std::size_t shortest = 64;
  for (const auto& f : sets) {
    const auto base = series::build_series(alpha_mu_params(f.a, f.m, 2), combiner_spec(f.s, f.N));
    const auto eta = oracle::eta_series(f.a, f.m, 2, f.N, f.s == combining::egc ? 1 : 2, 64);
    for (int A : {2, 3, 7}) {
      const auto t = series::tas_power_coeffs(base, A, series::default_terms);
      const auto ref = oracle::power_series(eta, A, 64);
      shortest = std::min(shortest, t.size());
      for (std::size_t i = 0; i < std::min<std::size_t>(64, t.size()); ++i) {
        const long double v = static_cast<long double>(t.values[i]);
        worst = std::max(worst, static_cast<double>(std::fabs(v - ref[i]) / std::fabs(ref[i])));
      }
    }
  }
  const bool pass = worst <= 1e-10 && shortest >= 64;
  return {pass, fmt("max rel error %.2e, 64 coefficients, A in {2,3,7}, %zu eta-series", worst, sets.size()) +
                    (shortest < 64 ? fmt(" (only %zu coefficients available)", shortest) : "")};
}

// 4. Series against 1e7 Monte Carlo trials at 10 and 20 dB.
outcome series_vs_simulation() {
  const mc::mc_config run{10'000'000, 1, 1};
  struct family {
    const char* label;
    std::vector<system_config> variants;
  };
  std::vector<family> families(3);
  families[0].label = "fig1";
  families[1].label = "fig2";
  families[2].label = "fig3";
  for (double snr : {10.0, 20.0}) {
    for (auto s : schemes) {
      for (int N = 2; N <= 8; ++N) families[0].variants.push_back(fig1(N, s, snr));
      for (double rho : fig2_rhos) families[1].variants.push_back(fig2(rho, s, snr));
      for (double xi : fig3_xis) families[2].variants.push_back(fig3(xi, s, snr));
    }
  }

  outcome o;
  std::string per_set;
  int compared = 0, misses = 0;
  double worst_z = 0;
  std::string worst_at;
  for (const auto& f : families) {
    const auto start = std::chrono::steady_clock::now();
    const auto sims = mc::estimate_outage_points(f.variants, run);
    for (std::size_t i = 0; i < f.variants.size(); ++i) {
      const auto& c = f.variants[i];
      const outage::analytic_model model(c);
      const auto r = outage::evaluate(c, model);
      const std::pair<double, const mc::mc_estimate*> checks[] = {
          {r.p_u1, &sims[i].u1}, {r.p_u2, &sims[i].u2}, {r.p_overall, &sims[i].overall}};
      const char* labels[] = {"u1", "u2", "overall"};
      for (int k = 0; k < 3; ++k) {
        if (checks[k].first < 1e-4) continue;
        ++compared;
        const double z = checks[k].second->deviation(checks[k].first);
        const bool flagged = k == 0 ? r.flag_u1 : k == 1 ? r.flag_u2 : r.flag_overall();
        if (z > 3 || flagged) ++misses;
        if (z > worst_z) {
          worst_z = z;
          worst_at = fmt("%s %s N=%d rho=%g xi=%g %gdB %s", f.label, name(c.scheme), c.num_rx_antennas, c.rho, c.xi,
                         outage::linear_to_db(c.snr), labels[k]);
        }
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > 300) o.pass = false;
    per_set += fmt(" %s %.0fs;", f.label, secs);
  }
  if (misses > 0) o.pass = false;
  o.detail = fmt("%d of %d comparisons outside 3 SE, worst |z|=%.2f (%s); time", misses, compared, worst_z,
                 worst_at.c_str()) +
             per_set;
  return o;
}

// 5. Diversity order from the slope over 45..55 dB.
outcome diversity_order() {
  const auto g = grid(45, 55, 1);
  double worst = 0;
  std::string where;
  bool flagged = false;
  for (int N : {2, 4}) {
    for (auto s : schemes) {
      const auto c = fig1(N, s);
      const auto rows = outage::sweep(c, g);
      const double a = c.fading.alpha(), m = c.fading.mu();
      const std::pair<double, double (*)(const outage::outage_report&)> users[] = {
          {a * m * N / 2, [](const outage::outage_report& r) { return r.p_u1; }},
          {a * m * c.num_tx_antennas * N / 2, [](const outage::outage_report& r) { return r.p_u2; }}};
      for (int u = 0; u < 2; ++u) {
        std::vector<double> x, y;
        for (const auto& r : rows) {
          flagged |= r.flag_overall();
          x.push_back(r.snr_db / 10);
          y.push_back(std::log10(users[u].second(r)));
        }
        const double slope = -boost::math::statistics::simple_ordinary_least_squares(x, y).second;
        const double err = std::fabs(slope / users[u].first - 1);
        if (err > worst) {
          worst = err;
          where = fmt("%s N=%d U%d slope %.4f vs %.4f", name(s), N, u + 1, slope, users[u].first);
        }
      }
    }
  }
  return {worst <= 0.05 && !flagged,
          fmt("max relative slope error %.2f%% (%s)%s", 100 * worst, where.c_str(), flagged ? ", flagged points" : "")};
}

// 6. Orderings over 0..40 dB.
outcome orderings() {
  const auto g = grid(0, 40, 2);
  auto run = [&](const system_config& c) { return outage::sweep(c, g); };
  const double slack = 1e-12;
  int checks = 0, violations = 0, flagged = 0;
  std::string first;
  auto le = [&](double lo, double hi, const std::string& what) {
    ++checks;
    if (lo <= hi * (1 + slack)) return;
    if (violations++ == 0) first = what + fmt(" (%.6g > %.6g)", lo, hi);
  };
  auto all = [&](const std::vector<outage::outage_report>& a, const std::vector<outage::outage_report>& b,
                 const std::string& what, bool u2_only = false) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      flagged += a[i].flag_overall() + b[i].flag_overall();
      const std::string at = what + fmt(" at %gdB", g[i]);
      le(a[i].p_u2, b[i].p_u2, at + " u2");
      if (u2_only) continue;
      le(a[i].p_u1, b[i].p_u1, at + " u1");
      le(a[i].p_overall, b[i].p_overall, at + " overall");
    }
  };

  // MRC <= EGC
  for (int N = 2; N <= 8; ++N) all(run(fig1(N, combining::mrc)), run(fig1(N, combining::egc)), fmt("fig1 N=%d MRC<=EGC", N));
  for (double rho : fig2_rhos) all(run(fig2(rho, combining::mrc)), run(fig2(rho, combining::egc)), fmt("fig2 rho=%g MRC<=EGC", rho));
  for (double xi : fig3_xis) all(run(fig3(xi, combining::mrc)), run(fig3(xi, combining::egc)), fmt("fig3 xi=%g MRC<=EGC", xi));
  for (auto s : schemes) {
    // xi = 0 <= xi = 1
    all(run(fig3(0, s)), run(fig3(1, s)), fmt("fig3 %s xi0<=xi1", name(s)));
    // nonincreasing in N
    auto prev = run(fig1(2, s));
    for (int N = 3; N <= 8; ++N) {
      auto cur = run(fig1(N, s));
      all(cur, prev, fmt("fig1 %s N=%d<=N=%d", name(s), N, N - 1));
      prev = std::move(cur);
    }
    // U2 nonincreasing in A
    auto c = fig2(0.4, s);
    c.num_tx_antennas = 1;
    prev = run(c);
    for (int A = 2; A <= 7; ++A) {
      c.num_tx_antennas = A;
      auto cur = run(c);
      all(cur, prev, fmt("%s A=%d<=A=%d", name(s), A, A - 1), true);
      prev = std::move(cur);
    }
  }
  return {violations == 0 && flagged == 0,
          fmt("%d of %d pointwise checks violated, %d flagged points", violations, checks, flagged) +
              (violations ? " (first: " + first + ")" : "")};
}

// 7. TAS does not change U1's statistics.
outcome tas_independence() {
  auto c = fig1(4, combining::mrc, 10);
  c.num_tx_antennas = 4;
  const auto r = mc::independence_check(c, {1'000'000, 1, 1}, 0.01);
  return {r.pass, fmt("KS D=%.5f (critical %.5f at 1%%), |corr|=%.2e (bound %.0e)", r.ks.statistic, r.ks.critical,
                      std::fabs(r.correlation), r.correlation_bound)};
}

// 8. Byte-identical CSV across runs and worker counts, and against the recorded file.
outcome determinism() {
  const auto spec = config::load(std::string(TASNOMA_CONFIG_DIR) + "/fig2_egc_rho040.json");
  auto csv_for = [&](unsigned workers) {
    auto s = spec;
    s.mc.run.workers = workers;
    return csv::to_string(cli::execute(s).rows);
  };
  const auto a = csv_for(1), b = csv_for(1), c = csv_for(4);
  std::ifstream in(std::string(TASNOMA_TEST_DATA) + "/fig2_egc_golden.csv", std::ios::binary);
  std::ostringstream golden;
  golden << in.rdbuf();
  const bool runs = a == b, workers = a == c, recorded = a == golden.str();
  return {runs && workers && recorded, fmt("repeat run %s, workers 1 vs 4 %s, recorded file %s (%zu bytes)",
                                           runs ? "identical" : "DIFFERENT", workers ? "identical" : "DIFFERENT",
                                           recorded ? "identical" : "DIFFERENT", a.size())};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<outcome()>> criteria[] = {
      {"Rayleigh reduction", rayleigh_reduction},
      {"Nakagami reduction", nakagami_reduction},
      {"coefficient recursion", coefficient_recursion},
      {"series vs simulation", series_vs_simulation},
      {"diversity order", diversity_order},
      {"orderings", orderings},
      {"TAS independence of U1", tas_independence},
      {"determinism", determinism},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [label, check] : criteria) {
    ++n;
    outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", n, label, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
