#include <gtest/gtest.h>

#include <boost/math/statistics/linear_regression.hpp>
#include <cmath>
#include <vector>

#include "tasnoma/mc_sim.hpp"
#include "tasnoma/outage.hpp"

using namespace tasnoma;
using fading::alpha_mu_params;
using outage::system_config;
using series::combining;

namespace {

system_config rayleigh(double rho, double xi, double r1, double r2, double snr, int A = 1) {
  return {A, 1, rho, xi, r1, r2, snr, alpha_mu_params(2, 1, 1), combining::mrc};
}

system_config fig1(int N, combining s, double snr_db) {
  return {2, N, 0.5, 1, 0.5, 0.5, outage::db_to_linear(snr_db), alpha_mu_params(0.7, 0.5, 2), s};
}

system_config fig23(int A, combining s, double rho, double xi, double snr_db) {
  return {A, 5, rho, xi, 0.5, 0.5, outage::db_to_linear(snr_db), alpha_mu_params(0.5, 1, 2), s};
}

std::vector<double> grid(double a, double b, double step) {
  std::vector<double> g;
  for (double x = a; x <= b + 1e-9; x += step) g.push_back(x);
  return g;
}

// Least-squares slope of log10 p against log10 snr.
template <class Get>
double slope(const std::vector<outage::outage_report>& rows, Get&& get) {
  std::vector<double> x, y;
  for (const auto& r : rows) {
    x.push_back(r.snr_db / 10);
    y.push_back(std::log10(get(r)));
  }
  return boost::math::statistics::simple_ordinary_least_squares(x, y).second;
}

}  // namespace

TEST(Config, Validation) {
  auto c = rayleigh(0.5, 0, 0.5, 0.5, 10);
  c.rho = 1.5;
  EXPECT_THROW(c.validate(), invalid_parameter);
  c = rayleigh(0.5, 0, 0.5, 0.5, 10);
  c.xi = -0.1;
  EXPECT_THROW(c.validate(), invalid_parameter);
  c = rayleigh(0.5, 0, 0.5, 0.5, 0);
  EXPECT_THROW(c.validate(), invalid_parameter);
  c = rayleigh(0.5, 0, 0.5, 0.5, 10, 0);
  EXPECT_THROW(c.validate(), invalid_parameter);
  try {
    rayleigh(1.5, 0, 0.5, 0.5, 10).validate();
  } catch (const invalid_parameter& e) {
    EXPECT_NE(std::string(e.what()).find("rho"), std::string::npos);
  }
}

TEST(Config, WarnsOnLargeRho) {
  EXPECT_EQ(rayleigh(0.5, 0, 0.5, 0.5, 10).warnings().size(), 1u);
  EXPECT_TRUE(rayleigh(0.4, 0, 0.5, 0.5, 10).warnings().empty());
}

TEST(Config, RateToThreshold) {
  EXPECT_DOUBLE_EQ(outage::threshold_from_rate(1), 1.0);
  EXPECT_DOUBLE_EQ(outage::threshold_from_rate(2), 3.0);
  EXPECT_DOUBLE_EQ(outage::db_to_linear(20), 100.0);
  EXPECT_DOUBLE_EQ(outage::linear_to_db(1000), 30.0);
}

TEST(OpU1, InfeasibleThresholdIsCertainOutage) {
  const auto c = fig23(3, combining::mrc, 0.4, 1, 20);
  c.validate();
  auto bad = c;
  bad.threshold_u1 = 1;  // 0.4 - 0.6 < 0
  const outage::analytic_model m(bad);
  EXPECT_EQ(outage::op_u1(bad, m.u1()), 1.0);
}

TEST(OpU1, RayleighPerfectSic) {
  const auto c = rayleigh(0.5, 0, 0.5, 0.5, 10);
  const outage::analytic_model m(c);
  EXPECT_NEAR(outage::op_u1(c, m.u1()), -std::expm1(-0.1), 1e-12);
}

TEST(OpU1, MatchesMonteCarloFig1) {
  const auto c = fig1(4, combining::mrc, 20);
  const outage::analytic_model m(c);
  const double p = outage::op_u1(c, m.u1());
  const auto e = mc::estimate_outage(c, {10'000'000, 2024, 1});
  EXPECT_LE(e.u1.deviation(p), 3.0) << "analytic " << p << " simulated " << e.u1.p_hat;
}

TEST(OpU1, DoesNotDependOnAntennaCount) {
  const auto a = fig1(4, combining::egc, 10);
  auto b = a;
  b.num_tx_antennas = 6;
  const outage::analytic_model ma(a), mb(b);
  EXPECT_EQ(outage::op_u1(a, ma.u1()), outage::op_u1(b, mb.u1()));
}

TEST(OpU2, InfeasibleThresholdIsCertainOutage) {
  auto c = rayleigh(0.5, 0, 0.5, 1.2, 10);
  const outage::analytic_model m(c);
  EXPECT_EQ(outage::op_u2(c, m.u2()), 1.0);
}

// phi* = 1 / ((1 - rho) / R - rho) = 1 / 1.25
TEST(OpU2, RayleighSingleAntenna) {
  const auto c = rayleigh(0.25, 0, 0.5, 0.5, 10);
  const outage::analytic_model m(c);
  const double phi = 1 / 1.25;
  EXPECT_NEAR(outage::op_u2(c, m.u2()), -std::expm1(-phi / 10), 1e-12);
}

TEST(OpU2, RayleighBestOfThree) {
  const auto c = rayleigh(0.25, 0, 0.5, 0.5, 10, 3);
  const outage::analytic_model m(c);
  const double phi = 1 / 1.25;
  EXPECT_NEAR(outage::op_u2(c, m.u2()), std::pow(-std::expm1(-phi / 10), 3), 1e-8);
}

TEST(OpU2, RejectsMismatchedCoefficients) {
  const auto c = rayleigh(0.25, 0, 0.5, 0.5, 10, 3);
  const outage::analytic_model m(rayleigh(0.25, 0, 0.5, 0.5, 10, 2));
  EXPECT_THROW(outage::op_u2(c, m.u2()), invalid_parameter);
  const outage::analytic_model other(fig1(1, combining::mrc, 10));
  EXPECT_THROW(outage::op_u1(c, other.u1()), invalid_parameter);
}

TEST(OpOverall, Examples) {
  EXPECT_NEAR(outage::op_overall(0.1, 0.2), 0.28, 1e-15);
  EXPECT_EQ(outage::op_overall(0, 0.37), 0.37);
  EXPECT_EQ(outage::op_overall(1, 0.37), 1.0);
  EXPECT_THROW(outage::op_overall(1.1, 0), domain_error);
}

TEST(Gains, DiversityOrders) {
  const auto c = fig1(4, combining::mrc, 20);
  const outage::analytic_model m(c);
  const auto g = outage::asymptotic_gains(c, m.u1(), m.u2());
  EXPECT_DOUBLE_EQ(g.diversity_u1, 0.7);
  EXPECT_DOUBLE_EQ(g.diversity_u2, 1.4);

  const auto d = fig23(3, combining::egc, 0.4, 1, 20);
  const outage::analytic_model md(d);
  EXPECT_DOUBLE_EQ(outage::asymptotic_gains(d, md.u1(), md.u2()).diversity_u2, 3.75);
}

TEST(Gains, CodingGainFromLeadingTerm) {
  // Rayleigh, N = 1, MRC: P ~ phi* / snr, so O_c = margin.
  const auto c = rayleigh(0.25, 0, 0.5, 0.5, 10, 2);
  const outage::analytic_model m(c);
  const auto g = outage::asymptotic_gains(c, m.u1(), m.u2());
  EXPECT_NEAR(g.coding_u1, c.margin_u1(), 1e-12);
  EXPECT_NEAR(g.coding_u2, c.margin_u2(), 1e-12);  // (phi*/snr)^2 = (O_c snr)^-2
}

TEST(Gains, InfeasibleHasNoAsymptote) {
  auto c = fig23(3, combining::mrc, 0.4, 1, 20);
  c.threshold_u1 = 1;
  const outage::analytic_model m(c);
  EXPECT_THROW(outage::asymptotic_gains(c, m.u1(), m.u2()), invalid_parameter);
}

TEST(Asymptote, ApproachesExactAt50dB) {
  for (auto s : {combining::egc, combining::mrc}) {
    const auto c = fig1(2, s, 50);
    const outage::analytic_model m(c);
    const auto r = outage::evaluate(c, m);
    ASSERT_FALSE(r.flag_overall());
    EXPECT_LE(std::fabs(std::log10(r.p_u1) - std::log10(r.asym_u1)), 0.02);
    EXPECT_LE(std::fabs(std::log10(r.p_u2) - std::log10(r.asym_u2)), 0.02);
  }
}

TEST(Asymptote, PowerLawSlopes) {
  const auto c = fig1(4, combining::mrc, 20);
  const outage::analytic_model m(c);
  const auto g = outage::asymptotic_gains(c, m.u1(), m.u2());
  auto at = [&](double db) {
    auto p = c;
    p.snr = outage::db_to_linear(db);
    return outage::asymptotic_op(p, g);
  };
  EXPECT_NEAR(std::log10(at(60).p_u1) - std::log10(at(50).p_u1), -g.diversity_u1, 1e-12);
  EXPECT_NEAR(std::log10(at(60).p_u2) - std::log10(at(50).p_u2), -g.diversity_u2, 1e-12);
  EXPECT_LT(at(400).p_overall, 1e-20);
  EXPECT_EQ(at(-200).p_u1, 1.0);
}

TEST(Asymptote, OverallSlopeIsSmallerDiversity) {
  const auto c = fig1(2, combining::egc, 20);
  const outage::analytic_model m(c);
  const auto rows = outage::sweep(c, m, grid(40, 60, 1));
  EXPECT_NEAR(slope(rows, [](const auto& r) { return r.asym_overall; }), -0.35, 0.35 * 0.05);
  EXPECT_NEAR(slope(rows, [](const auto& r) { return r.p_overall; }), -0.35, 0.35 * 0.05);
}

TEST(Sweep, ExactSlopeMatchesDiversity) {
  for (int N : {2, 4}) {
    const auto c = fig1(N, combining::mrc, 20);
    const outage::analytic_model m(c);
    const auto rows = outage::sweep(c, m, grid(45, 55, 1));
    for (const auto& r : rows) ASSERT_FALSE(r.flag_overall());
    const double d1 = 0.7 * 0.5 * N / 2, d2 = 2 * d1;
    EXPECT_NEAR(slope(rows, [](const auto& r) { return r.p_u1; }), -d1, 0.05 * d1);
    EXPECT_NEAR(slope(rows, [](const auto& r) { return r.p_u2; }), -d2, 0.05 * d2);
  }
}

TEST(Sweep, SinglePointEqualsEvaluation) {
  const auto c = fig1(3, combining::egc, 12);
  const outage::analytic_model m(c);
  const std::vector<double> g{12};
  const auto rows = outage::sweep(c, m, g);
  ASSERT_EQ(rows.size(), 1u);
  const auto r = outage::evaluate(c, m);
  EXPECT_EQ(rows[0].p_u1, r.p_u1);
  EXPECT_EQ(rows[0].p_u2, r.p_u2);
  EXPECT_EQ(rows[0].p_overall, r.p_overall);
  EXPECT_EQ(rows[0].snr_db, 12);
}

TEST(Sweep, RejectsBadGrids) {
  const auto c = fig1(3, combining::egc, 12);
  EXPECT_THROW(outage::sweep(c, std::vector<double>{}), invalid_parameter);
  EXPECT_THROW(outage::sweep(c, std::vector<double>{1, 1}), invalid_parameter);
  EXPECT_THROW(outage::sweep(c, std::vector<double>{3, 1}), invalid_parameter);
  EXPECT_THROW(outage::sweep(c, std::vector<double>{0, NAN}), invalid_parameter);
}

TEST(Sweep, ReportInvariants) {
  for (auto s : {combining::egc, combining::mrc}) {
    for (const auto& c : {fig1(4, s, 0), fig23(3, s, 0.4, 1, 0), fig23(7, s, 0.4, 0, 0)}) {
      const auto rows = outage::sweep(c, grid(0, 40, 2));
      double prev1 = 1, prev2 = 1, prev = 1;
      for (const auto& r : rows) {
        for (double p : {r.p_u1, r.p_u2, r.p_overall, r.asym_u1, r.asym_u2, r.asym_overall}) {
          EXPECT_GE(p, 0.0);
          EXPECT_LE(p, 1.0);
        }
        EXPECT_GE(r.p_overall, std::max(r.p_u1, r.p_u2));
        EXPECT_LE(r.p_overall, std::min(1.0, r.p_u1 + r.p_u2) + 1e-16);
        if (r.flag_overall()) continue;
        EXPECT_LE(r.p_u1, prev1);
        EXPECT_LE(r.p_u2, prev2);
        EXPECT_LE(r.p_overall, prev);
        prev1 = r.p_u1;
        prev2 = r.p_u2;
        prev = r.p_overall;
      }
    }
  }
}

TEST(Sweep, FeasibilityDichotomy) {
  auto c = fig23(3, combining::mrc, 0.4, 1, 0);
  c.threshold_u1 = 0.4 / 0.6;  // rho / R = xi^2 (1 - rho) exactly
  c.threshold_u2 = 0.6 / 0.4;
  for (const auto& r : outage::sweep(c, grid(0, 40, 10))) {
    EXPECT_EQ(r.p_u1, 1.0);
    EXPECT_EQ(r.p_u2, 1.0);
    EXPECT_EQ(r.p_overall, 1.0);
  }
  c.threshold_u1 *= 0.999;
  c.threshold_u2 *= 0.999;
  for (const auto& r : outage::sweep(c, grid(30, 40, 10))) {
    EXPECT_LT(r.p_u1, 1.0);
    EXPECT_LT(r.p_u2, 1.0);
  }
}

TEST(Sweep, ImperfectSicDominates) {
  for (auto s : {combining::egc, combining::mrc}) {
    const auto g = grid(0, 40, 2);
    const auto perfect = outage::sweep(fig23(7, s, 0.4, 0, 0), g);
    const auto imperfect = outage::sweep(fig23(7, s, 0.4, 1, 0), g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_GE(imperfect[i].p_overall, perfect[i].p_overall);
      EXPECT_GE(imperfect[i].p_u1, perfect[i].p_u1);
      if (perfect[i].p_u1 > 0 && imperfect[i].p_u1 < 1) EXPECT_GT(imperfect[i].p_u1, perfect[i].p_u1);
    }
  }
}

TEST(Sweep, MrcDominatesEgc) {
  const auto g = grid(0, 40, 2);
  for (int N : {2, 4, 8}) {
    const auto egc = outage::sweep(fig1(N, combining::egc, 0), g);
    const auto mrc = outage::sweep(fig1(N, combining::mrc, 0), g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_LE(mrc[i].p_u1, egc[i].p_u1) << N << ' ' << g[i];
      EXPECT_LE(mrc[i].p_u2, egc[i].p_u2) << N << ' ' << g[i];
    }
  }
}

TEST(Sweep, MoreAntennasNeverHurtU2) {
  const auto g = grid(0, 40, 2);
  std::vector<outage::outage_report> prev;
  for (int A = 1; A <= 7; ++A) {
    const auto rows = outage::sweep(fig23(A, combining::mrc, 0.4, 1, 0), g);
    if (!prev.empty())
      for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LE(rows[i].p_u2, prev[i].p_u2) << A << ' ' << g[i];
    prev = rows;
  }
}
