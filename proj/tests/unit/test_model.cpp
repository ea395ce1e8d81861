#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "signalmarket/model/curves.hpp"

using namespace signalmarket;
using namespace signalmarket::model;

namespace {

// Bayes rule with the two normal letter densities.
double bayes_posterior(double h, const ModelParams& P) {
  const double V = P.tau2 + P.sigma2;
  const double f1 = std::exp(-0.5 * (h - P.mu0 - P.A) * (h - P.mu0 - P.A) / V);
  const double f0 = std::exp(-0.5 * (h - P.mu0) * (h - P.mu0) / V);
  return P.p * f1 / (P.p * f1 + (1 - P.p) * f0);
}

IntegrationConfig mc(int draws, std::uint64_t seed = 1) {
  IntegrationConfig c;
  c.draws = draws;
  c.seed = seed;
  return c;
}

IntegrationConfig gh(int nodes = 64) {
  IntegrationConfig c;
  c.method = IntegrationMethod::gauss_hermite;
  c.nodes = nodes;
  return c;
}

}  // namespace

TEST(Params, Validation) {
  ModelParams P;
  EXPECT_NO_THROW(P.validate());
  for (auto bad : {&ModelParams::tau2, &ModelParams::sigma2}) {
    ModelParams Q;
    Q.*bad = 0.0;
    EXPECT_THROW(Q.validate(), InputError);
  }
  ModelParams Q;
  Q.p = 1.0;
  EXPECT_THROW(Q.validate(), InputError);
  Q = ModelParams{};
  Q.A = -0.1;
  EXPECT_THROW(Q.validate(), InputError);
  Q = ModelParams{};
  Q.N = 0;
  EXPECT_THROW(Q.validate(), InputError);
}

TEST(CoverLetter, Examples) {
  ModelParams P;
  EXPECT_EQ(cover_letter_quality(0, false, 0, P), 0.0);
  EXPECT_DOUBLE_EQ(cover_letter_quality(1.0, true, -0.3, P), 1.7);
  EXPECT_EQ(cover_letter_quality(0.5, true, 0, P.with_A(0.0)), 0.5);
  const auto d = make_draw(0.2, true, 0.1, P);
  EXPECT_EQ(d.h, d.q + 1.0 * P.A + d.nu);
}

TEST(AccessPosterior, Examples) {
  ModelParams P;
  EXPECT_NEAR(access_posterior(P.mu0 + P.A / 2, P), P.p, 1e-15);
  ModelParams Q{0.3, 2.0, 0.5, 0.2, 1.4, 3};
  EXPECT_NEAR(access_posterior(Q.mu0 + Q.A / 2, Q), Q.p, 1e-15);
  for (double h : {-3.0, 0.0, 5.0}) EXPECT_NEAR(access_posterior(h, Q.with_A(0.0)), Q.p, 1e-15);
  EXPECT_NEAR(access_posterior(2.0, P), 1.0 / (1.0 + std::exp(-0.75)), 1e-15);
  EXPECT_NEAR(access_posterior(2.0, P), 0.6791786991753931, 1e-15);
  EXPECT_NEAR(access_posterior(2.0, P), bayes_posterior(2.0, P), 1e-14);
}

TEST(AccessPosterior, MonotoneBoundedAndStable) {
  ModelParams P;
  double prev = -1.0;
  for (double h = -12.0; h <= 12.0; h += 0.01) {
    const double g = access_posterior(h, P);
    EXPECT_GE(g, 0.0);
    EXPECT_LE(g, 1.0);
    EXPECT_GT(g, prev);
    prev = g;
    EXPECT_NEAR(g, bayes_posterior(h, P), 1e-12);
  }
  for (double h : {-1e6, 1e6}) {
    EXPECT_TRUE(std::isfinite(access_posterior(h, P)));
    EXPECT_TRUE(std::isfinite(expected_productivity(h, P)));
  }
}

TEST(ExpectedProductivity, Examples) {
  ModelParams P;
  EXPECT_NEAR(expected_productivity(1.0, P.with_A(0.0)), 0.5, 1e-15);
  EXPECT_NEAR(expected_productivity(0.5, P), 0.0, 1e-15);
  EXPECT_NEAR(expected_productivity(2.0, P), 0.5 * (2.0 - 0.6791786991753931), 1e-15);
  EXPECT_NEAR(expected_productivity(2.0, P), 0.6604106504123035, 1e-15);
}

TEST(ExpectedProductivity, MeanShiftIdentity) {
  Rng rng = substream(3, "test_identity");
  std::uniform_real_distribution<double> U(0, 1);
  for (int s = 0; s < 50; ++s) {
    ModelParams P{-2 + 4 * U(rng), 0.2 + 3 * U(rng), 0.2 + 3 * U(rng), 0.05 + 0.9 * U(rng), 0.05 + 3 * U(rng), 3};
    for (double h = -6; h <= 6; h += 0.1) {
      const double d = expected_productivity(h, P) - expected_productivity(h, P.with_A(0.0));
      EXPECT_NEAR(d, -P.shrinkage() * P.A * bayes_posterior(h, P), 1e-12);
      EXPECT_LT(d, 0.0);
    }
  }
}

TEST(Slope, ExamplesAndFiniteDifferences) {
  ModelParams P;
  EXPECT_EQ(expected_productivity_slope(0.3, P.with_A(0.0)), P.shrinkage());
  // g = p = 1/2 at the midpoint: 0.5 * (1 - (1/2) * (1/4))
  EXPECT_NEAR(expected_productivity_slope(0.5, P), 0.4375, 1e-15);
  for (const ModelParams& Q : {P, ModelParams{1.0, 0.5, 2.0, 0.3, 2.5, 3}, ModelParams{-1, 3, 0.4, 0.8, 0.7, 2}}) {
    for (double h = -5; h <= 5; h += 0.05) {
      const double s = expected_productivity_slope(h, Q);
      const double fd = (expected_productivity(h + 1e-5, Q) - expected_productivity(h - 1e-5, Q)) / 2e-5;
      EXPECT_NEAR(s, fd, 1e-6);
      EXPECT_LT(s, Q.shrinkage());
    }
  }
}

TEST(Hiring, BinaryExamples) {
  ModelParams P;
  EXPECT_NEAR(hire_prob_binary(0.5, P), 0.5, 1e-15);
  EXPECT_NEAR(hire_prob_binary(0.0, P.with_A(0.0)), 0.5, 1e-15);
  EXPECT_NEAR(hire_prob_binary(2.0, P), 1.0 / (1.0 + std::exp(-0.6604106504123035)), 1e-15);
  EXPECT_NEAR(hire_prob_binary(2.0, P), 0.6593, 1e-4);
}

TEST(Hiring, ConditionalMultinomial) {
  ModelParams P;
  const std::vector<double> eq{0.5, 0.5, 0.5};
  for (double s : hire_prob_conditional(eq, P)) EXPECT_NEAR(s, 0.25, 1e-15);

  ModelParams one = P;
  one.N = 1;
  const std::vector<double> single{1.3};
  EXPECT_NEAR(hire_prob_conditional(single, one)[0], hire_prob_binary(1.3, one), 1e-15);

  const std::vector<double> h{2.0, 0.0, 0.0};
  const auto got = hire_prob_conditional(h, P);
  double denom = 1.0;
  std::vector<double> e;
  for (double x : h) {
    e.push_back(std::exp(expected_productivity(x, P)));
    denom += e.back();
  }
  double total = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    EXPECT_NEAR(got[i], e[i] / denom, 1e-12);
    total += got[i];
  }
  EXPECT_NEAR(total + 1.0 / denom, 1.0, 1e-12);
  EXPECT_LT(total, 1.0);

  const std::vector<double> wrong{1.0, 2.0};
  EXPECT_THROW(hire_prob_conditional(wrong, P), InputError);
}

TEST(Hiring, LogitSharesStableForLargeUtilities) {
  const std::vector<double> u{800.0, 0.0, -800.0};
  const auto s = logit_shares(u);
  EXPECT_NEAR(s[0], 1.0, 1e-15);
  for (double v : s) EXPECT_TRUE(std::isfinite(v));
}

TEST(RivalDensity, ExamplesAndMass) {
  ModelParams P;
  EXPECT_NEAR(rival_quality_density(0.0, P), 0.5 * normal_pdf(0, 0, 2) + 0.5 * normal_pdf(-1, 0, 2), 1e-15);
  EXPECT_NEAR(rival_quality_density(0.7, P.with_A(0.0)), normal_pdf(0.7, 0, 2), 1e-15);
  const double sd = std::sqrt(P.letter_variance());
  const double lo = -10 * sd, hi = 10 * sd + P.A;
  const int n = 20000;
  double mass = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    mass += w * rival_quality_density(lo + (hi - lo) * i / n, P);
  }
  EXPECT_NEAR(mass * (hi - lo) / n, 1.0, 1e-4);
}

TEST(Quadrature, IntegratesPolynomialMoments) {
  const auto rule = gauss_hermite_normal(32);
  double m0 = 0, m2 = 0, m4 = 0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    m0 += rule.w[i];
    m2 += rule.w[i] * std::pow(rule.x[i], 2);
    m4 += rule.w[i] * std::pow(rule.x[i], 4);
  }
  EXPECT_NEAR(m0, 1.0, 1e-13);
  EXPECT_NEAR(m2, 1.0, 1e-12);
  EXPECT_NEAR(m4, 3.0, 1e-11);
}

TEST(Integration, ConfigValidation) {
  ModelParams P;
  EXPECT_THROW(HiringIntegrator(P, mc(999)), InputError);
  EXPECT_THROW(HiringIntegrator(P, gh(15)), InputError);
  EXPECT_THROW(parse_integration_method("simpson"), InputError);
  EXPECT_THROW(hire_prob_given_q(0.0, true, 0.5, P, gh(16)), InputError);
}

TEST(Integration, SingleApplicantIsBinary) {
  ModelParams P;
  P.N = 1;
  for (double h : {-2.0, 0.0, 1.5}) {
    EXPECT_EQ(hire_prob_ex_ante(h, P, mc(1000)), hire_prob_binary(h, P));
    EXPECT_EQ(hire_prob_ex_ante(h, P, gh(16)), hire_prob_binary(h, P));
  }
}

TEST(Integration, QuadratureMatchesMonteCarlo) {
  ModelParams P;
  HiringIntegrator q(P, gh(64)), m(P, mc(200000, 9));
  for (double h = -4; h <= 4; h += 0.5) {
    for (auto r : {Regime::pre, Regime::post}) {
      const auto a = q.ex_ante(h, r), b = m.ex_ante(h, r);
      EXPECT_LT(std::abs(a.value - b.value), 4 * b.se + 1e-4) << "h=" << h;
    }
  }
  for (double x = -3; x <= 3; x += 1) {
    for (bool rho : {false, true}) {
      const auto a = q.given_q(x, rho, Regime::post), b = m.given_q(x, rho, Regime::post);
      EXPECT_LT(std::abs(a.value - b.value), 4 * b.se + 1e-4);
    }
  }
}

TEST(Integration, ExAnteIsIncreasingInH) {
  ModelParams P;
  HiringIntegrator q(P, gh(32));
  for (auto r : {Regime::pre, Regime::post}) {
    double prev = 0.0;
    for (double h = -4; h <= 4; h += 0.1) {
      const double v = q.ex_ante(h, r).value;
      EXPECT_GT(v, prev);
      EXPECT_LT(v, 1.0);
      prev = v;
    }
  }
}

TEST(Integration, NullToolLeavesAccessIrrelevant) {
  ModelParams P = ModelParams{}.with_A(0.0);
  HiringIntegrator q(P, gh(32));
  for (double x : {-2.0, 0.0, 2.0}) {
    EXPECT_EQ(q.given_q(x, true, Regime::post).value, q.given_q(x, false, Regime::post).value);
    EXPECT_EQ(q.given_q(x, true, Regime::pre).value, q.given_q(x, true, Regime::post).value);
  }
}

TEST(Integration, PooledCurveIsAccessMixture) {
  ModelParams P{0.2, 1.5, 0.8, 0.3, 1.2, 4};
  HiringIntegrator q(P, gh(32));
  for (double x : {-2.0, 0.0, 1.0}) {
    for (auto r : {Regime::pre, Regime::post}) {
      const double mix = P.p * q.given_q(x, true, r).value + (1 - P.p) * q.given_q(x, false, r).value;
      EXPECT_NEAR(q.ex_ante_given_q(x, r).value, mix, 1e-12);
    }
  }
  HiringIntegrator m(P, mc(20000, 4));
  const auto e = m.ex_ante_given_q(0.5, Regime::post);
  const double mix = P.p * m.given_q(0.5, true, Regime::post).value + (1 - P.p) * m.given_q(0.5, false, Regime::post).value;
  EXPECT_LT(std::abs(e.value - mix), 3 * e.se);
}

TEST(Integration, PairedChangesMatchDifferences) {
  ModelParams P;
  HiringIntegrator q(P, gh(32));
  for (double x : {-1.0, 1.0}) {
    EXPECT_NEAR(q.given_q_change(x, true).value,
                q.given_q(x, true, Regime::post).value - q.given_q(x, false, Regime::pre).value, 1e-12);
    EXPECT_NEAR(q.ex_ante_given_q_change(x).value,
                q.ex_ante_given_q(x, Regime::post).value - q.ex_ante_given_q(x, Regime::pre).value, 1e-12);
  }
}

TEST(Integration, ControlLossGrowsForHighProductivity) {
  ModelParams P;
  HiringIntegrator q(P, gh(32));
  double prev = 0.0;
  for (double x = 1.0; x <= 3.0; x += 0.1) {
    const double loss = q.given_q_change(x, false).value;
    EXPECT_LT(loss, 0.0);
    EXPECT_LT(loss, prev);
    prev = loss;
  }
}

TEST(Integration, DeterministicAndStreamKeyed) {
  ModelParams P;
  HiringIntegrator a(P, mc(5000, 42), 7), b(P, mc(5000, 42), 7), c(P, mc(5000, 42), 8);
  EXPECT_EQ(a.ex_ante(0.3, Regime::post).value, b.ex_ante(0.3, Regime::post).value);
  EXPECT_NE(a.ex_ante(0.3, Regime::post).value, c.ex_ante(0.3, Regime::post).value);
}

TEST(Integration, StandardErrorScalesWithDraws) {
  ModelParams P;
  auto spread = [&](int draws) {
    std::vector<double> v;
    for (std::uint64_t s = 0; s < 30; ++s) v.push_back(HiringIntegrator(P, mc(draws, 100 + s)).ex_ante(0.5, Regime::post).value);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (v.size() - 1));
  };
  const double ratio = spread(16000) / spread(4000);
  EXPECT_GT(ratio, 0.5 * 0.8);
  EXPECT_LT(ratio, 0.5 * 1.2);
}

TEST(Integration, StableFarInTheTails) {
  ModelParams P;
  HiringIntegrator q(P, gh(32)), m(P, mc(2000));
  for (double x : {-12.0, -6.0, 6.0, 12.0}) {
    for (const auto* integ : {&q, &m}) {
      for (auto r : {Regime::pre, Regime::post}) {
        for (double v : {integ->ex_ante(x, r).value, integ->given_q(x, true, r).value, integ->ex_ante_given_q(x, r).value}) {
          EXPECT_TRUE(std::isfinite(v));
          EXPECT_GE(v, 0.0);
          EXPECT_LE(v, 1.0);
        }
      }
    }
  }
}

TEST(Curves, GridParsing) {
  const auto g = GridSpec::parse("-1:1:0.5");
  EXPECT_EQ(g.points().size(), 5u);
  EXPECT_EQ(GridSpec::parse("0.25:0.25:1").points().size(), 1u);
  EXPECT_THROW(GridSpec::parse("1:0:0.1").points(), InputError);
  EXPECT_THROW(GridSpec::parse("0:1:0").points(), InputError);
  EXPECT_THROW(GridSpec::parse("0:1"), InputError);
  EXPECT_THROW(GridSpec::parse("a:1:0.1"), InputError);
}

TEST(Curves, NullToolGivesIdenticalColumnsAndCsvShape) {
  FigureOptions fo;
  fo.h_grid = GridSpec::parse("-1:1:1");
  fo.q_grid = GridSpec::parse("0:0:1");
  const auto fc = figure_curves(ModelParams{}.with_A(0.0), fo, mc(2000));
  for (const auto* t : {&fc.hire_by_letter, &fc.treated_by_q, &fc.control_by_q, &fc.ex_ante_by_q}) {
    for (const auto& r : t->rows) EXPECT_EQ(r.pre_value, r.post_value);
  }
  std::ostringstream os;
  write_curve_csv(os, {&fc.hire_by_letter});
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "axis,x,group,regime,value");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 6);
}

TEST(Curves, FlatterAtPriorMeanAndDeterministic) {
  FigureOptions fo;
  fo.h_grid = GridSpec::parse("-0.1:0.1:0.1");
  fo.q_grid = GridSpec::parse("0:0:1");
  const auto a = figure_curves(ModelParams{}, fo, mc(50000, 3));
  const auto b = figure_curves(ModelParams{}, fo, mc(50000, 3));
  const auto& r = a.hire_by_letter.rows;
  EXPECT_LT(r[2].post_value - r[0].post_value, r[2].pre_value - r[0].pre_value);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i].post_value, b.hire_by_letter.rows[i].post_value);
  fo.threads = 3;
  const auto c = figure_curves(ModelParams{}, fo, mc(50000, 3));
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i].post_value, c.hire_by_letter.rows[i].post_value);
}
