#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "signalmarket/econ/estimators.hpp"
#include "signalmarket/model/curves.hpp"
#include "signalmarket/model/integration.hpp"
#include "signalmarket/parallel.hpp"
#include "signalmarket/sim/market.hpp"
#include "signalmarket/sim/presets.hpp"
#include "signalmarket/text/score.hpp"

#ifndef SIGNALMARKET_DATA_DIR
#define SIGNALMARKET_DATA_DIR "data"
#endif

namespace signalmarket::validate {

using CliRunner = std::function<int(const std::vector<std::string>&, std::ostream&, std::ostream&)>;

struct CheckResult {
  int id = 0;
  std::string module;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string only;  // module name, empty for all
  std::string data_dir = SIGNALMARKET_DATA_DIR;
  CliRunner cli;     // needed by the determinism check
};

namespace detail {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void fail_if(bool bad, const std::string& what) {
    if (bad) {
      if (passed) detail << "FAILED: ";
      passed = false;
      detail << what << "; ";
    }
  }
};

inline std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw_input("cannot open ", p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline model::IntegrationConfig mc(int draws, std::uint64_t seed) {
  model::IntegrationConfig c;
  c.method = model::IntegrationMethod::monte_carlo;
  c.draws = draws;
  c.seed = seed;
  return c;
}

inline model::IntegrationConfig gh(int nodes) {
  model::IntegrationConfig c;
  c.method = model::IntegrationMethod::gauss_hermite;
  c.nodes = nodes;
  return c;
}

}  // namespace detail

// 1. Shapes of the three hiring figures at the default parameters, each
// pointwise claim with a margin above 3 Monte Carlo standard errors. Grid
// points use the same substreams as the curves command.
inline void check_figure_shapes(const AcceptanceOptions& o, detail::Outcome& out) {
  const model::ModelParams P = model::ModelParams::figure_defaults();
  const auto cfg = detail::mc(200000, o.seed);
  const auto hs = model::GridSpec{-3.0, 3.0, 0.05}.points();
  const auto qs = model::GridSpec{-3.0, 3.0, 0.05}.points();
  // The curves command indexes its h grid from -4, so h = -3 is index 20.
  const std::size_t h_index0 = 20;
  constexpr std::uint64_t q_offset = 1ULL << 32;
  const std::size_t q_index0 = 0;

  std::vector<model::Estimate> slope(hs.size()), treated(qs.size()), control(qs.size()), pooled(qs.size());
  parallel_for(hs.size(), o.threads, [&](std::size_t i) {
    model::HiringIntegrator integ(P, cfg, h_index0 + i);
    slope[i] = integ.ex_ante_slope_change(hs[i], 0.01);
  });
  parallel_for(qs.size(), o.threads, [&](std::size_t i) {
    model::HiringIntegrator integ(P, cfg, q_offset + q_index0 + i);
    treated[i] = integ.given_q_change(qs[i], true);
    control[i] = integ.given_q_change(qs[i], false);
    pooled[i] = integ.ex_ante_given_q_change(qs[i]);
  });

  double worst5 = 1e300, worst6t = 1e300, worst6c = 1e300;
  for (const auto& e : slope) worst5 = std::min(worst5, -e.value / e.se);
  for (const auto& e : treated) worst6t = std::min(worst6t, e.value / e.se);
  for (const auto& e : control) worst6c = std::min(worst6c, -e.value / e.se);
  out.fail_if(!(worst5 > 3.0), "post slope not below pre slope by 3 SE somewhere on [-3,3]");
  out.fail_if(!(worst6t > 3.0), "treated gain not positive by 3 SE somewhere");
  out.fail_if(!(worst6c > 3.0), "control loss not negative by 3 SE somewhere");

  // Single sign change: every point that is significant at 3 SE lies on the
  // correct side of the crossing, and the raw signs change exactly once.
  int changes = 0;
  double crossing = std::nan("");
  for (std::size_t i = 1; i < qs.size(); ++i) {
    if ((pooled[i].value > 0) != (pooled[i - 1].value > 0)) {
      ++changes;
      crossing = 0.5 * (qs[i] + qs[i - 1]);
    }
  }
  bool ordered = true;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const double t = pooled[i].value / pooled[i].se;
    if (t > 3.0 && qs[i] > crossing) ordered = false;
    if (t < -3.0 && qs[i] < crossing) ordered = false;
  }
  auto at = [&](double q) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
      if (std::abs(qs[i] - q) < std::abs(qs[best] - q)) best = i;
    }
    return pooled[best];
  };
  const auto lo = at(-2.0), hi = at(2.0);
  out.fail_if(changes != 1 || !ordered, "pooled post-pre difference changes sign " + std::to_string(changes) + " times");
  out.fail_if(!(lo.value > 3.0 * lo.se), "pooled difference at q=-2 not positive by 3 SE");
  out.fail_if(!(hi.value < -3.0 * hi.se), "pooled difference at q=+2 not negative by 3 SE");
  out.detail << "min t: flattening " << detail::fmt(worst5) << ", treated gain " << detail::fmt(worst6t)
             << ", control loss " << detail::fmt(worst6c) << "; crossing at q=" << detail::fmt(crossing)
             << "; diff(q=-2)=" << detail::fmt(lo.value) << ", diff(q=2)=" << detail::fmt(hi.value);
}

// 2. Closed-form posterior identities on random parameter sets.
inline void check_analytic_identities(const AcceptanceOptions& o, detail::Outcome& out) {
  Rng rng = substream(o.seed, "acceptance_identities");
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst_identity = 0.0, worst_fd = 0.0;
  long bound_violations = 0, strict_violations = 0, sign_violations = 0;
  for (int set = 0; set < 20; ++set) {
    model::ModelParams P;
    P.mu0 = -2.0 + 4.0 * U(rng);
    P.tau2 = 0.3 + 2.7 * U(rng);
    P.sigma2 = std::max(0.5 - P.tau2, 0.0) + 0.2 + 2.8 * U(rng);
    P.p = 0.1 + 0.8 * U(rng);
    P.A = 0.1 + 1.9 * U(rng);
    P.validate();
    const double V = P.letter_variance(), k = P.shrinkage(), sd = std::sqrt(V);
    const model::ModelParams P0 = P.with_A(0.0);
    const double lo = P.mu0 - 3.0 * sd, hi = P.mu0 + P.A + 3.0 * sd;
    for (int i = 0; i < 1000; ++i) {
      const double h = lo + (hi - lo) * i / 999.0;
      // posterior weight from the two component densities directly
      const double f1 = P.p * model::normal_pdf(h, P.mu0 + P.A, V);
      const double f0 = (1.0 - P.p) * model::normal_pdf(h, P.mu0, V);
      const double g = f1 / (f0 + f1);
      const double diff = model::expected_productivity(h, P) - model::expected_productivity(h, P0);
      worst_identity = std::max(worst_identity, std::abs(diff - (-k * P.A * g)));
      if (!(diff < 0.0)) ++sign_violations;
      const double s = model::expected_productivity_slope(h, P);
      if (s > k) ++bound_violations;
      if (!(s < k)) ++strict_violations;
      if (model::expected_productivity_slope(h, P0) != k) ++bound_violations;
      const double step = 1e-5;
      const double fd =
          (model::expected_productivity(h + step, P) - model::expected_productivity(h - step, P)) / (2.0 * step);
      worst_fd = std::max(worst_fd, std::abs(fd - s));
    }
  }
  out.fail_if(!(worst_identity <= 1e-12), "mean shift differs from -kappa A g(h) by " + detail::fmt(worst_identity));
  out.fail_if(sign_violations > 0, std::to_string(sign_violations) + " points with a non-negative mean shift");
  out.fail_if(bound_violations > 0, std::to_string(bound_violations) + " slope bound violations");
  out.fail_if(strict_violations > 0, std::to_string(strict_violations) + " points where slope is not below kappa");
  out.fail_if(!(worst_fd <= 1e-6), "slope differs from finite differences by " + detail::fmt(worst_fd));
  out.detail << "20 sets x 1000 h: max identity error " << detail::fmt(worst_identity, 3)
             << ", max slope vs finite difference " << detail::fmt(worst_fd, 3);
}

// 3. Quadrature against Monte Carlo for the ex-ante hiring probability.
inline void check_integration(const AcceptanceOptions& o, detail::Outcome& out) {
  const model::ModelParams P = model::ModelParams::figure_defaults();
  const auto hs = model::GridSpec{-4.0, 4.0, 0.05}.points();
  const model::HiringIntegrator quad(P, detail::gh(64));
  const model::HiringIntegrator sim(P, detail::mc(1000000, o.seed), 0xACCE55ULL);
  double worst = 0.0, worst_h = 0.0;
  for (double h : hs) {
    for (auto r : {model::Regime::pre, model::Regime::post}) {
      const double d = std::abs(quad.ex_ante(h, r).value - sim.ex_ante(h, r).value);
      if (d > worst) {
        worst = d;
        worst_h = h;
      }
    }
  }
  out.fail_if(!(worst <= 2e-3), "largest gap " + detail::fmt(worst) + " exceeds 2e-3");
  out.detail << hs.size() << " h points, both regimes: max |GH - MC| = " << detail::fmt(worst, 3) << " at h="
             << detail::fmt(worst_h);
}

// 4. The treated gain falls in q beyond its peak.
inline void check_claim_decreasing_gain(const AcceptanceOptions&, detail::Outcome& out) {
  const model::ModelParams P = model::ModelParams::figure_defaults();
  const model::HiringIntegrator quad(P, detail::gh(64));
  const auto qs = model::GridSpec{-3.0, 3.0, 0.02}.points();
  std::vector<double> gain(qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) gain[i] = quad.given_q_change(qs[i], true).value;
  std::size_t peak = 0;
  for (std::size_t i = 1; i < qs.size(); ++i) {
    if (gain[i] > gain[peak]) peak = i;
  }
  std::size_t bad = 0;
  for (std::size_t i = peak + 1; i < qs.size(); ++i) {
    if (!(gain[i] < gain[i - 1])) ++bad;
  }
  out.fail_if(bad > 0, std::to_string(bad) + " grid steps beyond the peak where the gain does not fall");
  out.fail_if(peak + 1 >= qs.size(), "gain peaks at the end of the grid");
  out.detail << "q_hat = " << detail::fmt(qs[peak]) << " (gain " << detail::fmt(gain[peak]) << "), strictly decreasing on ["
             << detail::fmt(qs[peak]) << ", 3] over " << (qs.size() - 1 - peak) << " steps; gain(3) = "
             << detail::fmt(gain.back());
}

// 5. Recovery of the per-use effect and the GPT-control bias.
inline void check_recovery(const AcceptanceOptions& o, detail::Outcome& out) {
  sim::SimConfig c = sim::preset("recovery");
  c.seed = o.seed;
  const auto ds = sim::generate_market(c, {}, o.threads);
  econ::EstimatorOptions eo;
  eo.timing = {c.gpt_period, c.tool_period, 1};
  const auto f = econ::frame_from_bids(ds.bids, eo.timing);
  const auto itt = econ::did_itt(f, eo);
  const auto lt = econ::late(f, eo);
  econ::EstimatorOptions nog = eo;
  nog.gpt_control = false;
  const auto itt0 = econ::did_itt(f, nog);

  const double b_late = lt.b("used_ai"), s_late = lt.s("used_ai");
  const double b_itt = itt.b(econ::kItt), s_itt = itt.s(econ::kItt);
  const double b0 = itt0.b(econ::kItt), s0 = itt0.s(econ::kItt);
  const double expected0 = ds.truth.itt + ds.truth.predicted_no_gpt_bias;
  out.fail_if(std::abs(b_late - ds.truth.late) > 2.0 * s_late, "LATE misses the true per-use effect");
  out.fail_if(std::abs(b_itt - c.compliance * b_late) > 2.0 * s_itt, "ITT differs from compliance x LATE");
  out.fail_if(std::abs(b0 - expected0) > 2.0 * s0, "ITT without the GPT control misses the predicted bias");
  out.detail << "LATE " << detail::fmt(b_late) << " (" << detail::fmt(s_late, 3) << ") vs " << detail::fmt(ds.truth.late)
             << "; ITT " << detail::fmt(b_itt) << " (" << detail::fmt(s_itt, 3) << ") vs " << detail::fmt(c.compliance * b_late)
             << "; no-GPT ITT " << detail::fmt(b0) << " (" << detail::fmt(s0, 3) << ") vs " << detail::fmt(expected0)
             << " = truth " << detail::fmt(ds.truth.itt) << " + bias " << detail::fmt(ds.truth.predicted_no_gpt_bias)
             << "; first-stage F " << detail::fmt(*lt.first_stage_F);
}

// 6. Coverage of the ITT confidence interval under the null.
inline void check_size(const AcceptanceOptions& o, detail::Outcome& out) {
  const int reps = 200;
  std::vector<int> covered(reps, 0);
  parallel_for(reps, o.threads, [&](std::size_t r) {
    sim::SimConfig c = sim::preset("null");
    c.seed = splitmix64(o.seed ^ 0x5151ULL) + r;
    const auto ds = sim::generate_market(c);
    econ::EstimatorOptions eo;
    eo.timing = {c.gpt_period, c.tool_period, 1};
    const auto fit = econ::did_itt(econ::frame_from_bids(ds.bids, eo.timing), eo);
    const double crit = econ::t_critical(fit.n_clusters);
    covered[r] = std::abs(fit.b(econ::kItt)) <= crit * fit.s(econ::kItt) ? 1 : 0;
  });
  int hits = 0;
  for (int v : covered) hits += v;
  const double rate = 100.0 * hits / reps;
  out.fail_if(rate < 93.0 || rate > 97.0, "coverage outside [93%, 97%]");
  out.detail << hits << "/" << reps << " intervals cover zero (" << detail::fmt(rate, 3) << "%)";
}

// 7. Within transform plus OLS against explicit dummy variables.
inline void check_fwl(const AcceptanceOptions& o, detail::Outcome& out) {
  Rng rng = substream(o.seed, "acceptance_fwl");
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> Z(0.0, 1.0);
  double worst = 0.0;
  int max_rows = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const int W = 10 + static_cast<int>(U(rng) * 60);
    const int T = 3 + static_cast<int>(U(rng) * 10);
    const int n = std::min(2000, 100 + static_cast<int>(U(rng) * 1900));
    max_rows = std::max(max_rows, n);
    econ::PanelFrame f;
    f.n = static_cast<std::size_t>(n);
    std::vector<int> w(n), t(n);
    std::vector<double> x1(n), x2(n), x3(n), y(n);
    std::vector<double> alpha(W), gamma(T);
    for (auto& a : alpha) a = Z(rng);
    for (auto& g : gamma) g = Z(rng);
    for (int i = 0; i < n; ++i) {
      // skewed worker draw makes the panel unbalanced
      w[i] = static_cast<int>(W * std::pow(U(rng), 1.7));
      t[i] = static_cast<int>(U(rng) * T);
      x1[i] = Z(rng) + 0.5 * alpha[w[i]];
      x2[i] = (w[i] % 2) * (t[i] >= T / 2 ? 1.0 : 0.0);
      x3[i] = U(rng) + 0.3 * gamma[t[i]];
      y[i] = 0.7 * x1[i] - 0.4 * x2[i] + 1.3 * x3[i] + alpha[w[i]] + gamma[t[i]] + Z(rng);
    }
    f.add("y", y);
    f.add("x1", x1);
    f.add("x2", x2);
    f.add("x3", x3);
    f.ids["worker"] = w;
    f.ids["period"] = t;
    econ::RegressionSpec s;
    s.outcome = "y";
    s.regressors = {"x1", "x2", "x3"};
    s.fe_dims = {"worker", "period"};
    const auto r = econ::fit(f, s);

    // dense design: regressors, every worker dummy, period dummies but the first
    std::vector<int> wl, tl;
    for (int i = 0; i < n; ++i) {
      wl.push_back(w[i]);
      tl.push_back(t[i]);
    }
    std::sort(wl.begin(), wl.end());
    wl.erase(std::unique(wl.begin(), wl.end()), wl.end());
    std::sort(tl.begin(), tl.end());
    tl.erase(std::unique(tl.begin(), tl.end()), tl.end());
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, 3 + wl.size() + tl.size() - 1);
    Eigen::VectorXd Y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = x1[i];
      X(i, 1) = x2[i];
      X(i, 2) = x3[i];
      X(i, 3 + (std::lower_bound(wl.begin(), wl.end(), w[i]) - wl.begin())) = 1.0;
      const auto tp = std::lower_bound(tl.begin(), tl.end(), t[i]) - tl.begin();
      if (tp > 0) X(i, 3 + wl.size() + tp - 1) = 1.0;
      Y(i) = y[i];
    }
    const Eigen::VectorXd b = X.colPivHouseholderQr().solve(Y);
    for (int k = 0; k < 3; ++k) {
      const std::string name = s.regressors[k];
      worst = std::max(worst, std::abs(r.b(name) - b(k)));
    }
  }
  out.fail_if(!(worst <= 1e-8), "largest coefficient gap " + detail::fmt(worst) + " exceeds 1e-8");
  out.detail << "50 panels (up to " << max_rows << " rows): max |within - dummies| = " << detail::fmt(worst, 3);
}

// 8. Letters lose and reviews gain predictive power for callbacks once
// employers discount tool-written letters.
inline void check_signal_power(const AcceptanceOptions& o, detail::Outcome& out) {
  sim::SimConfig c = sim::preset("belief_switch");
  c.seed = o.seed;
  const auto ds = sim::generate_market(c, {}, o.threads);
  econ::EstimatorOptions eo;
  eo.timing = {c.gpt_period, c.tool_period, 1};
  const auto f = econ::frame_from_bids(ds.bids, eo.timing);
  const auto tail = econ::signal_power(f, econ::SignalVar::tailoring, econ::SignalOutcome::callback, false, eo);
  const auto rank = econ::signal_power(f, econ::SignalVar::rank_pct, econ::SignalOutcome::callback, false, eo);
  const double bt = tail.fit.b(tail.interaction), st = tail.fit.s(tail.interaction);
  const double br = rank.fit.b(rank.interaction), sr = rank.fit.s(rank.interaction);
  out.fail_if(!(bt < -2.0 * st), "PostAI x tailoring is not negative at 2 SE");
  out.fail_if(!(br > 2.0 * sr), "PostAI x rank_pct is not positive at 2 SE");
  out.detail << "callbacks: PostAI x tailoring " << detail::fmt(bt) << " (" << detail::fmt(st, 3) << ", t="
             << detail::fmt(bt / st, 3) << "), PostAI x rank_pct " << detail::fmt(br) << " (" << detail::fmt(sr, 3)
             << ", t=" << detail::fmt(br / sr, 3) << ")";
}

// 9. Smaller gains for workers who already wrote tailored letters.
inline void check_heterogeneity(const AcceptanceOptions& o, detail::Outcome& out) {
  sim::SimConfig c = sim::preset("ceiling");
  c.seed = o.seed;
  const auto ds = sim::generate_market(c, {}, o.threads);
  econ::EstimatorOptions eo;
  eo.timing = {c.gpt_period, c.tool_period, 1};
  const auto r = econ::heterogeneity(econ::frame_from_bids(ds.bids, eo.timing), eo);
  const double b = r.fit.b(econ::kTriple), s = r.fit.s(econ::kTriple);
  out.fail_if(!(b < -2.0 * s), "triple interaction is not negative at 2 SE");
  out.detail << "PostAI x Access x pre_ability " << detail::fmt(b) << " (" << detail::fmt(s, 3) << ", t="
             << detail::fmt(b / s, 3) << "), " << r.workers_excluded << " workers without pre-rollout bids";
}

// 10. Golden scores, the four-proposal ranking and the score invariants.
inline void check_tfidf(const AcceptanceOptions& o, detail::Outcome& out) {
  namespace fs = std::filesystem;
  const fs::path demo = fs::path(o.data_dir) / "demo";
  std::ifstream jin(demo / "jobs.tsv", std::ios::binary), lin(demo / "letters.tsv", std::ios::binary);
  if (!jin || !lin) throw_input("demo corpus missing under ", demo.string());
  const auto jobs = text::read_jobs_tsv(jin);
  const auto letters = text::read_letters_tsv(lin);
  const auto res = text::score_dataset(jobs, letters, text::ModelScope::global);
  std::ostringstream got;
  text::write_scores_csv(got, res.rows);
  const std::string expected = detail::read_file(demo / "expected_scores.csv");
  out.fail_if(got.str() != expected || !res.errors.empty(), "demo scores differ from the golden file");

  const fs::path rp = fs::path(o.data_dir) / "ranked_proposals";
  const auto& stop = text::default_stopwords();
  std::vector<text::Document> docs{text::preprocess("job", detail::read_file(rp / "job.txt"), stop)};
  for (int i = 1; i <= 4; ++i) {
    const std::string name = "proposal" + std::to_string(i);
    docs.push_back(text::preprocess(name, detail::read_file(rp / (name + ".txt")), stop));
  }
  const auto model = text::fit_tfidf(docs);
  double sc[4];
  for (int i = 0; i < 4; ++i) sc[i] = text::tailoring_score(model, docs[0], docs[i + 1]);
  out.fail_if(!(sc[0] > sc[1] && sc[1] > sc[2] && sc[2] > sc[3]), "four-proposal ranking not reproduced");

  // invariants on the demo letters: token shuffles, self-concatenation, range
  Rng rng = substream(o.seed, "acceptance_tfidf");
  int bad = 0, checked = 0;
  for (const auto& l : letters) {
    const auto& job = *std::find_if(jobs.begin(), jobs.end(), [&](const auto& j) { return j.doc_id == l.job_id; });
    const auto jd = text::preprocess(job.text), ld = text::preprocess(l.text);
    std::vector<const text::Document*> corpus{&jd, &ld};
    const auto m = text::fit_tfidf(corpus);
    const double base = text::tailoring_score(m, jd, ld);
    text::Document shuffled = ld;
    std::shuffle(shuffled.tokens.begin(), shuffled.tokens.end(), rng);
    text::Document doubled = ld;
    doubled.tokens.insert(doubled.tokens.end(), ld.tokens.begin(), ld.tokens.end());
    for (double v : {text::tailoring_score(m, jd, shuffled), text::tailoring_score(m, jd, doubled)}) {
      ++checked;
      if (std::abs(v - base) > 1e-12) ++bad;
    }
    ++checked;
    if (!(base >= 0.0 && base <= 1.0)) ++bad;
  }
  out.fail_if(bad > 0, std::to_string(bad) + " invariant violations");
  out.detail << "golden " << (got.str() == expected ? "identical" : "DIFFERENT") << " (" << res.rows.size()
             << " rows); reference proposals score " << detail::fmt(sc[0], 3) << " > " << detail::fmt(sc[1], 3) << " > "
             << detail::fmt(sc[2], 3) << " > " << detail::fmt(sc[3], 3) << "; " << checked << " invariant checks";
}

// 11. Exact decomposition of the DiD estimand and negative spillovers.
inline void check_decomposition(const AcceptanceOptions& o, detail::Outcome& out) {
  sim::SimConfig c;
  c.seed = o.seed;
  const auto d = sim::decompose_estimand(c, o.threads);
  const double sum = d.direct.value + d.spillover.value + d.market_shift.value;
  out.fail_if(std::abs(d.total.value - sum) > 3.0 * d.combined_se, "terms do not add up to the total");
  out.detail << "default: total " << detail::fmt(d.total.value) << " = direct " << detail::fmt(d.direct.value)
             << " + spillover " << detail::fmt(d.spillover.value) << " + market " << detail::fmt(d.market_shift.value)
             << " (gap " << detail::fmt(std::abs(d.total.value - sum), 2) << ", 3 SE = "
             << detail::fmt(3.0 * d.combined_se, 2) << "); spillover by compliance:";
  for (double comp : {0.2, 0.5, 1.0}) {
    sim::SimConfig k;
    k.seed = o.seed;
    k.compliance = comp;
    k.market_shift = 0.0;
    const auto dk = sim::decompose_estimand(k, o.threads);
    out.fail_if(!(dk.spillover.value <= 0.0), "spillover positive at compliance " + detail::fmt(comp));
    out.detail << " " << detail::fmt(comp, 2) << ": " << detail::fmt(dk.spillover.value, 3) << " ("
               << detail::fmt(dk.spillover.se, 2) << ")";
  }
}

// 12. Every subcommand twice with the same flags gives identical files.
inline void check_determinism(const AcceptanceOptions& o, detail::Outcome& out) {
  namespace fs = std::filesystem;
  if (!o.cli) throw_input("determinism check needs a command runner");
  std::random_device rd;
  const fs::path root = fs::temp_directory_path() / ("signalmarket_determinism_" + std::to_string(rd()));
  fs::create_directories(root);
  const std::string demo = (fs::path(o.data_dir) / "demo").string();
  const std::string seed = std::to_string(o.seed);
  const std::string panel = (root / "panel" / "bids.csv").string();
  std::ostringstream sink;
  if (o.cli({"simulate", "--workers", "300", "--jobs", "900", "--seed", seed, "--out", (root / "panel").string()},
            sink, sink) != 0) {
    fs::remove_all(root);
    throw_input("could not build the estimation panel: ", sink.str());
  }

  const std::vector<std::vector<std::string>> runs = {
      {"curves", "--h-grid", "-1:1:0.5", "--q-grid", "-1:1:0.5", "--draws", "2000", "--seed", seed},
      {"curves", "--method", "gauss_hermite", "--nodes", "16", "--h-grid", "-1:1:1", "--q-grid", "0:1:1"},
      {"simulate", "--workers", "100", "--jobs", "50", "--seed", seed},
      {"decompose", "--workers", "200", "--jobs", "300", "--seed", seed},
      {"score", "--jobs", demo + "/jobs.tsv", "--letters", demo + "/letters.tsv"},
      {"estimate", "itt", "--bids", panel},
      {"estimate", "late", "--bids", panel},
      {"estimate", "event", "--bids", panel},
      {"estimate", "heterogeneity", "--bids", panel},
      {"estimate", "signal-power", "--regressor", "tailoring", "--outcome", "callback", "--bids", panel},
      {"estimate", "editing", "--bids", panel},
      {"summarize", "--bids", panel},
      {"validate", "--only", "textsim"},
  };
  int identical = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::string label;
    for (const auto& a : runs[r]) label += (label.empty() ? "" : " ") + a;
    fs::path dirs[2];
    bool ok = true;
    for (int k = 0; k < 2; ++k) {
      dirs[k] = root / ("run" + std::to_string(r) + "_" + std::to_string(k));
      auto args = runs[r];
      args.push_back("--out");
      args.push_back(dirs[k].string());
      std::ostringstream so, se;
      const int code = o.cli(args, so, se);
      if (code != 0) {
        out.fail_if(true, "'" + label + "' exited with " + std::to_string(code) + ": " + se.str());
        ok = false;
      }
    }
    if (!ok) continue;
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dirs[0])) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    std::vector<std::string> names_b;
    for (const auto& e : fs::directory_iterator(dirs[1])) names_b.push_back(e.path().filename().string());
    std::sort(names_b.begin(), names_b.end());
    bool same = names == names_b;
    for (const auto& n : names) {
      if (!same) break;
      std::string a = detail::read_file(dirs[0] / n), b = detail::read_file(dirs[1] / n);
      if (n == "run.json") {
        // wall-clock time is the only field allowed to differ
        auto ja = nlohmann::ordered_json::parse(a), jb = nlohmann::ordered_json::parse(b);
        ja.erase("duration_seconds");
        jb.erase("duration_seconds");
        a = ja.dump();
        b = jb.dump();
      }
      if (a != b) same = false;
    }
    out.fail_if(!same, "'" + label + "' output differs between runs");
    if (same) ++identical;
  }
  fs::remove_all(root);
  out.detail << identical << "/" << runs.size() << " invocations byte-identical across two runs (run.json compared without duration)";
}

struct CheckSpec {
  int id;
  const char* module;
  const char* title;
  void (*run)(const AcceptanceOptions&, detail::Outcome&);
};

inline const std::vector<CheckSpec>& checks() {
  static const std::vector<CheckSpec> all = {
      {1, "model-core", "figure curve shapes", check_figure_shapes},
      {2, "model-core", "posterior identities", check_analytic_identities},
      {3, "model-core", "quadrature vs Monte Carlo", check_integration},
      {4, "model-core", "treated gain decreasing beyond q_hat", check_claim_decreasing_gain},
      {5, "econometrics", "estimator recovery", check_recovery},
      {6, "econometrics", "placebo size control", check_size},
      {7, "econometrics", "within vs dummy-variable OLS", check_fwl},
      {8, "econometrics", "signal power direction", check_signal_power},
      {9, "econometrics", "heterogeneity direction", check_heterogeneity},
      {10, "textsim", "TF-IDF golden file, ranking, invariants", check_tfidf},
      {11, "market-sim", "estimand decomposition", check_decomposition},
      {12, "cli", "determinism of every subcommand", check_determinism},
  };
  return all;
}

inline std::vector<CheckResult> run_acceptance(const AcceptanceOptions& o, std::ostream* timing = nullptr) {
  std::vector<CheckResult> results;
  for (const auto& c : checks()) {
    if (!o.only.empty() && o.only != c.module) continue;
    CheckResult r{c.id, c.module, c.title, false, "", 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    detail::Outcome out;
    try {
      c.run(o, out);
      r.passed = out.passed;
      r.detail = out.detail.str();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (timing) {
      *timing << "[" << c.id << "] " << c.title << ": " << std::fixed << std::setprecision(2) << r.seconds << " s"
              << std::defaultfloat << '\n';
    }
    results.push_back(std::move(r));
  }
  return results;
}

inline std::string format_line(const CheckResult& r) {
  std::ostringstream os;
  os << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.module << ": " << r.title << " | " << r.detail;
  return os.str();
}

inline std::string format_report(const std::vector<CheckResult>& results) {
  std::string s;
  for (const auto& r : results) s += format_line(r) + "\n";
  return s;
}

inline bool all_passed(const std::vector<CheckResult>& results) {
  for (const auto& r : results) {
    if (!r.passed) return false;
  }
  return !results.empty();
}

}  // namespace signalmarket::validate
