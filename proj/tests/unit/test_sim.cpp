#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "signalmarket/sim/io.hpp"
#include "signalmarket/sim/market.hpp"
#include "signalmarket/sim/presets.hpp"
#include "signalmarket/sim/summary.hpp"

using namespace signalmarket;
using namespace signalmarket::sim;

namespace {

std::string bids_text(const Dataset& ds) {
  std::ostringstream os;
  write_bids_csv(os, ds.bids);
  return os.str();
}

struct GroupDiff {
  double diff = 0.0;
  double se = 0.0;
};

// Difference in worker-level means (access minus no access), SE from the two
// worker samples.
GroupDiff worker_gap(const std::map<int, std::pair<bool, double>>& per_worker) {
  double s[2] = {0, 0}, ss[2] = {0, 0};
  int n[2] = {0, 0};
  for (const auto& [id, v] : per_worker) {
    const int g = v.first ? 1 : 0;
    s[g] += v.second;
    ss[g] += v.second * v.second;
    ++n[g];
  }
  GroupDiff out;
  double var = 0.0;
  for (int g = 0; g < 2; ++g) {
    const double m = s[g] / n[g];
    var += (ss[g] / n[g] - m * m) / (n[g] - 1);
  }
  out.diff = s[1] / n[1] - s[0] / n[0];
  out.se = std::sqrt(var);
  return out;
}

Dataset identical_letters(double h_first, double h_rest, int n_jobs) {
  SimConfig cfg;
  cfg.applicants_per_job = 3;
  cfg.n_workers = 10;
  Dataset ds;
  ds.config = cfg;
  ds.bids.resize(static_cast<std::size_t>(n_jobs) * 3);
  ds.latent.resize(ds.bids.size());
  ds.offer_u.resize(n_jobs);
  Rng rng = substream(5, "test_offers");
  for (int j = 0; j < n_jobs; ++j) {
    ds.offer_u[j] = uniform01(rng);
    for (int k = 0; k < 3; ++k) {
      auto& b = ds.bids[j * 3 + k];
      b.job_id = j;
      b.worker_id = k;
      b.period = 0;
      b.tailoring = k == 0 ? h_first : h_rest;
      ds.latent[j * 3 + k].u_callback = uniform01(rng);
    }
  }
  return ds;
}

}  // namespace

TEST(SimConfig, Validation) {
  SimConfig c;
  EXPECT_NO_THROW(c.validate());
  c.applicants_per_job = 10;
  c.n_workers = 5;
  EXPECT_THROW(generate_market(c), InputError);
  c = SimConfig{};
  c.gpt_period = c.tool_period;
  EXPECT_THROW(c.validate(), InputError);
  c = SimConfig{};
  c.compliance = 1.5;
  EXPECT_THROW(c.validate(), InputError);
  c = SimConfig{};
  c.access_share = 0.0;
  EXPECT_THROW(c.validate(), InputError);
}

TEST(Presets, KnownAndUnknown) {
  for (const auto& n : preset_names()) EXPECT_NO_THROW(preset(n).validate());
  EXPECT_EQ(preset("null").model.A, 0.0);
  try {
    preset("nope");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("belief_switch"), std::string::npos);
  }
}

TEST(Market, DeterministicAcrossRunsAndThreads) {
  SimConfig c;
  c.n_workers = 300;
  c.n_jobs = 600;
  c.seed = 11;
  const auto a = generate_market(c, {}, 1);
  const auto b = generate_market(c, {}, 1);
  const auto t = generate_market(c, {}, 3);
  EXPECT_EQ(bids_text(a), bids_text(b));
  EXPECT_EQ(bids_text(a), bids_text(t));
  c.seed = 12;
  EXPECT_NE(bids_text(a), bids_text(generate_market(c)));
}

TEST(Market, StructuralInvariants) {
  SimConfig c;
  c.n_workers = 400;
  c.n_jobs = 1000;
  c.compliance = 0.6;
  const auto ds = generate_market(c);
  const int K = ds.applicants();
  long callbacks = 0, offers = 0;
  for (std::size_t j = 0; j < ds.n_jobs(); ++j) {
    int job_offers = 0;
    std::set<int> workers;
    for (int k = 0; k < K; ++k) {
      const auto& b = ds.bids[j * K + k];
      EXPECT_EQ(b.job_id, static_cast<int>(j));
      ASSERT_GE(b.worker_id, 0);
      ASSERT_LT(b.worker_id, c.n_workers);
      workers.insert(b.worker_id);
      EXPECT_EQ(b.access, ds.workers[b.worker_id].access);
      if (b.used_ai) {
        EXPECT_TRUE(b.access);
        EXPECT_GE(b.period, c.tool_period);
      }
      if (!b.used_ai) EXPECT_EQ(b.edit_minutes, 0.0);
      EXPECT_GE(b.rank_pct, 0.0);
      EXPECT_LE(b.rank_pct, 1.0);
      EXPECT_GT(b.wage_norm, 0.0);
      job_offers += b.offer;
      callbacks += b.callback;
    }
    EXPECT_EQ(static_cast<int>(workers.size()), K);
    EXPECT_LE(job_offers, 1);
    offers += job_offers;
  }
  EXPECT_GE(callbacks, offers);
}

TEST(Market, NullToolHasNoDifferentialChange) {
  SimConfig c = preset("null");
  c.n_workers = 3000;
  c.n_jobs = 12000;
  c.seed = 21;
  const auto ds = generate_market(c);
  std::map<int, std::pair<double, int>> pre, post;
  for (const auto& b : ds.bids) {
    auto& cell = (b.period >= c.tool_period ? post : pre)[b.worker_id];
    cell.first += b.tailoring;
    ++cell.second;
  }
  std::map<int, std::pair<bool, double>> change;
  for (const auto& [w, p] : pre) {
    auto it = post.find(w);
    if (it == post.end()) continue;
    change[w] = {ds.workers[w].access, it->second.first / it->second.second - p.first / p.second};
  }
  const auto g = worker_gap(change);
  EXPECT_LT(std::abs(g.diff), 3 * g.se);
}

TEST(Market, FullComplianceGapMatchesShift) {
  SimConfig c;
  c.n_workers = 5000;
  c.n_jobs = 10000;
  c.compliance = 1.0;
  c.gpt_shift_treated = 0.3;
  c.gpt_shift_control = 0.1;
  const auto ds = generate_market(c);
  std::map<int, std::pair<double, int>> post;
  for (const auto& b : ds.bids) {
    if (b.period < c.tool_period) continue;
    auto& cell = post[b.worker_id];
    cell.first += b.tailoring;
    ++cell.second;
  }
  std::map<int, std::pair<bool, double>> means;
  for (const auto& [w, p] : post) means[w] = {ds.workers[w].access, p.first / p.second};
  const auto g = worker_gap(means);
  EXPECT_LT(std::abs(g.diff - (c.model.A + 0.2)), 3 * g.se) << g.diff << " (" << g.se << ")";
}

TEST(Market, TruthMatchesBids) {
  SimConfig c;
  c.n_workers = 500;
  c.n_jobs = 2000;
  c.compliance = 0.3;
  const auto ds = generate_market(c);
  int used = 0, eligible = 0;
  for (const auto& b : ds.bids) {
    if (b.access && b.period >= c.tool_period) ++eligible;
    used += b.used_ai;
  }
  EXPECT_EQ(used, ds.truth.used_bids);
  EXPECT_EQ(eligible, ds.truth.eligible_bids);
  EXPECT_NEAR(ds.truth.late, c.model.A, 1e-12);
  EXPECT_NEAR(ds.truth.itt, c.model.A * used / eligible, 1e-12);
}

TEST(Offers, SymmetricApplicantsShareEqually) {
  // E[q | h = mu0] = 0 under pre beliefs, so each of three applicants and the
  // outside option get a quarter.
  auto ds = identical_letters(0.0, 0.0, 40000);
  assign_outcomes(ds, BeliefRegime::pre_beliefs);
  const std::vector<double> h(3, 0.0);
  model::ModelParams P = ds.config.model.with_A(0.0);
  const auto expect = model::hire_prob_conditional(h, P);
  int n[3] = {0, 0, 0};
  for (const auto& b : ds.bids) n[b.worker_id] += b.offer;
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(expect[k], 0.25, 1e-15);
    const double share = n[k] / 40000.0;
    EXPECT_LT(std::abs(share - 0.25), 3 * std::sqrt(0.25 * 0.75 / 40000));
  }
}

TEST(Offers, DominantLetterTakesTheJob) {
  auto ds = identical_letters(60.0, 0.0, 2000);
  assign_outcomes(ds, BeliefRegime::pre_beliefs);
  for (const auto& b : ds.bids) EXPECT_EQ(b.offer, b.worker_id == 0 ? 1 : 0);
}

TEST(Ledger, ObservedOutcomesSelectRealState) {
  SimConfig c;
  c.n_workers = 400;
  c.n_jobs = 2000;
  c.compliance = 0.5;
  const auto ds = generate_market(c);
  const auto pot = bid_potentials(ds);
  for (std::size_t b = 0; b < ds.bids.size(); ++b) {
    EXPECT_EQ(ds.bids[b].offer, pot[b].real.offer);
    if (ds.bids[b].period < c.tool_period) {
      // no-tool potential outcomes are the observed ones before rollout
      EXPECT_EQ(pot[b].real.offer_prob, pot[b].none_m0.offer_prob);
      EXPECT_EQ(pot[b].real.offer, pot[b].none_m0.offer);
    }
  }
  for (const auto& [key, cell] : build_ledger(ds, pot)) {
    EXPECT_EQ(cell.observed_offer_rate, cell.real_offer_rate);
    if (key.second < c.tool_period) EXPECT_EQ(cell.real, cell.none_m0);
  }
}

TEST(Ledger, NoToolGapConstantAfterGpt) {
  SimConfig c;
  c.n_workers = 300;
  c.n_jobs = 1200;
  c.gpt_shift_treated = 0.4;
  c.gpt_shift_control = -0.1;
  const auto ds = generate_market(c);
  for (std::size_t b = 0; b < ds.bids.size(); ++b) {
    const auto& rec = ds.bids[b];
    const double structural = ds.latent[b].letter_none - ds.workers[rec.worker_id].q - ds.latent[b].nu;
    double expect = 0.0;
    if (rec.period >= c.gpt_period) expect = rec.access ? 0.4 : -0.1;
    EXPECT_NEAR(structural, expect, 1e-12);
  }
}

TEST(Ledger, AccessFlipOnlyMovesJobsTheWorkerBidsOn) {
  SimConfig c;
  c.n_workers = 200;
  c.n_jobs = 800;
  c.compliance = 1.0;
  const auto base = generate_market(c);
  const int w = 17;
  std::vector<bool> access;
  for (const auto& rec : base.workers) access.push_back(rec.access);
  access[w] = !access[w];
  MarketOverrides o;
  o.access = access;
  const auto flipped = generate_market(c, o);
  const int K = base.applicants();
  int touched = 0, changed = 0;
  for (std::size_t j = 0; j < base.n_jobs(); ++j) {
    bool has_w = false;
    for (int k = 0; k < K; ++k) has_w |= base.bids[j * K + k].worker_id == w;
    for (int k = 0; k < K; ++k) {
      const auto& a = base.bids[j * K + k];
      const auto& b = flipped.bids[j * K + k];
      EXPECT_EQ(a.worker_id, b.worker_id);
      if (!has_w) {
        EXPECT_EQ(a.offer, b.offer);
        EXPECT_EQ(a.callback, b.callback);
        EXPECT_EQ(a.tailoring, b.tailoring);
      } else if (a.worker_id != w && a.offer != b.offer) {
        ++changed;
      }
    }
    touched += has_w;
  }
  EXPECT_GT(touched, 0);
  EXPECT_GE(changed, 0);
  MarketOverrides bad;
  bad.access = std::vector<bool>(3, true);
  EXPECT_THROW(generate_market(c, bad), InputError);
}

TEST(Decomposition, PartsAddUpAndVanishWithoutTool) {
  SimConfig c;
  c.n_workers = 500;
  c.n_jobs = 2000;
  c.compliance = 0.5;
  const auto d = decompose_estimand(c);
  EXPECT_NEAR(d.direct.value + d.spillover.value + d.market_shift.value, d.total.value, 1e-12);
  EXPECT_LE(d.spillover.value, 0.0);

  SimConfig n = preset("null");
  const auto z = decompose_estimand(n);
  for (const auto* t : {&z.total, &z.direct, &z.spillover, &z.market_shift}) {
    EXPECT_LE(std::abs(t->value), 3 * t->se + 1e-12);
  }
}

TEST(Summary, AdoptionShares) {
  SimConfig c;
  c.n_workers = 400;
  c.n_jobs = 1600;
  c.compliance = 0.0;
  auto s = summarize(generate_market(c).bids, c.tool_period);
  EXPECT_EQ(s.ai_bids, 0);
  EXPECT_EQ(s.ai_bid_share, 0.0);
  EXPECT_EQ(s.adopters_ever, 0);

  c.compliance = 1.0;
  s = summarize(generate_market(c).bids, c.tool_period);
  EXPECT_GT(s.adopters_eligible, 0);
  EXPECT_EQ(s.adoption_bins[9], s.adopters_eligible);
  EXPECT_EQ(s.share_ever_used, 1.0);

  c.compliance = 0.2;
  c.n_workers = 3000;
  c.n_jobs = 20000;
  s = summarize(generate_market(c).bids, c.tool_period);
  EXPECT_LT(std::abs(s.ai_bid_share - 0.2), 3 * s.ai_bid_share_se);
  long total = 0;
  for (const auto& [t, n] : s.bids_per_period) total += n;
  EXPECT_EQ(total, 20000L * c.applicants_per_job);
}

TEST(BidsCsv, RoundTrip) {
  SimConfig c;
  c.n_workers = 50;
  c.n_jobs = 40;
  const auto ds = generate_market(c);
  const std::string text = bids_text(ds);
  std::istringstream in(text);
  const auto back = read_bids_csv(in);
  ASSERT_EQ(back.size(), ds.bids.size());
  std::ostringstream os;
  write_bids_csv(os, back);
  EXPECT_EQ(os.str(), text);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "bid_id,worker_id,job_id,period,access,used_ai,tailoring,wage_norm,rank_pct,callback,offer,"
            "edit_minutes,pre_ability");
}

TEST(BidsCsv, HeaderAndFieldErrorsNameTheColumn) {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_bids_csv(in);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const std::string header =
      "bid_id,worker_id,job_id,period,access,used_ai,tailoring,wage_norm,rank_pct,callback,offer,edit_minutes,"
      "pre_ability\n";
  EXPECT_NE(message("bid_id,worker,job_id\n").find("worker_id"), std::string::npos);
  EXPECT_NE(message(header + "0,1,2,0,2,0,0.1,1,0.5,0,0,0,NA\n").find("access"), std::string::npos);
  EXPECT_NE(message(header + "0,1,2,0,1,0,abc,1,0.5,0,0,0,NA\n").find("tailoring"), std::string::npos);
  EXPECT_NE(message(header + "0,1,2\n").find("fields"), std::string::npos);
  EXPECT_NE(message("").find("empty"), std::string::npos);
}
