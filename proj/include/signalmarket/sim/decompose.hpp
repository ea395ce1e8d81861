#pragma once

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "signalmarket/sim/dataset.hpp"

namespace signalmarket::sim {

// Market states evaluated on the same draws:
//   real     what happened (tool used where drawn, market as of the bid's period)
//   iso      post-rollout market, only the bidder in question uses the tool
//   none_m1  post-rollout market, nobody uses the tool
//   none_m0  pre-rollout market (old beliefs, no shift), nobody uses the tool
enum class MarketState { real, iso, none_m1, none_m0 };

struct Potential {
  double offer_prob = 0.0;
  double callback_prob = 0.0;
  int offer = 0;
};

struct BidPotentials {
  Potential real, iso, none_m1, none_m0;

  const Potential& at(MarketState s) const {
    switch (s) {
      case MarketState::real: return real;
      case MarketState::iso: return iso;
      case MarketState::none_m1: return none_m1;
      case MarketState::none_m0: return none_m0;
    }
    return real;
  }
};

inline std::vector<BidPotentials> bid_potentials(const Dataset& ds) {
  const SimConfig& cfg = ds.config;
  const Employer employer(cfg);
  const int K = ds.applicants();
  std::vector<BidPotentials> out(ds.bids.size());
  std::vector<double> util(static_cast<std::size_t>(K));
  std::vector<double> util_none_m1(static_cast<std::size_t>(K));

  auto fill = [&](std::size_t first, const std::vector<double>& u, double u0, double offer_u,
                  Potential BidPotentials::*slot) {
    const auto shares = model::logit_shares(u, u0);
    const int winner = draw_offer(shares, offer_u);
    for (int k = 0; k < K; ++k) {
      Potential& p = out[first + k].*slot;
      p.offer_prob = shares[k];
      p.callback_prob = model::logistic(u[k] - u0);
      p.offer = k == winner ? 1 : 0;
    }
  };

  for (std::size_t j = 0; j < ds.n_jobs(); ++j) {
    const std::size_t first = j * static_cast<std::size_t>(K);
    const int period = ds.bids[first].period;
    const bool post = cfg.is_post_tool(period);
    const bool post_beliefs_m1 = cfg.belief_update;

    for (int k = 0; k < K; ++k) {
      util[k] = employer.utility(ds.bids[first + k].tailoring, ds.latent[first + k].review,
                                 employer.post_beliefs_at(period));
    }
    fill(first, util, employer.outside(post), ds.offer_u[j], &BidPotentials::real);

    for (int k = 0; k < K; ++k) {
      util_none_m1[k] = employer.utility(ds.latent[first + k].letter_none, ds.latent[first + k].review,
                                         post_beliefs_m1);
    }
    fill(first, util_none_m1, employer.outside(true), ds.offer_u[j], &BidPotentials::none_m1);

    for (int k = 0; k < K; ++k) {
      util[k] = employer.utility(ds.latent[first + k].letter_none, ds.latent[first + k].review, false);
    }
    fill(first, util, employer.outside(false), ds.offer_u[j], &BidPotentials::none_m0);

    // Isolated use: bidder k's realized letter against rivals' no-tool letters.
    for (int k = 0; k < K; ++k) {
      util = util_none_m1;
      util[k] = employer.utility(ds.bids[first + k].tailoring, ds.latent[first + k].review, post_beliefs_m1);
      const auto shares = model::logit_shares(util, employer.outside(true));
      const int winner = draw_offer(shares, ds.offer_u[j]);
      Potential& p = out[first + k].iso;
      p.offer_prob = shares[k];
      p.callback_prob = model::logistic(util[k] - employer.outside(true));
      p.offer = k == winner ? 1 : 0;
    }
  }
  return out;
}

// Per (worker, period) averages of the bid potentials.
struct LedgerCell {
  int n_bids = 0;
  double real = 0.0, iso = 0.0, none_m1 = 0.0, none_m0 = 0.0;
  double observed_offer_rate = 0.0;
  double real_offer_rate = 0.0;  // realized offers in the real state, same draws
};

using PotentialOutcomeLedger = std::map<std::pair<int, int>, LedgerCell>;

inline PotentialOutcomeLedger build_ledger(const Dataset& ds, const std::vector<BidPotentials>& pot) {
  PotentialOutcomeLedger ledger;
  for (std::size_t b = 0; b < ds.bids.size(); ++b) {
    const auto& rec = ds.bids[b];
    LedgerCell& c = ledger[{rec.worker_id, rec.period}];
    ++c.n_bids;
    c.real += pot[b].real.offer_prob;
    c.iso += pot[b].iso.offer_prob;
    c.none_m1 += pot[b].none_m1.offer_prob;
    c.none_m0 += pot[b].none_m0.offer_prob;
    c.observed_offer_rate += rec.offer;
    c.real_offer_rate += pot[b].real.offer;
  }
  for (auto& [key, c] : ledger) {
    const double n = c.n_bids;
    c.real /= n;
    c.iso /= n;
    c.none_m1 /= n;
    c.none_m0 /= n;
    c.observed_offer_rate /= n;
    c.real_offer_rate /= n;
  }
  return ledger;
}

// Split of the difference-in-differences in expected offer probability on
// post-rollout bids, treated (access) minus control, relative to the no-tool
// pre-rollout market:
//   total        [T(real) - T(none_m0)] - [C(real) - C(none_m0)]
//   direct       T(iso) - T(none_m1)
//   spillover    [T(real) - T(iso)] - [C(real) - C(none_m1)]
//   market_shift [T(none_m1) - T(none_m0)] - [C(none_m1) - C(none_m0)]
// The three parts add up to the total bid by bid. Standard errors treat bids
// as independent draws within each group.
inline Decomposition decompose(const Dataset& ds, const std::vector<BidPotentials>& pot) {
  struct Acc {
    double n = 0, mean = 0, m2 = 0;
    void add(double v) {
      n += 1;
      const double d = v - mean;
      mean += d / n;
      m2 += d * (v - mean);
    }
    double se() const { return n > 1 ? std::sqrt(m2 / (n - 1) / n) : 0.0; }
  };
  Acc t_total, c_total, t_direct, t_spill, c_spill, t_market, c_market;
  for (std::size_t b = 0; b < ds.bids.size(); ++b) {
    const auto& rec = ds.bids[b];
    if (!ds.config.is_post_tool(rec.period)) continue;
    const auto& p = pot[b];
    const double real = p.real.offer_prob, iso = p.iso.offer_prob;
    const double m1 = p.none_m1.offer_prob, m0 = p.none_m0.offer_prob;
    if (rec.access) {
      t_total.add(real - m0);
      t_direct.add(iso - m1);
      t_spill.add(real - iso);
      t_market.add(m1 - m0);
    } else {
      c_total.add(real - m0);
      c_spill.add(real - m1);
      c_market.add(m1 - m0);
    }
  }
  auto combine = [](const Acc& a, const Acc* b) {
    DecompositionTerm t;
    t.value = a.mean - (b ? b->mean : 0.0);
    const double sb = b ? b->se() : 0.0;
    t.se = std::sqrt(a.se() * a.se() + sb * sb);
    return t;
  };
  Decomposition d;
  d.total = combine(t_total, &c_total);
  d.direct = combine(t_direct, nullptr);
  d.spillover = combine(t_spill, &c_spill);
  d.market_shift = combine(t_market, &c_market);
  d.residual = std::abs(d.total.value - (d.direct.value + d.spillover.value + d.market_shift.value));
  d.combined_se = std::sqrt(d.total.se * d.total.se + d.direct.se * d.direct.se +
                            d.spillover.se * d.spillover.se + d.market_shift.se * d.market_shift.se);
  return d;
}

inline Decomposition decompose(const Dataset& ds) { return decompose(ds, bid_potentials(ds)); }

}  // namespace signalmarket::sim
