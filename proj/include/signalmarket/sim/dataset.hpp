#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "signalmarket/model/hiring.hpp"
#include "signalmarket/parallel.hpp"
#include "signalmarket/random.hpp"
#include "signalmarket/sim/config.hpp"

namespace signalmarket::sim {

struct WorkerRecord {
  int worker_id = 0;
  double q = 0.0;
  bool access = false;
};

struct BidRecord {
  std::int64_t bid_id = 0;
  int worker_id = 0;
  int job_id = 0;
  int period = 0;
  bool access = false;
  bool used_ai = false;
  double tailoring = 0.0;
  double wage_norm = 1.0;
  double rank_pct = 0.0;
  int callback = 0;
  int offer = 0;
  double edit_minutes = 0.0;
  std::optional<double> pre_ability;
};

// Per-bid draws and counterfactual letters kept alongside the public record so
// outcomes can be re-drawn under other market states with the same randomness.
struct BidLatent {
  double nu = 0.0;
  double review = 0.0;       // platform score s = q + eta seen by employers when enabled
  double u_use = 0.0;
  double u_callback = 0.0;
  double edit_z = 0.0;
  double tool_effect = 0.0;  // tailoring added by using the tool on this bid, editing included
  double letter_none = 0.0;  // tailoring had nobody used the tool
};

struct DecompositionTerm {
  double value = 0.0;
  double se = 0.0;
};

struct Decomposition {
  DecompositionTerm total, direct, spillover, market_shift;
  // |total - (direct + spillover + market_shift)| and the matching combined SE.
  double residual = 0.0;
  double combined_se = 0.0;
};

struct Truth {
  double late = 0.0;       // mean tailoring effect per tool use
  double itt = 0.0;        // mean tailoring effect per post-rollout access bid
  double gpt_gap = 0.0;    // gpt_shift_treated - gpt_shift_control
  // Coefficient bias on PostAI x Access if PostGPT x Access is left out.
  double predicted_no_gpt_bias = 0.0;
  int used_bids = 0;
  int eligible_bids = 0;
  Decomposition decomposition;
};

struct Dataset {
  SimConfig config;
  std::vector<WorkerRecord> workers;
  std::vector<BidRecord> bids;  // job-major: bids of job j are contiguous
  std::vector<BidLatent> latent;
  std::vector<double> offer_u;  // one uniform per job
  Truth truth;
  int pre_ability_missing = 0;

  int applicants() const { return config.applicants_per_job; }
  std::size_t n_jobs() const { return offer_u.size(); }
};

// Employer side: posterior expected productivity under pre- or post-rollout
// beliefs, and the outside option.
class Employer {
 public:
  explicit Employer(const SimConfig& cfg) : cfg_(cfg) {
    pre_ = cfg.model.with_A(0.0);
    pre_.p = 0.5;
    post_ = cfg.model;
    const double prior = cfg.usage_prior();
    if (prior > 0.0 && prior < 1.0 && cfg.model.A > 0.0) {
      post_.p = prior;
    } else {
      post_ = pre_;  // nobody can be using the tool, nothing to discount
    }
    if (cfg.review_signal) {
      const double rv = cfg.review_noise_sd * cfg.review_noise_sd;
      two_pre_.emplace(pre_, rv);
      two_post_.emplace(post_, rv);
    }
  }

  double utility(double h, double s, bool post_beliefs) const {
    if (two_pre_) return (post_beliefs ? *two_post_ : *two_pre_).expected_productivity(h, s);
    return model::expected_productivity(h, post_beliefs ? post_ : pre_);
  }

  double outside(bool post_market) const {
    return cfg_.outside_utility + (post_market ? cfg_.market_shift : 0.0);
  }

  bool post_beliefs_at(int period) const { return cfg_.belief_update && cfg_.is_post_tool(period); }

 private:
  SimConfig cfg_;
  model::ModelParams pre_, post_;
  std::optional<model::TwoSignalPosterior> two_pre_, two_post_;
};

// Index of the chosen applicant for uniform u, or -1 for the outside option.
inline int draw_offer(const std::vector<double>& shares, double u) {
  double cum = 0.0;
  for (std::size_t k = 0; k < shares.size(); ++k) {
    cum += shares[k];
    if (u < cum) return static_cast<int>(k);
  }
  return -1;
}

namespace detail {

inline double tool_effect(const SimConfig& cfg, double q, int period) {
  const double a = cfg.tool_effect_at(period);
  if (a == 0.0) return 0.0;
  return a - cfg.substitution * (q - cfg.model.mu0);
}

inline double gpt_shift(const SimConfig& cfg, bool access, int period) {
  if (!cfg.is_post_gpt(period)) return 0.0;
  return access ? cfg.gpt_shift_treated : cfg.gpt_shift_control;
}

// k distinct workers drawn uniformly, in draw order.
inline std::vector<int> sample_applicants(Rng& rng, int n_workers, int k) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  std::uniform_int_distribution<int> pick(0, n_workers - 1);
  if (2 * k <= n_workers) {
    while (static_cast<int>(out.size()) < k) {
      const int w = pick(rng);
      if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
    }
    return out;
  }
  std::vector<int> pool(static_cast<std::size_t>(n_workers));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> d(i, n_workers - 1);
    std::swap(pool[i], pool[d(rng)]);
    out.push_back(pool[i]);
  }
  return out;
}

}  // namespace detail

inline int period_of_job(int job, int n_jobs, int n_periods) {
  return static_cast<int>(static_cast<std::int64_t>(job) * n_periods / n_jobs);
}

// Callback and offer for every bid under the beliefs each bid's period implies,
// or forced pre/post beliefs.
enum class BeliefRegime { by_period, pre_beliefs, post_beliefs };

inline void assign_outcomes(Dataset& ds, BeliefRegime regime = BeliefRegime::by_period) {
  const SimConfig& cfg = ds.config;
  const Employer employer(cfg);
  const int K = ds.applicants();
  std::vector<double> util(static_cast<std::size_t>(K));
  for (std::size_t j = 0; j < ds.n_jobs(); ++j) {
    const std::size_t first = j * static_cast<std::size_t>(K);
    const int period = ds.bids[first].period;
    bool post_b = employer.post_beliefs_at(period);
    if (regime == BeliefRegime::pre_beliefs) post_b = false;
    if (regime == BeliefRegime::post_beliefs) post_b = true;
    const double u0 = employer.outside(cfg.is_post_tool(period));
    for (int k = 0; k < K; ++k) {
      const auto& b = ds.bids[first + k];
      util[k] = employer.utility(b.tailoring, ds.latent[first + k].review, post_b);
    }
    const auto shares = model::logit_shares(util, u0);
    const int winner = draw_offer(shares, ds.offer_u[j]);
    for (int k = 0; k < K; ++k) {
      auto& b = ds.bids[first + k];
      b.callback = ds.latent[first + k].u_callback < model::logistic(util[k] - u0) ? 1 : 0;
      b.offer = k == winner ? 1 : 0;
    }
  }
}

}  // namespace signalmarket::sim
