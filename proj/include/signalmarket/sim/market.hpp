#pragma once

#include "signalmarket/sim/decompose.hpp"

namespace signalmarket::sim {

// Optional per-worker access flags replacing the drawn ones (everything else,
// including every random draw, is unchanged).
struct MarketOverrides {
  std::optional<std::vector<bool>> access;
};

inline Dataset generate_market(const SimConfig& cfg, const MarketOverrides& overrides = {}, unsigned threads = 1) {
  cfg.validate();
  Dataset ds;
  ds.config = cfg;
  const double tau = std::sqrt(cfg.model.tau2);
  const double sigma = std::sqrt(cfg.model.sigma2);

  ds.workers.resize(static_cast<std::size_t>(cfg.n_workers));
  for (int i = 0; i < cfg.n_workers; ++i) {
    Rng rng = substream(cfg.seed, "worker", static_cast<std::uint64_t>(i));
    WorkerRecord& w = ds.workers[i];
    w.worker_id = i;
    w.q = cfg.model.mu0 + tau * std_normal(rng);
    w.access = uniform01(rng) < cfg.access_share;
  }
  if (overrides.access) {
    if (overrides.access->size() != ds.workers.size()) {
      throw_input("access override has ", overrides.access->size(), " entries for ", cfg.n_workers, " workers");
    }
    for (std::size_t i = 0; i < ds.workers.size(); ++i) ds.workers[i].access = (*overrides.access)[i];
  }

  const int K = cfg.applicants_per_job;
  const std::size_t n_bids = static_cast<std::size_t>(cfg.n_jobs) * K;
  ds.bids.resize(n_bids);
  ds.latent.resize(n_bids);
  ds.offer_u.resize(static_cast<std::size_t>(cfg.n_jobs));

  // Pass 1: applicants, draws and letters without the editing component.
  parallel_for(static_cast<std::size_t>(cfg.n_jobs), resolve_threads(threads), [&](std::size_t j) {
    Rng rng = substream(cfg.seed, "job", j);
    const int period = period_of_job(static_cast<int>(j), cfg.n_jobs, cfg.n_periods);
    const auto applicants = detail::sample_applicants(rng, cfg.n_workers, K);
    std::vector<double> rank_key(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      const std::size_t b = j * K + k;
      const WorkerRecord& w = ds.workers[applicants[k]];
      BidLatent& lat = ds.latent[b];
      lat.nu = sigma * std_normal(rng);
      lat.review = w.q + cfg.review_noise_sd * std_normal(rng);
      lat.u_use = uniform01(rng);
      lat.u_callback = uniform01(rng);
      lat.edit_z = std_normal(rng);
      const double wage_z = std_normal(rng);

      BidRecord& rec = ds.bids[b];
      rec.bid_id = static_cast<std::int64_t>(b);
      rec.worker_id = w.worker_id;
      rec.job_id = static_cast<int>(j);
      rec.period = period;
      rec.access = w.access;
      rec.used_ai = w.access && cfg.is_post_tool(period) && lat.u_use < cfg.compliance;
      rec.wage_norm = std::exp(cfg.wage_sd * wage_z - 0.5 * cfg.wage_sd * cfg.wage_sd);
      lat.letter_none = w.q + detail::gpt_shift(cfg, w.access, period) + lat.nu;
      rank_key[k] = lat.review;
    }
    // Within-job percentile of the platform score, best applicant = 1.
    for (int k = 0; k < K; ++k) {
      int better = 0;
      for (int m = 0; m < K; ++m) {
        if (rank_key[m] > rank_key[k] || (rank_key[m] == rank_key[k] && m < k)) ++better;
      }
      ds.bids[j * K + k].rank_pct = 1.0 - static_cast<double>(better) / K;
    }
    ds.offer_u[j] = uniform01(rng);
  });

  // Pre-rollout ability: worker mean letter quality before the tool, standardized.
  std::vector<double> sum(ds.workers.size(), 0.0);
  std::vector<int> count(ds.workers.size(), 0);
  for (std::size_t b = 0; b < n_bids; ++b) {
    if (cfg.is_post_tool(ds.bids[b].period)) continue;
    sum[ds.bids[b].worker_id] += ds.latent[b].letter_none;
    ++count[ds.bids[b].worker_id];
  }
  std::vector<std::optional<double>> ability(ds.workers.size());
  double mean = 0.0, m2 = 0.0;
  int n_with = 0;
  for (std::size_t i = 0; i < ds.workers.size(); ++i) {
    if (count[i] == 0) continue;
    const double v = sum[i] / count[i];
    ability[i] = v;
    ++n_with;
    const double d = v - mean;
    mean += d / n_with;
    m2 += d * (v - mean);
  }
  const double sd = n_with > 1 ? std::sqrt(m2 / n_with) : 0.0;
  for (auto& a : ability) {
    if (a) a = sd > 0.0 ? (*a - mean) / sd : 0.0;
  }
  ds.pre_ability_missing = cfg.n_workers - n_with;

  // Pass 2: editing time, tool effects and the observed letter.
  for (std::size_t b = 0; b < n_bids; ++b) {
    BidRecord& rec = ds.bids[b];
    BidLatent& lat = ds.latent[b];
    rec.pre_ability = ability[rec.worker_id];
    if (rec.used_ai) {
      const double ab = rec.pre_ability.value_or(0.0);
      rec.edit_minutes = std::max(0.0, cfg.edit_alpha + cfg.edit_beta * ab + cfg.edit_noise_sd * lat.edit_z);
      lat.tool_effect = detail::tool_effect(cfg, ds.workers[rec.worker_id].q, rec.period) +
                        cfg.edit_gain * rec.edit_minutes;
    }
    rec.tailoring = lat.letter_none + lat.tool_effect;
  }

  assign_outcomes(ds);

  Truth& t = ds.truth;
  double effect_sum = 0.0;
  for (std::size_t b = 0; b < n_bids; ++b) {
    const BidRecord& rec = ds.bids[b];
    if (!rec.access || !cfg.is_post_tool(rec.period)) continue;
    ++t.eligible_bids;
    if (rec.used_ai) {
      ++t.used_bids;
      effect_sum += ds.latent[b].tool_effect;
    }
  }
  t.late = t.used_bids > 0 ? effect_sum / t.used_bids : 0.0;
  t.itt = t.eligible_bids > 0 ? effect_sum / t.eligible_bids : 0.0;
  t.gpt_gap = cfg.gpt_shift_treated - cfg.gpt_shift_control;
  // With period and worker effects, leaving out the GPT interaction loads the
  // GPT gap onto the tool term in proportion to the pre-rollout bids that
  // predate GPT.
  std::int64_t pre_bids = 0, pre_before_gpt = 0;
  for (const auto& rec : ds.bids) {
    if (cfg.is_post_tool(rec.period)) continue;
    ++pre_bids;
    if (!cfg.is_post_gpt(rec.period)) ++pre_before_gpt;
  }
  t.predicted_no_gpt_bias = pre_bids > 0 ? t.gpt_gap * static_cast<double>(pre_before_gpt) / pre_bids : 0.0;
  t.decomposition = decompose(ds);
  return ds;
}

inline Decomposition decompose_estimand(const SimConfig& cfg, unsigned threads = 1) {
  return generate_market(cfg, {}, threads).truth.decomposition;
}

}  // namespace signalmarket::sim
