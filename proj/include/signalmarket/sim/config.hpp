#pragma once

#include <cstdint>

#include "signalmarket/model/params.hpp"

namespace signalmarket::sim {

// How the tool changes the tailoring of a letter it writes.
//   effect = A - substitution * (q - mu0)
// substitution = 0 is a uniform additive shift; substitution = 1 lifts every
// user to the same level mu0 + A (a common ceiling).
struct SimConfig {
  model::ModelParams model{};
  int n_workers = 2000;
  int n_jobs = 4000;
  int applicants_per_job = 5;
  int n_periods = 8;
  int gpt_period = 3;
  int tool_period = 4;
  double access_share = 0.5;
  double compliance = 0.2;
  double gpt_shift_treated = 0.0;
  double gpt_shift_control = 0.0;
  double market_shift = 0.0;
  std::uint64_t seed = 1;

  // Employers switch to post-tool beliefs (discounting by A g(h)) at tool_period.
  bool belief_update = true;
  // Employers also see a platform score s = q + eta and condition on it.
  bool review_signal = false;
  double review_noise_sd = 1.0;
  double substitution = 0.0;
  // Periods after rollout during which the tool shifts tailoring; 0 = forever.
  int effect_duration = 0;
  double outside_utility = 0.0;

  double wage_sd = 0.3;
  double edit_alpha = 10.0;
  double edit_beta = 2.0;
  double edit_noise_sd = 3.0;
  double edit_gain = 0.0;  // tailoring added per minute of editing

  void validate() const {
    model.validate();
    if (n_workers <= 0) throw_input("n_workers must be > 0");
    if (n_jobs <= 0) throw_input("n_jobs must be > 0");
    if (applicants_per_job < 2) throw_input("applicants_per_job must be >= 2");
    if (applicants_per_job > n_workers) {
      throw_input("cannot sample ", applicants_per_job, " applicants per job from ", n_workers, " workers");
    }
    if (n_periods < 4) throw_input("n_periods must be >= 4");
    if (!(0 <= gpt_period && gpt_period < tool_period && tool_period < n_periods)) {
      throw_input("need 0 <= gpt_period < tool_period < n_periods, got ", gpt_period, ", ", tool_period, ", ",
                  n_periods);
    }
    if (!(access_share > 0.0 && access_share < 1.0)) throw_input("access_share must lie in (0,1)");
    if (!(compliance >= 0.0 && compliance <= 1.0)) throw_input("compliance must lie in [0,1]");
    if (!(review_noise_sd > 0.0)) throw_input("review_noise_sd must be > 0");
    if (!(substitution >= 0.0 && substitution <= 1.0)) throw_input("substitution must lie in [0,1]");
    if (effect_duration < 0) throw_input("effect_duration must be >= 0");
    if (!(wage_sd >= 0.0)) throw_input("wage_sd must be >= 0");
    if (!(edit_noise_sd >= 0.0)) throw_input("edit_noise_sd must be >= 0");
  }

  bool is_post_tool(int period) const { return period >= tool_period; }
  bool is_post_gpt(int period) const { return period >= gpt_period; }

  double tool_effect_at(int period) const {
    if (!is_post_tool(period)) return 0.0;
    if (effect_duration > 0 && period - tool_period >= effect_duration) return 0.0;
    return model.A;
  }

  // Share of all letters written with the tool among post-rollout bids, the
  // prior employers use when the tool is live.
  double usage_prior() const { return access_share * compliance; }
};

}  // namespace signalmarket::sim
