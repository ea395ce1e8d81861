#pragma once

#include <string>
#include <vector>

#include "signalmarket/errors.hpp"
#include "signalmarket/sim/config.hpp"

namespace signalmarket::sim {

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"default", "null", "recovery", "belief_switch", "ceiling"};
  return names;
}

// Named starting configurations. Explicit settings are applied on top.
//   null           no tool effect, no differential GPT shift
//   recovery       large panel, low compliance, differential GPT shifts
//   belief_switch  employers see a review score and the tool is used on every
//                  eligible bid, so the letter loses weight after rollout
//   ceiling        the tool lifts all users to a common tailoring level
inline SimConfig preset(const std::string& name) {
  SimConfig c;
  if (name == "default") return c;
  if (name == "null") {
    c.model.A = 0.0;
    c.n_workers = 200;
    c.n_jobs = 400;
    return c;
  }
  if (name == "recovery") {
    c.n_workers = 5000;
    c.n_jobs = 20000;
    c.compliance = 0.2;
    c.gpt_shift_treated = 0.3;
    c.gpt_shift_control = 0.1;
    return c;
  }
  if (name == "belief_switch") {
    c.n_workers = 5000;
    c.n_jobs = 40000;
    c.model.A = 2.0;
    c.compliance = 1.0;
    c.review_signal = true;
    c.review_noise_sd = 1.0;
    return c;
  }
  if (name == "ceiling") {
    c.n_workers = 5000;
    c.n_jobs = 20000;
    c.substitution = 1.0;
    return c;
  }
  std::string list;
  for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
  throw_input("unknown preset '", name, "' (expected one of ", list, ")");
}

}  // namespace signalmarket::sim
