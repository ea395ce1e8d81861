#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "signalmarket/sim/dataset.hpp"

namespace signalmarket::sim {

struct AdoptionSummary {
  // Workers with access and at least one post-rollout bid, binned by the share
  // of those bids written with the tool: [0,0.1), ..., [0.9,1.0].
  std::array<int, 10> adoption_bins{};
  int adopters_eligible = 0;
  int adopters_ever = 0;       // used the tool at least once
  double share_ever_used = 0.0;
  long eligible_bids = 0;      // post-rollout bids by access workers
  long ai_bids = 0;
  double ai_bid_share = 0.0;
  double ai_bid_share_se = 0.0;
  std::map<int, long> bids_per_period;
  std::map<int, double> mean_tailoring_access, mean_tailoring_no_access;
};

inline AdoptionSummary summarize(const std::vector<BidRecord>& bids, int tool_period) {
  AdoptionSummary s;
  std::map<int, std::pair<int, int>> per_worker;  // worker -> (eligible, used)
  std::map<int, std::pair<double, long>> ta, tn;
  for (const auto& b : bids) {
    ++s.bids_per_period[b.period];
    auto& cell = (b.access ? ta : tn)[b.period];
    cell.first += b.tailoring;
    ++cell.second;
    if (!b.access || b.period < tool_period) continue;
    ++s.eligible_bids;
    auto& w = per_worker[b.worker_id];
    ++w.first;
    if (b.used_ai) {
      ++s.ai_bids;
      ++w.second;
    }
  }
  for (const auto& [id, w] : per_worker) {
    const double rate = static_cast<double>(w.second) / w.first;
    const int bin = std::min(9, static_cast<int>(std::floor(rate * 10.0 + 1e-12)));
    ++s.adoption_bins[bin];
    ++s.adopters_eligible;
    if (w.second > 0) ++s.adopters_ever;
  }
  if (s.adopters_eligible > 0) s.share_ever_used = static_cast<double>(s.adopters_ever) / s.adopters_eligible;
  if (s.eligible_bids > 0) {
    const double p = static_cast<double>(s.ai_bids) / s.eligible_bids;
    s.ai_bid_share = p;
    s.ai_bid_share_se = std::sqrt(p * (1.0 - p) / s.eligible_bids);
  }
  for (const auto& [t, c] : ta) s.mean_tailoring_access[t] = c.first / c.second;
  for (const auto& [t, c] : tn) s.mean_tailoring_no_access[t] = c.first / c.second;
  return s;
}

inline nlohmann::ordered_json to_json(const AdoptionSummary& s) {
  nlohmann::ordered_json bins = nlohmann::ordered_json::array();
  for (int i = 0; i < 10; ++i) {
    bins.push_back({{"lo", i / 10.0}, {"hi", (i + 1) / 10.0}, {"workers", s.adoption_bins[i]}});
  }
  nlohmann::ordered_json periods = nlohmann::ordered_json::array();
  for (const auto& [t, n] : s.bids_per_period) {
    nlohmann::ordered_json row = {{"period", t}, {"bids", n}};
    if (auto it = s.mean_tailoring_access.find(t); it != s.mean_tailoring_access.end()) {
      row["mean_tailoring_access"] = it->second;
    }
    if (auto it = s.mean_tailoring_no_access.find(t); it != s.mean_tailoring_no_access.end()) {
      row["mean_tailoring_no_access"] = it->second;
    }
    periods.push_back(row);
  }
  return {{"adoption_histogram", bins},
          {"workers_eligible", s.adopters_eligible},
          {"workers_ever_used", s.adopters_ever},
          {"share_ever_used", s.share_ever_used},
          {"eligible_bids", s.eligible_bids},
          {"ai_bids", s.ai_bids},
          {"ai_bid_share", s.ai_bid_share},
          {"ai_bid_share_se", s.ai_bid_share_se},
          {"periods", periods}};
}

}  // namespace signalmarket::sim
