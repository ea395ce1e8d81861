#pragma once

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "signalmarket/csv.hpp"
#include "signalmarket/sim/dataset.hpp"

namespace signalmarket::sim {

inline const std::vector<std::string>& bids_columns() {
  static const std::vector<std::string> cols = {
      "bid_id", "worker_id", "job_id", "period", "access", "used_ai", "tailoring",
      "wage_norm", "rank_pct", "callback", "offer", "edit_minutes", "pre_ability"};
  return cols;
}

inline void write_bids_csv(std::ostream& os, const std::vector<BidRecord>& bids) {
  const auto& cols = bids_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  using csv::format_double;
  for (const auto& b : bids) {
    os << b.bid_id << ',' << b.worker_id << ',' << b.job_id << ',' << b.period << ',' << int(b.access) << ','
       << int(b.used_ai) << ',' << format_double(b.tailoring) << ',' << format_double(b.wage_norm) << ','
       << format_double(b.rank_pct) << ',' << b.callback << ',' << b.offer << ','
       << format_double(b.edit_minutes) << ',' << (b.pre_ability ? format_double(*b.pre_ability) : "NA") << '\n';
  }
}

inline std::vector<BidRecord> read_bids_csv(std::istream& in, const std::string& name = "bids.csv") {
  std::vector<std::string> f;
  if (!csv::read_record(in, f)) throw_input(name, ": empty file, expected a header");
  if (!f.empty() && f[0].rfind("\xEF\xBB\xBF", 0) == 0) f[0].erase(0, 3);
  const auto& cols = bids_columns();
  csv::check_header(f, cols, name);
  std::vector<BidRecord> out;
  std::size_t line = 1;
  auto flag = [&](const std::string& s, std::size_t c) {
    const auto v = csv::parse_int(s, cols[c], line);
    if (v != 0 && v != 1) throw_input(name, " line ", line, ": column '", cols[c], "' must be 0 or 1");
    return static_cast<int>(v);
  };
  while (csv::read_record(in, f)) {
    ++line;
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != cols.size()) {
      throw_input(name, " line ", line, ": expected ", cols.size(), " fields, got ", f.size());
    }
    BidRecord b;
    b.bid_id = csv::parse_int(f[0], cols[0], line);
    b.worker_id = static_cast<int>(csv::parse_int(f[1], cols[1], line));
    b.job_id = static_cast<int>(csv::parse_int(f[2], cols[2], line));
    b.period = static_cast<int>(csv::parse_int(f[3], cols[3], line));
    b.access = flag(f[4], 4);
    b.used_ai = flag(f[5], 5);
    b.tailoring = csv::parse_double(f[6], cols[6], line);
    b.wage_norm = csv::parse_double(f[7], cols[7], line);
    b.rank_pct = csv::parse_double(f[8], cols[8], line);
    b.callback = flag(f[9], 9);
    b.offer = flag(f[10], 10);
    b.edit_minutes = csv::parse_double(f[11], cols[11], line);
    if (f[12] != "NA" && !f[12].empty()) b.pre_ability = csv::parse_double(f[12], cols[12], line);
    out.push_back(b);
  }
  return out;
}

inline std::vector<BidRecord> read_bids_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_input("cannot open ", path);
  return read_bids_csv(in, path);
}

inline nlohmann::ordered_json to_json(const model::ModelParams& m) {
  return {{"mu0", m.mu0}, {"tau2", m.tau2}, {"sigma2", m.sigma2}, {"p", m.p}, {"A", m.A}, {"N", m.N}};
}

inline nlohmann::ordered_json to_json(const SimConfig& c) {
  return {{"model", to_json(c.model)},
          {"n_workers", c.n_workers},
          {"n_jobs", c.n_jobs},
          {"applicants_per_job", c.applicants_per_job},
          {"n_periods", c.n_periods},
          {"gpt_period", c.gpt_period},
          {"tool_period", c.tool_period},
          {"access_share", c.access_share},
          {"compliance", c.compliance},
          {"gpt_shift_treated", c.gpt_shift_treated},
          {"gpt_shift_control", c.gpt_shift_control},
          {"market_shift", c.market_shift},
          {"seed", c.seed},
          {"belief_update", c.belief_update},
          {"review_signal", c.review_signal},
          {"review_noise_sd", c.review_noise_sd},
          {"substitution", c.substitution},
          {"effect_duration", c.effect_duration},
          {"outside_utility", c.outside_utility},
          {"wage_sd", c.wage_sd},
          {"edit_alpha", c.edit_alpha},
          {"edit_beta", c.edit_beta},
          {"edit_noise_sd", c.edit_noise_sd},
          {"edit_gain", c.edit_gain}};
}

// Reads the keys present in j over the defaults already in c.
inline void from_json(const nlohmann::json& j, model::ModelParams& m) {
  m.mu0 = j.value("mu0", m.mu0);
  m.tau2 = j.value("tau2", m.tau2);
  m.sigma2 = j.value("sigma2", m.sigma2);
  m.p = j.value("p", m.p);
  m.A = j.value("A", m.A);
  m.N = j.value("N", m.N);
}

inline void from_json(const nlohmann::json& j, SimConfig& c) {
  if (j.contains("model")) from_json(j.at("model"), c.model);
  c.n_workers = j.value("n_workers", c.n_workers);
  c.n_jobs = j.value("n_jobs", c.n_jobs);
  c.applicants_per_job = j.value("applicants_per_job", c.applicants_per_job);
  c.n_periods = j.value("n_periods", c.n_periods);
  c.gpt_period = j.value("gpt_period", c.gpt_period);
  c.tool_period = j.value("tool_period", c.tool_period);
  c.access_share = j.value("access_share", c.access_share);
  c.compliance = j.value("compliance", c.compliance);
  c.gpt_shift_treated = j.value("gpt_shift_treated", c.gpt_shift_treated);
  c.gpt_shift_control = j.value("gpt_shift_control", c.gpt_shift_control);
  c.market_shift = j.value("market_shift", c.market_shift);
  c.seed = j.value("seed", c.seed);
  c.belief_update = j.value("belief_update", c.belief_update);
  c.review_signal = j.value("review_signal", c.review_signal);
  c.review_noise_sd = j.value("review_noise_sd", c.review_noise_sd);
  c.substitution = j.value("substitution", c.substitution);
  c.effect_duration = j.value("effect_duration", c.effect_duration);
  c.outside_utility = j.value("outside_utility", c.outside_utility);
  c.wage_sd = j.value("wage_sd", c.wage_sd);
  c.edit_alpha = j.value("edit_alpha", c.edit_alpha);
  c.edit_beta = j.value("edit_beta", c.edit_beta);
  c.edit_noise_sd = j.value("edit_noise_sd", c.edit_noise_sd);
  c.edit_gain = j.value("edit_gain", c.edit_gain);
}

inline nlohmann::ordered_json to_json(const DecompositionTerm& t) { return {{"value", t.value}, {"se", t.se}}; }

inline nlohmann::ordered_json to_json(const Decomposition& d) {
  return {{"total", to_json(d.total)},
          {"direct", to_json(d.direct)},
          {"spillover", to_json(d.spillover)},
          {"market_shift", to_json(d.market_shift)},
          {"residual", d.residual},
          {"combined_se", d.combined_se}};
}

inline nlohmann::ordered_json to_json(const Truth& t) {
  return {{"late", t.late},
          {"itt", t.itt},
          {"gpt_gap", t.gpt_gap},
          {"predicted_no_gpt_bias", t.predicted_no_gpt_bias},
          {"used_bids", t.used_bids},
          {"eligible_bids", t.eligible_bids},
          {"decomposition", to_json(t.decomposition)}};
}

}  // namespace signalmarket::sim
