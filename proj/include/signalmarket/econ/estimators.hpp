#pragma once

#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "signalmarket/econ/specs.hpp"

namespace signalmarket::econ {

struct EstimatorOptions {
  EventTiming timing{};
  std::string outcome = "tailoring";
  std::vector<std::string> controls{"wage_norm", "rank_pct"};
  bool gpt_control = true;  // include PostGPT x Access
  std::vector<std::string> fe_dims{"worker", "period"};
  std::string cluster_dim = "worker";
};

inline const std::string kItt = "post_ai:access";
inline const std::string kGpt = "post_gpt:access";

// Two-sided 95% critical value with G-1 degrees of freedom.
inline double t_critical(int n_clusters, double level = 0.95) {
  if (n_clusters < 2) throw_input("need at least 2 clusters");
  boost::math::students_t dist(n_clusters - 1.0);
  return boost::math::quantile(dist, 0.5 + level / 2.0);
}

namespace detail {

inline void require_cells(const PanelFrame& f, const EventTiming& timing) {
  const auto& access = f.column("access");
  const auto& period = f.id_column("period");
  std::set<int> periods(period.begin(), period.end());
  std::map<std::pair<int, int>, long> cell;
  for (std::size_t i = 0; i < f.n; ++i) ++cell[{access[i] != 0.0 ? 1 : 0, period[i]}];
  for (int g : {0, 1}) {
    for (int t : periods) {
      if (!cell.count({g, t})) {
        throw_input("no bids from ", g ? "access" : "non-access", " workers in period ", t,
                    "; every group x period cell needs observations");
      }
    }
  }
  bool pre = false, post = false;
  for (int t : periods) (t < timing.tool_period ? pre : post) = true;
  if (!pre || !post) throw_input("data must cover periods both before and after tool_period ", timing.tool_period);
}

inline RegressionSpec base_spec(const EstimatorOptions& o) {
  RegressionSpec s;
  s.outcome = o.outcome;
  s.fe_dims = o.fe_dims;
  s.cluster_dim = o.cluster_dim;
  return s;
}

}  // namespace detail

// Outcome on PostAI x Access (the ITT) and PostGPT x Access with worker and
// period effects plus controls.
inline EstimateResult did_itt(const PanelFrame& f, const EstimatorOptions& o = {}) {
  detail::require_cells(f, o.timing);
  RegressionSpec s = detail::base_spec(o);
  s.regressors = {kItt};
  if (o.gpt_control) s.regressors.push_back(kGpt);
  s.regressors.insert(s.regressors.end(), o.controls.begin(), o.controls.end());
  return fit(f, s);
}

// Per-use effect: used_ai instrumented by PostAI x Access.
inline EstimateResult late(const PanelFrame& f, const EstimatorOptions& o = {}) {
  detail::require_cells(f, o.timing);
  RegressionSpec s = detail::base_spec(o);
  s.instruments = {{"used_ai", kItt}};
  if (o.gpt_control) s.regressors.push_back(kGpt);
  s.regressors.insert(s.regressors.end(), o.controls.begin(), o.controls.end());
  return fit(f, s);
}

struct EventRow {
  int k = 0;  // months relative to the rollout month
  double beta = 0.0, se = 0.0, ci_lo = 0.0, ci_hi = 0.0;
};

struct EventStudyResult {
  EstimateResult fit;
  std::vector<EventRow> rows;
  int reference_k = -1;
};

namespace detail {

inline std::vector<int> months_present(const PanelFrame& f) {
  const auto& m = f.id_column("month");
  std::set<int> s(m.begin(), m.end());
  return {s.begin(), s.end()};
}

inline std::string month_term(int m, const std::string& var) { return "month=" + std::to_string(m) + ":" + var; }

inline std::vector<EventRow> event_rows(const EstimateResult& r, const std::vector<int>& months, int ref,
                                        int tool_month, const std::string& var) {
  const double crit = t_critical(r.n_clusters);
  std::vector<EventRow> rows;
  for (int m : months) {
    EventRow row;
    row.k = m - tool_month;
    if (m != ref) {
      const std::string name = month_term(m, var);
      if (!r.has(name)) continue;
      row.beta = r.b(name);
      row.se = r.s(name);
      row.ci_lo = row.beta - crit * row.se;
      row.ci_hi = row.beta + crit * row.se;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace detail

// Month x Access coefficients relative to the month before rollout.
// PostGPT x Access is included but is dropped when the month dummies span it.
inline EventStudyResult event_study(const PanelFrame& f, const EstimatorOptions& o = {}) {
  const auto months = detail::months_present(f);
  const int tool_month = o.timing.tool_month();
  const int ref = o.timing.reference_month();
  if (std::find(months.begin(), months.end(), ref) == months.end()) {
    throw_input("reference month ", ref, " (the month before rollout) has no observations");
  }
  int pre = 0, post = 0;
  for (int m : months) (m < tool_month ? pre : post) += 1;
  if (pre < 2 || post < 2) {
    throw_input("event study needs at least 2 months before and 2 after rollout, have ", pre, " and ", post);
  }
  RegressionSpec s = detail::base_spec(o);
  for (int m : months) {
    if (m != ref) s.regressors.push_back(detail::month_term(m, "access"));
  }
  if (o.gpt_control) {
    s.regressors.push_back(kGpt);
    s.droppable.insert(kGpt);
  }
  s.regressors.insert(s.regressors.end(), o.controls.begin(), o.controls.end());
  EventStudyResult out;
  out.fit = fit(f, s);
  out.reference_k = ref - tool_month;
  out.rows = detail::event_rows(out.fit, months, ref, tool_month, "access");
  return out;
}

inline void write_event_csv(std::ostream& os, const std::vector<EventRow>& rows) {
  os << "k,beta,se,ci_lo,ci_hi\n";
  for (const auto& r : rows) {
    os << r.k << ',' << csv::format_double(r.beta) << ',' << csv::format_double(r.se) << ','
       << csv::format_double(r.ci_lo) << ',' << csv::format_double(r.ci_hi) << '\n';
  }
}

inline const std::string kTriple = "post_ai:access:pre_ability";

struct HeterogeneityResult {
  EstimateResult fit;
  int workers_excluded = 0;  // no pre-rollout bids, so no pre_ability
};

// Adds PostAI x Access x pre_ability. PostAI x pre_ability absorbs the
// regression to the mean that pre_ability carries for every worker.
inline HeterogeneityResult heterogeneity(const PanelFrame& f, const EstimatorOptions& o = {}) {
  detail::require_cells(f, o.timing);
  const auto& ab = f.column("pre_ability");
  const auto& w = f.id_column("worker");
  std::set<int> all, missing;
  for (std::size_t i = 0; i < f.n; ++i) {
    all.insert(w[i]);
    if (std::isnan(ab[i])) missing.insert(w[i]);
  }
  if (missing.size() == all.size()) throw_input("no worker has a pre_ability value");
  RegressionSpec s = detail::base_spec(o);
  s.regressors = {kItt};
  if (o.gpt_control) s.regressors.push_back(kGpt);
  s.regressors.push_back(kTriple);
  s.regressors.push_back("post_ai:pre_ability");
  s.regressors.insert(s.regressors.end(), o.controls.begin(), o.controls.end());
  HeterogeneityResult out;
  out.fit = fit(f, s);
  out.workers_excluded = static_cast<int>(missing.size());
  return out;
}

enum class SignalVar { tailoring, rank_pct };
enum class SignalOutcome { callback, offer };

inline std::string to_string(SignalVar v) { return v == SignalVar::tailoring ? "tailoring" : "rank_pct"; }
inline std::string to_string(SignalOutcome v) { return v == SignalOutcome::callback ? "callback" : "offer"; }

inline SignalVar parse_signal_var(const std::string& s) {
  if (s == "tailoring") return SignalVar::tailoring;
  if (s == "rank_pct" || s == "rank") return SignalVar::rank_pct;
  throw_input("unknown signal regressor '", s, "' (expected tailoring or rank_pct)");
}

inline SignalOutcome parse_signal_outcome(const std::string& s) {
  if (s == "callback") return SignalOutcome::callback;
  if (s == "offer") return SignalOutcome::offer;
  throw_input("unknown signal outcome '", s, "' (expected callback or offer)");
}

struct SignalPowerResult {
  EstimateResult fit;
  std::string interaction;         // static form: post_ai:<regressor>
  std::vector<EventRow> dynamic;   // month-by-month form
};

// Outcome on the signal and PostAI x signal (or month x signal) with worker
// and period effects. The other signal enters with its own PostAI
// interaction, since both are read by the same employers and move together;
// the wage is a control.
inline SignalPowerResult signal_power(const PanelFrame& f, SignalVar var, SignalOutcome outcome, bool dynamic = false,
                                      const EstimatorOptions& o = {}) {
  const std::string v = to_string(var);
  const std::string other = var == SignalVar::tailoring ? "rank_pct" : "tailoring";
  RegressionSpec s = detail::base_spec(o);
  s.outcome = to_string(outcome);
  s.regressors = {v};
  SignalPowerResult out;
  std::vector<int> months;
  const int ref = o.timing.reference_month();
  if (dynamic) {
    months = detail::months_present(f);
    if (std::find(months.begin(), months.end(), ref) == months.end()) {
      throw_input("reference month ", ref, " has no observations");
    }
    for (int m : months) {
      if (m != ref) s.regressors.push_back(detail::month_term(m, v));
    }
  } else {
    out.interaction = "post_ai:" + v;
    s.regressors.push_back(out.interaction);
  }
  s.regressors.push_back(other);
  s.regressors.push_back("post_ai:" + other);
  s.regressors.push_back("wage_norm");
  out.fit = fit(f, s);
  if (dynamic) out.dynamic = detail::event_rows(out.fit, months, ref, o.timing.tool_month(), v);
  return out;
}

struct EditingResult {
  EstimateResult worker_level;  // mean edit minutes on standardized pre_ability
  EstimateResult offer;         // bid level, worker effects
  EstimateResult callback;
  long sample_bids = 0;
};

// Tool-assisted bids with less than an hour of editing.
inline EditingResult editing_regressions(const PanelFrame& f, double max_minutes = 60.0) {
  const auto& used = f.column("used_ai");
  const auto& minutes = f.column("edit_minutes");
  const auto& ab = f.column("pre_ability");
  const auto& w = f.id_column("worker");
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < f.n; ++i) {
    if (used[i] != 0.0 && minutes[i] < max_minutes) rows.push_back(i);
  }
  if (rows.empty()) throw_input("no tool-assisted bids with edit_minutes < ", max_minutes);

  PanelFrame sub;
  sub.n = rows.size();
  for (const auto& [name, col] : f.num) {
    std::vector<double> v(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) v[r] = col[rows[r]];
    sub.num[name] = std::move(v);
  }
  for (const auto& [name, col] : f.ids) {
    std::vector<int> v(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) v[r] = col[rows[r]];
    sub.ids[name] = std::move(v);
  }

  EditingResult out;
  out.sample_bids = static_cast<long>(rows.size());

  // (a) one row per worker
  std::map<int, std::pair<double, int>> per_worker;
  std::map<int, double> ability;
  for (std::size_t i : rows) {
    if (std::isnan(ab[i])) continue;
    auto& c = per_worker[w[i]];
    c.first += minutes[i];
    ++c.second;
    ability[w[i]] = ab[i];
  }
  if (per_worker.size() < 3) throw_input("worker-level editing regression needs at least 3 workers");
  PanelFrame wf;
  wf.n = per_worker.size();
  std::vector<double> mean_minutes, pre;
  std::vector<int> ids;
  for (const auto& [id, c] : per_worker) {
    mean_minutes.push_back(c.first / c.second);
    pre.push_back(ability[id]);
    ids.push_back(id);
  }
  wf.num["mean_edit_minutes"] = mean_minutes;
  wf.num["pre_ability"] = pre;
  wf.ids["worker"] = ids;
  RegressionSpec a;
  a.outcome = "mean_edit_minutes";
  a.regressors = {"pre_ability"};
  a.fe_dims = {};
  a.cluster_dim = "worker";
  out.worker_level = fit(wf, a);

  // (b) outcomes on editing time
  for (auto [outcome, slot] : {std::pair{"offer", &out.offer}, std::pair{"callback", &out.callback}}) {
    RegressionSpec b;
    b.outcome = outcome;
    b.regressors = {"edit_minutes", "wage_norm", "rank_pct"};
    b.fe_dims = {"worker"};
    b.cluster_dim = "worker";
    *slot = fit(sub, b);
  }
  return out;
}

}  // namespace signalmarket::econ
