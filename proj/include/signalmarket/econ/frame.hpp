#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "signalmarket/errors.hpp"
#include "signalmarket/sim/dataset.hpp"

namespace signalmarket::econ {

// Rollout calendar used to derive post indicators and event months from the
// integer period of each bid.
struct EventTiming {
  int gpt_period = 3;
  int tool_period = 4;
  int periods_per_month = 1;

  int month_of(int period) const {
    // floor division so negative periods map consistently
    return period >= 0 ? period / periods_per_month : -((-period + periods_per_month - 1) / periods_per_month);
  }
  int tool_month() const { return month_of(tool_period); }
  int reference_month() const { return tool_month() - 1; }

  void validate() const {
    if (periods_per_month < 1) throw_input("periods_per_month must be >= 1");
    if (gpt_period >= tool_period) throw_input("gpt_period must precede tool_period");
  }
};

// Named numeric columns plus integer identifier columns for fixed effects and
// clustering. Missing values are NaN.
struct PanelFrame {
  std::size_t n = 0;
  std::map<std::string, std::vector<double>> num;
  std::map<std::string, std::vector<int>> ids;

  const std::vector<double>& column(const std::string& name) const {
    auto it = num.find(name);
    if (it == num.end()) throw_input("unknown column '", name, "'");
    return it->second;
  }

  const std::vector<int>& id_column(const std::string& name) const {
    auto it = ids.find(name);
    if (it == ids.end()) throw_input("unknown identifier column '", name, "' (have worker, period, job, month)");
    return it->second;
  }

  void add(const std::string& name, std::vector<double> values) {
    if (values.size() != n) throw_input("column '", name, "' has ", values.size(), " rows, frame has ", n);
    num[name] = std::move(values);
  }

  // "a:b:c" is the product of its factors; a factor "name=v" is the indicator
  // that column name equals v.
  std::vector<double> evaluate(std::string_view expr) const {
    if (expr.empty()) throw_input("empty regressor expression");
    std::vector<double> out(n, 1.0);
    std::size_t start = 0;
    while (start <= expr.size()) {
      const std::size_t colon = expr.find(':', start);
      const std::string_view factor =
          expr.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start);
      if (factor.empty()) throw_input("malformed expression '", expr, "'");
      const std::size_t eq = factor.find('=');
      if (eq == std::string_view::npos) {
        const auto& c = column(std::string(factor));
        for (std::size_t i = 0; i < n; ++i) out[i] *= c[i];
      } else {
        const auto& c = column(std::string(factor.substr(0, eq)));
        const std::string rhs(factor.substr(eq + 1));
        double v = 0.0;
        try {
          std::size_t used = 0;
          v = std::stod(rhs, &used);
          if (used != rhs.size()) throw std::invalid_argument(rhs);
        } catch (const std::exception&) {
          throw_input("bad value in factor '", factor, "'");
        }
        for (std::size_t i = 0; i < n; ++i) out[i] *= std::isnan(c[i]) ? c[i] : (c[i] == v ? 1.0 : 0.0);
      }
      if (colon == std::string_view::npos) break;
      start = colon + 1;
    }
    return out;
  }
};

inline PanelFrame frame_from_bids(const std::vector<sim::BidRecord>& bids, const EventTiming& timing) {
  timing.validate();
  PanelFrame f;
  f.n = bids.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto col = [&](auto getter) {
    std::vector<double> v(f.n);
    for (std::size_t i = 0; i < f.n; ++i) v[i] = getter(bids[i]);
    return v;
  };
  using B = sim::BidRecord;
  f.add("access", col([](const B& b) { return b.access ? 1.0 : 0.0; }));
  f.add("used_ai", col([](const B& b) { return b.used_ai ? 1.0 : 0.0; }));
  f.add("tailoring", col([](const B& b) { return b.tailoring; }));
  f.add("wage_norm", col([](const B& b) { return b.wage_norm; }));
  f.add("rank_pct", col([](const B& b) { return b.rank_pct; }));
  f.add("callback", col([](const B& b) { return double(b.callback); }));
  f.add("offer", col([](const B& b) { return double(b.offer); }));
  f.add("edit_minutes", col([](const B& b) { return b.edit_minutes; }));
  f.add("pre_ability", col([&](const B& b) { return b.pre_ability ? *b.pre_ability : nan; }));
  f.add("post_ai", col([&](const B& b) { return b.period >= timing.tool_period ? 1.0 : 0.0; }));
  f.add("post_gpt", col([&](const B& b) { return b.period >= timing.gpt_period ? 1.0 : 0.0; }));
  f.add("period", col([](const B& b) { return double(b.period); }));
  f.add("month", col([&](const B& b) { return double(timing.month_of(b.period)); }));
  auto ids = [&](auto getter) {
    std::vector<int> v(f.n);
    for (std::size_t i = 0; i < f.n; ++i) v[i] = getter(bids[i]);
    return v;
  };
  f.ids["worker"] = ids([](const B& b) { return b.worker_id; });
  f.ids["period"] = ids([](const B& b) { return b.period; });
  f.ids["job"] = ids([](const B& b) { return b.job_id; });
  f.ids["month"] = ids([&](const B& b) { return timing.month_of(b.period); });
  return f;
}

}  // namespace signalmarket::econ
