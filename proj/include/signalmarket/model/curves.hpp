#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "signalmarket/csv.hpp"
#include "signalmarket/model/integration.hpp"
#include "signalmarket/parallel.hpp"

namespace signalmarket::model {

enum class CurveAxis { cover_letter_h, productivity_q };
enum class CurveGroup { pooled, treated, control, ex_ante };

inline const char* to_string(CurveAxis a) { return a == CurveAxis::cover_letter_h ? "cover_letter_h" : "productivity_q"; }

inline const char* to_string(CurveGroup g) {
  switch (g) {
    case CurveGroup::pooled: return "pooled";
    case CurveGroup::treated: return "treated";
    case CurveGroup::control: return "control";
    case CurveGroup::ex_ante: return "ex_ante";
  }
  return "?";
}

struct CurveRow {
  double x = 0.0;
  double pre_value = 0.0;
  double post_value = 0.0;
};

struct CurveTable {
  CurveAxis axis = CurveAxis::cover_letter_h;
  CurveGroup group = CurveGroup::pooled;
  std::vector<CurveRow> rows;
};

// Inclusive grid min, min + step, ... <= max.
struct GridSpec {
  double min = 0.0;
  double max = 0.0;
  double step = 0.05;

  std::vector<double> points() const {
    if (!std::isfinite(min) || !std::isfinite(max) || !std::isfinite(step)) throw_input("grid bounds must be finite");
    if (!(step > 0.0)) throw_input("grid step must be > 0, got ", step);
    if (min > max) throw_input("empty grid: min ", min, " exceeds max ", max);
    const auto n = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = min + static_cast<double>(i) * step;
    return out;
  }

  // "min:max:step"
  static GridSpec parse(const std::string& text) {
    double parts[3];
    std::size_t start = 0;
    for (int k = 0; k < 3; ++k) {
      const std::size_t end = k < 2 ? text.find(':', start) : text.size();
      if (end == std::string::npos) throw_input("grid must be min:max:step, got '", text, "'");
      const std::string piece = text.substr(start, end - start);
      std::size_t used = 0;
      try {
        parts[k] = std::stod(piece, &used);
      } catch (const std::exception&) {
        used = std::string::npos;
      }
      if (used != piece.size() || piece.empty()) throw_input("grid must be min:max:step, got '", text, "'");
      start = end + 1;
    }
    return GridSpec{parts[0], parts[1], parts[2]};
  }
};

struct FigureCurves {
  CurveTable hire_by_letter;         // h axis, pooled
  CurveTable treated_by_q;           // q axis, workers with access
  CurveTable control_by_q;           // q axis, workers without access
  CurveTable ex_ante_by_q;           // q axis, before access is known
};

struct FigureOptions {
  GridSpec h_grid{-4.0, 4.0, 0.05};
  GridSpec q_grid{-3.0, 3.0, 0.05};
  unsigned threads = 1;
};

// Pre/post curve pairs for the three hiring figures. Each grid point draws
// from its own substream (seed, figure tag, grid index); pre and post share
// that substream.
inline FigureCurves figure_curves(const ModelParams& params, const FigureOptions& opts, const IntegrationConfig& cfg) {
  params.validate();
  cfg.validate();
  const auto hs = opts.h_grid.points();
  const auto qs = opts.q_grid.points();

  FigureCurves out;
  out.hire_by_letter = {CurveAxis::cover_letter_h, CurveGroup::pooled, std::vector<CurveRow>(hs.size())};
  out.treated_by_q = {CurveAxis::productivity_q, CurveGroup::treated, std::vector<CurveRow>(qs.size())};
  out.control_by_q = {CurveAxis::productivity_q, CurveGroup::control, std::vector<CurveRow>(qs.size())};
  out.ex_ante_by_q = {CurveAxis::productivity_q, CurveGroup::ex_ante, std::vector<CurveRow>(qs.size())};

  // Stream index offsets keep the h-grid and q-grid substreams disjoint.
  constexpr std::uint64_t q_offset = 1ULL << 32;

  parallel_for(hs.size(), opts.threads, [&](std::size_t i) {
    HiringIntegrator integ(params, cfg, i);
    out.hire_by_letter.rows[i] = {hs[i], integ.ex_ante(hs[i], Regime::pre).value,
                                  integ.ex_ante(hs[i], Regime::post).value};
  });
  parallel_for(qs.size(), opts.threads, [&](std::size_t i) {
    HiringIntegrator integ(params, cfg, q_offset + i);
    const double q = qs[i];
    const double pre = integ.given_q(q, false, Regime::pre).value;
    const double treated = integ.given_q(q, true, Regime::post).value;
    const double control = integ.given_q(q, false, Regime::post).value;
    out.treated_by_q.rows[i] = {q, pre, treated};
    out.control_by_q.rows[i] = {q, pre, control};
    out.ex_ante_by_q.rows[i] = {q, pre, params.p * treated + (1.0 - params.p) * control};
  });
  return out;
}

using csv::format_g10;

inline void write_curve_csv_header(std::ostream& os) { os << "axis,x,group,regime,value\n"; }

inline void write_curve_csv_rows(std::ostream& os, const CurveTable& table) {
  for (const auto& row : table.rows) {
    os << to_string(table.axis) << ',' << format_g10(row.x) << ',' << to_string(table.group) << ",pre,"
       << format_g10(row.pre_value) << '\n';
    os << to_string(table.axis) << ',' << format_g10(row.x) << ',' << to_string(table.group) << ",post,"
       << format_g10(row.post_value) << '\n';
  }
}

inline void write_curve_csv(std::ostream& os, const std::vector<const CurveTable*>& tables) {
  write_curve_csv_header(os);
  for (const auto* t : tables) write_curve_csv_rows(os, *t);
}

}  // namespace signalmarket::model
