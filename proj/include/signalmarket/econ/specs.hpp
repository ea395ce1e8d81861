#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "signalmarket/csv.hpp"
#include "signalmarket/econ/frame.hpp"
#include "signalmarket/econ/ols.hpp"
#include "signalmarket/econ/within.hpp"

namespace signalmarket::econ {

struct RegressionSpec {
  std::string outcome;
  std::vector<std::string> regressors;                 // exogenous expressions
  std::vector<std::string> fe_dims{"worker", "period"};
  std::map<std::string, std::string> instruments;      // endogenous -> instrument
  std::string cluster_dim = "worker";
  // Regressors listed here may be dropped when collinear (named in the result);
  // any other collinearity is an error.
  std::set<std::string> droppable;
  WithinOptions within{};
};

namespace detail {

// Absorbed parameters that CR1 must count: the first dimension absorbs the
// intercept, later ones lose one level each; dimensions nested in the
// clusters cost nothing.
inline int absorbed_dof(const std::vector<FeDimension>& dims, const std::vector<int>& clusters) {
  int dof = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    std::vector<int> owner(dims[k].levels, -1);
    bool nested = true;
    for (std::size_t i = 0; i < clusters.size() && nested; ++i) {
      int& o = owner[dims[k].group[i]];
      if (o == -1) o = clusters[i];
      else if (o != clusters[i]) nested = false;
    }
    if (!nested) dof += dims[k].levels - (k == 0 ? 0 : 1);
  }
  return dof;
}

}  // namespace detail

// Builds the design for spec, drops incomplete rows and singleton groups,
// absorbs the fixed effects and runs OLS or 2SLS with CR1 clustered errors.
inline EstimateResult fit(const PanelFrame& frame, const RegressionSpec& spec) {
  std::vector<std::string> endog_names, instr_names;
  for (const auto& [e, z] : spec.instruments) {
    endog_names.push_back(e);
    instr_names.push_back(z);
  }
  const bool iv = !endog_names.empty();

  std::vector<std::vector<double>> cols;
  cols.push_back(frame.evaluate(spec.outcome));
  for (const auto& e : endog_names) cols.push_back(frame.evaluate(e));
  for (const auto& z : instr_names) cols.push_back(frame.evaluate(z));
  for (const auto& x : spec.regressors) cols.push_back(frame.evaluate(x));
  const std::vector<int>& cluster_raw = frame.id_column(spec.cluster_dim);

  std::vector<char> keep(frame.n, 1);
  int missing = 0;
  for (std::size_t i = 0; i < frame.n; ++i) {
    for (const auto& c : cols) {
      if (!std::isfinite(c[i])) {
        keep[i] = 0;
        ++missing;
        break;
      }
    }
  }
  std::vector<const std::vector<int>*> fe_raw;
  for (const auto& d : spec.fe_dims) fe_raw.push_back(&frame.id_column(d));
  int singletons = 0;
  if (!fe_raw.empty()) keep = drop_singletons(fe_raw, keep, singletons);

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < frame.n; ++i) {
    if (keep[i]) rows.push_back(i);
  }
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) throw_input("no usable observations for outcome '", spec.outcome, "'");

  Eigen::MatrixXd M(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (Eigen::Index r = 0; r < n; ++r) M(r, c) = cols[c][rows[r]];
  }
  std::vector<int> clusters(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) clusters[r] = cluster_raw[rows[r]];

  std::vector<FeDimension> dims;
  for (std::size_t k = 0; k < spec.fe_dims.size(); ++k) {
    std::vector<int> sub(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) sub[r] = (*fe_raw[k])[rows[r]];
    dims.push_back(make_fe_dimension(spec.fe_dims[k], sub));
  }
  const Eigen::VectorXd pre_norm = M.colwise().norm();
  int sweeps = 0;
  if (!dims.empty()) {
    sweeps = within_transform(M, dims, spec.within).sweeps;
  } else {
    // no fixed effects: add an intercept
    M.conservativeResize(Eigen::NoChange, M.cols() + 1);
    M.col(M.cols() - 1).setOnes();
  }

  // Column layout of M: outcome | endog | instruments | exog [| intercept]
  const Eigen::Index ne = static_cast<Eigen::Index>(endog_names.size());
  const Eigen::Index nz = static_cast<Eigen::Index>(instr_names.size());
  std::vector<std::string> exog_names = spec.regressors;
  if (dims.empty()) exog_names.push_back("(intercept)");
  const Eigen::Index x0 = 1 + ne + nz;

  // Drop exogenous columns that the fixed effects absorb or that repeat
  // earlier regressors.
  std::vector<std::string> dropped, kept_names;
  std::vector<Eigen::Index> kept_cols;
  for (std::size_t j = 0; j < exog_names.size(); ++j) {
    const Eigen::Index c = x0 + static_cast<Eigen::Index>(j);
    const double after = M.col(c).norm();
    const double before = c < pre_norm.size() ? pre_norm(c) : after;
    bool collinear = !(after > 1e-10 * before);
    if (!collinear) {
      Eigen::MatrixXd trial(n, static_cast<Eigen::Index>(kept_cols.size()) + 1);
      for (std::size_t k = 0; k < kept_cols.size(); ++k) trial.col(k) = M.col(kept_cols[k]);
      trial.col(trial.cols() - 1) = M.col(c);
      collinear = !collinear_columns(trial).empty();
    }
    if (!collinear) {
      kept_cols.push_back(c);
      kept_names.push_back(exog_names[j]);
    } else if (spec.droppable.count(exog_names[j])) {
      dropped.push_back(exog_names[j]);
    } else {
      throw_input("regressor '", exog_names[j], "' is collinear with the fixed effects or earlier regressors");
    }
  }

  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(kept_cols.size()));
  for (std::size_t k = 0; k < kept_cols.size(); ++k) X.col(k) = M.col(kept_cols[k]);
  const Eigen::VectorXd y = M.col(0);
  const int adof = dims.empty() ? 0 : detail::absorbed_dof(dims, clusters);
  EstimateResult r = iv ? tsls(y, M.middleCols(1, ne), M.middleCols(1 + ne, nz), X, endog_names, instr_names,
                               kept_names, clusters, adof)
                        : ols(y, X, kept_names, clusters, adof);
  r.dropped_collinear = dropped;
  r.singletons_dropped = singletons;
  r.missing_dropped = missing;
  r.sweeps = sweeps;
  return r;
}

}  // namespace signalmarket::econ
