#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "signalmarket/errors.hpp"

namespace signalmarket::econ {

struct EstimateResult {
  std::vector<std::string> names;
  Eigen::VectorXd coef;
  Eigen::VectorXd se;
  Eigen::MatrixXd vcov;
  long n_obs = 0;
  int n_clusters = 0;
  std::optional<double> first_stage_F;
  // Diagnostics filled by the specification layer.
  std::vector<std::string> dropped_collinear;
  int singletons_dropped = 0;
  int missing_dropped = 0;
  int sweeps = 0;

  int index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
  bool has(const std::string& name) const { return index(name) >= 0; }
  double b(const std::string& name) const { return coef(checked(name)); }
  double s(const std::string& name) const { return se(checked(name)); }

 private:
  int checked(const std::string& name) const {
    const int i = index(name);
    if (i < 0) throw_input("no coefficient named '", name, "'");
    return i;
  }
};

// Dense cluster codes 0..G-1 in order of first appearance.
inline std::vector<int> cluster_codes(const std::vector<int>& raw, int& G) {
  std::unordered_map<int, int> code;
  std::vector<int> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = code.emplace(raw[i], static_cast<int>(code.size())).first->second;
  G = static_cast<int>(code.size());
  return out;
}

// CR1 sandwich: (G/(G-1)) ((n-1)/(n-K)) B^-1 (sum_g S_g' S_g) B^-1 with
// B = W'W and S_g the cluster sum of w_i e_i. K counts the regressors plus any
// absorbed fixed-effect parameters not nested in the clusters.
inline Eigen::MatrixXd cr1_vcov(const Eigen::MatrixXd& W, const Eigen::VectorXd& e, const std::vector<int>& codes,
                                int G, int absorbed_dof) {
  const Eigen::Index n = W.rows(), k = W.cols();
  if (G < 2) throw_input("clustered standard errors need at least 2 clusters, got ", G);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(G, k);
  for (Eigen::Index i = 0; i < n; ++i) S.row(codes[i]) += W.row(i) * e(i);
  const Eigen::MatrixXd meat = S.transpose() * S;
  const Eigen::MatrixXd bread = (W.transpose() * W).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  const double K = static_cast<double>(k + absorbed_dof);
  if (n - K <= 0) throw_input("not enough observations (", n, ") for ", K, " parameters");
  const double adj = (G / (G - 1.0)) * ((n - 1.0) / (n - K));
  return adj * bread * meat * bread;
}

// Indices of columns that are linear combinations of earlier ones (relative
// tolerance on the pivots of a column-pivoted QR, preferring earlier columns).
inline std::vector<int> collinear_columns(const Eigen::MatrixXd& X, double threshold = 1e-10) {
  std::vector<int> out;
  std::vector<int> kept;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double nj = X.col(j).norm();
    if (nj == 0.0) {
      out.push_back(static_cast<int>(j));
      continue;
    }
    Eigen::MatrixXd sub(X.rows(), kept.size() + 1);
    for (std::size_t c = 0; c < kept.size(); ++c) sub.col(c) = X.col(kept[c]);
    sub.col(kept.size()) = X.col(j);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
    qr.setThreshold(threshold);
    if (qr.rank() < static_cast<Eigen::Index>(kept.size() + 1)) {
      out.push_back(static_cast<int>(j));
    } else {
      kept.push_back(static_cast<int>(j));
    }
  }
  return out;
}

inline void require_full_rank(const Eigen::MatrixXd& X, const std::vector<std::string>& names, const char* what) {
  const auto bad = collinear_columns(X);
  if (bad.empty()) return;
  std::string list;
  for (int j : bad) list += (list.empty() ? "" : ", ") + names[j];
  throw_input(what, " is rank deficient; collinear column(s): ", list);
}

inline Eigen::VectorXd qr_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  return qr.solve(y);
}

inline EstimateResult ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                          const std::vector<int>& clusters, int absorbed_dof = 0) {
  if (X.rows() != y.size() || static_cast<Eigen::Index>(clusters.size()) != y.size()) {
    throw_input("ols: y, X and clusters must have the same number of rows");
  }
  if (static_cast<Eigen::Index>(names.size()) != X.cols()) throw_input("ols: one name per column required");
  if (X.cols() == 0) throw_input("ols: no regressors");
  require_full_rank(X, names, "design matrix");
  EstimateResult r;
  r.names = names;
  r.coef = qr_solve(X, y);
  const Eigen::VectorXd e = y - X * r.coef;
  const auto codes = cluster_codes(clusters, r.n_clusters);
  r.vcov = cr1_vcov(X, e, codes, r.n_clusters, absorbed_dof);
  r.se = r.vcov.diagonal().cwiseMax(0.0).cwiseSqrt();
  r.n_obs = y.size();
  return r;
}

// Two-stage least squares. X = [endogenous, exogenous] is instrumented by
// Z = [instruments, exogenous]. Standard errors use the structural residuals
// y - X b. first_stage_F is the smallest conventional F statistic on the
// excluded instruments across the endogenous columns.
inline EstimateResult tsls(const Eigen::VectorXd& y, const Eigen::MatrixXd& endog, const Eigen::MatrixXd& instr,
                           const Eigen::MatrixXd& exog, const std::vector<std::string>& endog_names,
                           const std::vector<std::string>& instr_names, const std::vector<std::string>& exog_names,
                           const std::vector<int>& clusters, int absorbed_dof = 0) {
  const Eigen::Index n = y.size();
  if (endog.rows() != n || instr.rows() != n || exog.rows() != n) throw_input("tsls: row counts differ");
  if (endog.cols() == 0) throw_input("tsls: no endogenous regressor");
  if (instr.cols() < endog.cols()) {
    throw_input("tsls: ", instr.cols(), " instrument(s) for ", endog.cols(), " endogenous regressor(s)");
  }
  Eigen::MatrixXd Z(n, instr.cols() + exog.cols());
  Z << instr, exog;
  std::vector<std::string> znames = instr_names;
  znames.insert(znames.end(), exog_names.begin(), exog_names.end());
  require_full_rank(Z, znames, "instrument matrix");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qz(Z);
  qz.setThreshold(1e-10);
  Eigen::MatrixXd Xhat(n, endog.cols() + exog.cols());
  double min_F = std::numeric_limits<double>::infinity();
  const double q = static_cast<double>(instr.cols());
  const double df = static_cast<double>(n - Z.cols() - absorbed_dof);
  for (Eigen::Index j = 0; j < endog.cols(); ++j) {
    const Eigen::VectorXd d = endog.col(j);
    const Eigen::VectorXd fitted = Z * qz.solve(d);
    Xhat.col(j) = fitted;
    const double rss_u = (d - fitted).squaredNorm();
    double rss_r = d.squaredNorm();
    if (exog.cols() > 0) rss_r = (d - exog * qr_solve(exog, d)).squaredNorm();
    const double gain = std::max(0.0, rss_r - rss_u);
    double F = std::numeric_limits<double>::infinity();
    if (rss_u > 1e-300 * std::max(1.0, rss_r)) F = (gain / q) / (rss_u / df);
    if (gain <= 1e-12 * std::max(rss_r, 1e-300)) F = 0.0;
    min_F = std::min(min_F, F);
  }
  if (!(min_F >= 1e-6)) {
    throw_numerical("first stage is degenerate: F = ", min_F, " on the excluded instruments");
  }
  Xhat.rightCols(exog.cols()) = exog;
  Eigen::MatrixXd X(n, endog.cols() + exog.cols());
  X << endog, exog;
  std::vector<std::string> names = endog_names;
  names.insert(names.end(), exog_names.begin(), exog_names.end());
  require_full_rank(Xhat, names, "second-stage design");

  EstimateResult r;
  r.names = names;
  r.coef = qr_solve(Xhat, y);
  const Eigen::VectorXd e = y - X * r.coef;
  const auto codes = cluster_codes(clusters, r.n_clusters);
  r.vcov = cr1_vcov(Xhat, e, codes, r.n_clusters, absorbed_dof);
  r.se = r.vcov.diagonal().cwiseMax(0.0).cwiseSqrt();
  r.n_obs = n;
  r.first_stage_F = min_F;
  return r;
}

inline nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "NaN" : (v > 0 ? "Infinity" : "-Infinity");
}

inline nlohmann::ordered_json to_json(const EstimateResult& r) {
  nlohmann::ordered_json coef = nlohmann::ordered_json::object(), se = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    coef[r.names[i]] = json_number(r.coef(i));
    se[r.names[i]] = json_number(r.se(i));
  }
  nlohmann::ordered_json j = {{"coef", coef},
                              {"se", se},
                              {"n_obs", r.n_obs},
                              {"n_clusters", r.n_clusters},
                              {"first_stage_F", r.first_stage_F ? json_number(*r.first_stage_F) : nlohmann::ordered_json(nullptr)}};
  j["diagnostics"] = {{"dropped_collinear", r.dropped_collinear},
                      {"singletons_dropped", r.singletons_dropped},
                      {"missing_dropped", r.missing_dropped},
                      {"within_sweeps", r.sweeps}};
  return j;
}

}  // namespace signalmarket::econ
