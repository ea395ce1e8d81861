#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "signalmarket/errors.hpp"

namespace signalmarket::econ {

// One fixed-effect dimension with ids recoded to 0..levels-1 in order of first
// appearance.
struct FeDimension {
  std::string name;
  std::vector<int> group;
  int levels = 0;
};

inline FeDimension make_fe_dimension(std::string name, const std::vector<int>& raw) {
  FeDimension d;
  d.name = std::move(name);
  d.group.resize(raw.size());
  std::unordered_map<int, int> code;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, fresh] = code.emplace(raw[i], d.levels);
    if (fresh) ++d.levels;
    d.group[i] = it->second;
  }
  return d;
}

// Repeatedly removes rows that are alone in some fixed-effect group. Returns
// the keep mask; dropped counts the removed rows.
inline std::vector<char> drop_singletons(const std::vector<const std::vector<int>*>& dims, std::vector<char> keep,
                                         int& dropped) {
  dropped = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto* ids : dims) {
      std::unordered_map<int, int> count;
      for (std::size_t i = 0; i < keep.size(); ++i) {
        if (keep[i]) ++count[(*ids)[i]];
      }
      for (std::size_t i = 0; i < keep.size(); ++i) {
        if (keep[i] && count[(*ids)[i]] == 1) {
          keep[i] = 0;
          ++dropped;
          changed = true;
        }
      }
    }
  }
  return keep;
}

struct WithinOptions {
  double tol = 1e-10;
  int max_sweeps = 200;
};

struct WithinReport {
  int sweeps = 0;
  double last_change = 0.0;
};

// Alternating projections: subtract group means for each dimension in turn
// until a full sweep moves no entry by more than tol. One dimension converges
// in a single sweep.
inline WithinReport within_transform(Eigen::MatrixXd& M, const std::vector<FeDimension>& dims,
                                     const WithinOptions& opt = {}) {
  if (dims.empty()) throw_input("within_transform needs at least one fixed-effect dimension");
  for (const auto& d : dims) {
    if (static_cast<Eigen::Index>(d.group.size()) != M.rows()) {
      throw_input("fixed effect '", d.name, "' has ", d.group.size(), " rows, data has ", M.rows());
    }
  }
  const Eigen::Index n = M.rows(), p = M.cols();
  WithinReport rep;
  std::vector<Eigen::MatrixXd> sums(dims.size());
  std::vector<std::vector<double>> counts(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) {
    counts[k].assign(dims[k].levels, 0.0);
    for (int g : dims[k].group) counts[k][g] += 1.0;
  }
  const int max_sweeps = dims.size() == 1 ? 1 : opt.max_sweeps;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double change = 0.0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      const auto& grp = dims[k].group;
      Eigen::MatrixXd& S = sums[k];
      S.setZero(dims[k].levels, p);
      for (Eigen::Index c = 0; c < p; ++c) {
        const double* col = M.col(c).data();
        double* s = S.col(c).data();
        for (Eigen::Index i = 0; i < n; ++i) s[grp[i]] += col[i];
      }
      for (int g = 0; g < dims[k].levels; ++g) S.row(g) /= counts[k][g];
      change = std::max(change, S.cwiseAbs().maxCoeff());
      for (Eigen::Index c = 0; c < p; ++c) {
        double* col = M.col(c).data();
        const double* s = S.col(c).data();
        for (Eigen::Index i = 0; i < n; ++i) col[i] -= s[grp[i]];
      }
    }
    rep.sweeps = sweep;
    rep.last_change = change;
    if (dims.size() == 1 || change < opt.tol) return rep;
  }
  std::string names;
  for (const auto& d : dims) names += (names.empty() ? "" : ",") + d.name + "(" + std::to_string(d.levels) + ")";
  throw_numerical("within transform did not converge after ", opt.max_sweeps, " sweeps over [", names,
                  "]: last sweep changed values by ", rep.last_change, " (tolerance ", opt.tol, ")");
}

}  // namespace signalmarket::econ
