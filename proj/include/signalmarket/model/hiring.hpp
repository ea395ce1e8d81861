#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "signalmarket/model/posterior.hpp"

namespace signalmarket::model {

// Worker versus the outside option, logit with type-I extreme value shocks.
inline double hire_prob_binary(double h, const ModelParams& params) {
  return logistic(expected_productivity(h, params));
}

// Multinomial logit over N applicants plus an outside option of utility 0.
// Returns the applicant shares; the outside share is 1 minus their sum.
inline std::vector<double> logit_shares(std::span<const double> utilities, double outside_utility = 0.0) {
  double top = outside_utility;
  for (double u : utilities) top = std::max(top, u);
  double denom = std::exp(outside_utility - top);
  std::vector<double> out(utilities.size());
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    out[i] = std::exp(utilities[i] - top);
    denom += out[i];
  }
  for (double& v : out) v /= denom;
  return out;
}

inline std::vector<double> hire_prob_conditional(std::span<const double> h_vec, const ModelParams& params) {
  if (h_vec.size() != static_cast<std::size_t>(params.N)) {
    throw_input("hire_prob_conditional: expected ", params.N, " letters, got ", h_vec.size());
  }
  std::vector<double> utilities(h_vec.size());
  std::transform(h_vec.begin(), h_vec.end(), utilities.begin(),
                 [&](double h) { return expected_productivity(h, params); });
  return logit_shares(utilities);
}

inline double normal_pdf(double x, double mean, double var) {
  const double z = x - mean;
  return std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

// Unconditional density of a rival's letter: (1-p) N(mu0, V) + p N(mu0 + A, V).
inline double rival_quality_density(double h, const ModelParams& params) {
  const double V = params.letter_variance();
  return (1.0 - params.p) * normal_pdf(h, params.mu0, V) + params.p * normal_pdf(h, params.mu0 + params.A, V);
}

}  // namespace signalmarket::model
