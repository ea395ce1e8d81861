#pragma once

#include <cmath>

#include "signalmarket/model/params.hpp"

namespace signalmarket::model {

inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double cover_letter_quality(double q, bool rho, double nu, const ModelParams& params) {
  return q + (rho ? params.A : 0.0) + nu;
}

inline WorkerDraw make_draw(double q, bool rho, double nu, const ModelParams& params) {
  return WorkerDraw{q, rho, nu, cover_letter_quality(q, rho, nu, params)};
}

// Log posterior odds that a letter of quality h was written with the tool.
// Linear in h, so g(h) below is a logistic curve centred at mu0 + A/2 - V log(p/(1-p))/A.
inline double access_log_odds(double h, const ModelParams& params) {
  const double V = params.letter_variance();
  const double A = params.A;
  return std::log(params.p) - std::log1p(-params.p) + (2.0 * A * (h - params.mu0) - A * A) / (2.0 * V);
}

// g(h) = P(rho = 1 | h).
inline double access_posterior(double h, const ModelParams& params) {
  return logistic(access_log_odds(h, params));
}

// E[q | h]: Gaussian shrinkage of h after discounting the expected tool shift A g(h).
inline double expected_productivity(double h, const ModelParams& params) {
  const double g = access_posterior(h, params);
  return params.mu0 + params.shrinkage() * (h - params.mu0 - params.A * g);
}

inline double expected_productivity_slope(double h, const ModelParams& params) {
  const double g = access_posterior(h, params);
  const double V = params.letter_variance();
  return params.shrinkage() * (1.0 - (params.A * params.A / V) * g * (1.0 - g));
}

// Employer posterior when a second signal s = q + eta, eta ~ N(0, review_var),
// is observed alongside the letter (a platform review score). The letter and
// the review share q, so (h, s) is bivariate normal given rho.
struct TwoSignalPosterior {
  ModelParams params;
  double review_var = 1.0;

  double prec_hh = 0, prec_hs = 0, prec_ss = 0;  // inverse covariance of (h, s)
  double weight_h = 0, weight_s = 0;              // E[q | h, s, rho] slopes

  TwoSignalPosterior(const ModelParams& p, double review_variance)
      : params(p), review_var(review_variance) {
    params.validate();
    if (!(review_var > 0.0)) throw_input("review variance must be > 0");
    const double v_hh = params.tau2 + params.sigma2;
    const double v_ss = params.tau2 + review_var;
    const double v_hs = params.tau2;
    const double det = v_hh * v_ss - v_hs * v_hs;
    prec_hh = v_ss / det;
    prec_ss = v_hh / det;
    prec_hs = -v_hs / det;
    weight_h = params.tau2 * (prec_hh + prec_hs);
    weight_s = params.tau2 * (prec_hs + prec_ss);
  }

  double access_log_odds(double h, double s) const {
    const double A = params.A;
    const double dh = h - params.mu0;
    const double ds = s - params.mu0;
    return std::log(params.p) - std::log1p(-params.p) + A * (prec_hh * dh + prec_hs * ds) -
           0.5 * A * A * prec_hh;
  }

  double access_posterior(double h, double s) const { return logistic(access_log_odds(h, s)); }

  double expected_productivity(double h, double s) const {
    const double g = access_posterior(h, s);
    return params.mu0 + weight_h * (h - params.mu0 - params.A * g) + weight_s * (s - params.mu0);
  }
};

}  // namespace signalmarket::model
