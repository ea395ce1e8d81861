#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "signalmarket/model/hiring.hpp"
#include "signalmarket/random.hpp"

namespace signalmarket::model {

enum class IntegrationMethod { monte_carlo, gauss_hermite };

inline const char* to_string(IntegrationMethod m) {
  return m == IntegrationMethod::monte_carlo ? "monte_carlo" : "gauss_hermite";
}

inline IntegrationMethod parse_integration_method(const std::string& s) {
  if (s == "monte_carlo" || s == "mc") return IntegrationMethod::monte_carlo;
  if (s == "gauss_hermite" || s == "gh") return IntegrationMethod::gauss_hermite;
  throw_input("unknown integration method '", s, "' (expected monte_carlo or gauss_hermite)");
}

struct IntegrationConfig {
  IntegrationMethod method = IntegrationMethod::monte_carlo;
  int draws = 200000;
  int nodes = 64;
  std::uint64_t seed = 0;

  void validate() const {
    if (method == IntegrationMethod::monte_carlo && draws < 1000) {
      throw_input("monte_carlo integration needs draws >= 1000, got ", draws);
    }
    if (method == IntegrationMethod::gauss_hermite && nodes < 16) {
      throw_input("gauss_hermite integration needs nodes >= 16, got ", nodes);
    }
  }
};

// Point estimate of an integral; se is the Monte Carlo standard error (0 for quadrature).
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Nodes and weights with sum_i w_i f(x_i) ~= E[f(Z)], Z ~ N(0,1). Golub-Welsch
// on the Jacobi matrix of the probabilists' Hermite polynomials.
struct QuadratureRule {
  std::vector<double> x;
  std::vector<double> w;
};

inline QuadratureRule gauss_hermite_normal(int n) {
  if (n < 1) throw_input("quadrature needs at least one node");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  if (eig.info() != Eigen::Success) throw_numerical("Gauss-Hermite eigen-decomposition failed for n=", n);
  QuadratureRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.x[i] = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    rule.w[i] = v0 * v0;
  }
  return rule;
}

enum class Regime { pre, post };

// Integrates hiring probabilities over the N-1 rivals' letters (and, for
// productivity-conditioned quantities, over the worker's own letter shock).
//
// Both belief regimes are evaluated on the same underlying draws, so
// post-minus-pre differences are paired and their standard errors small.
// Rival letters under a regime with tool effect a are mu0 + sqrt(V) z + a * 1{access}.
class HiringIntegrator {
 public:
  HiringIntegrator(const ModelParams& params, const IntegrationConfig& cfg, std::uint64_t stream_index = 0)
      : params_(params), cfg_(cfg) {
    params_.validate();
    cfg_.validate();
    rivals_ = params_.N - 1;
    if (cfg_.method == IntegrationMethod::monte_carlo) {
      build_monte_carlo(stream_index);
    } else {
      build_quadrature();
    }
  }

  const ModelParams& params() const { return params_; }

  double regime_effect(Regime r) const { return r == Regime::post ? params_.A : 0.0; }

  // Probability of being hired with own letter h, before rivals are known.
  Estimate ex_ante(double h, Regime r) const {
    const ModelParams beliefs = params_.with_A(regime_effect(r));
    const double e = expected_productivity(h, beliefs);
    const auto& L = r == Regime::post ? log1p_post_ : log1p_pre_;
    return integrate_rivals([&](std::size_t c) { return share(e, L[c]); });
  }

  Estimate ex_ante_slope(double h, Regime r, double step) const {
    const ModelParams beliefs = params_.with_A(regime_effect(r));
    const double lo = expected_productivity(h - step, beliefs);
    const double hi = expected_productivity(h + step, beliefs);
    const auto& L = r == Regime::post ? log1p_post_ : log1p_pre_;
    return integrate_rivals([&](std::size_t c) { return (share(hi, L[c]) - share(lo, L[c])) / (2.0 * step); });
  }

  // Finite-difference slope in h, post minus pre, on paired draws.
  Estimate ex_ante_slope_change(double h, double step) const {
    const ModelParams post = params_;
    const ModelParams pre = params_.with_A(0.0);
    const double post_lo = expected_productivity(h - step, post), post_hi = expected_productivity(h + step, post);
    const double pre_lo = expected_productivity(h - step, pre), pre_hi = expected_productivity(h + step, pre);
    return integrate_rivals([&](std::size_t c) {
      const double d_post = share(post_hi, log1p_post_[c]) - share(post_lo, log1p_post_[c]);
      const double d_pre = share(pre_hi, log1p_pre_[c]) - share(pre_lo, log1p_pre_[c]);
      return (d_post - d_pre) / (2.0 * step);
    });
  }

  // Probability of being hired for a worker of productivity q with access rho.
  // Own letter h = q + rho * a + nu under the regime's tool effect a.
  Estimate given_q(double q, bool rho, Regime r) const {
    const double a = regime_effect(r);
    const ModelParams beliefs = params_.with_A(a);
    const double base = q + (rho ? a : 0.0);
    const auto& L = r == Regime::post ? log1p_post_ : log1p_pre_;
    return integrate_own_and_rivals(
        [&](double nu) { return expected_productivity(base + nu, beliefs); },
        [&](double e, std::size_t c) { return share(e, L[c]); });
  }

  // Averaged over access rho ~ Bernoulli(p).
  Estimate ex_ante_given_q(double q, Regime r) const {
    const double a = regime_effect(r);
    const ModelParams beliefs = params_.with_A(a);
    const double p = params_.p;
    const auto& L = r == Regime::post ? log1p_post_ : log1p_pre_;
    return integrate_own_and_rivals(
        [&](double nu) {
          return std::array<double, 2>{expected_productivity(q + a + nu, beliefs),
                                       expected_productivity(q + nu, beliefs)};
        },
        [&](const std::array<double, 2>& e, std::size_t c) {
          return p * share(e[0], L[c]) + (1.0 - p) * share(e[1], L[c]);
        });
  }

  // P(hire | q, rho, post) - P(hire | q, pre) on paired draws.
  Estimate given_q_change(double q, bool rho) const {
    const ModelParams pre = params_.with_A(0.0);
    const double base_post = q + (rho ? params_.A : 0.0);
    return integrate_own_and_rivals(
        [&](double nu) {
          return std::array<double, 2>{expected_productivity(base_post + nu, params_),
                                       expected_productivity(q + nu, pre)};
        },
        [&](const std::array<double, 2>& e, std::size_t c) {
          return share(e[0], log1p_post_[c]) - share(e[1], log1p_pre_[c]);
        });
  }

  Estimate ex_ante_given_q_change(double q) const {
    const ModelParams pre = params_.with_A(0.0);
    const double p = params_.p;
    return integrate_own_and_rivals(
        [&](double nu) {
          return std::array<double, 3>{expected_productivity(q + params_.A + nu, params_),
                                       expected_productivity(q + nu, params_),
                                       expected_productivity(q + nu, pre)};
        },
        [&](const std::array<double, 3>& e, std::size_t c) {
          return p * share(e[0], log1p_post_[c]) + (1.0 - p) * share(e[1], log1p_post_[c]) -
                 share(e[2], log1p_pre_[c]);
        });
  }

  std::size_t rival_samples() const { return log1p_pre_.size(); }

 private:
  // exp(e) / (1 + S + exp(e)) written as logistic(e - log(1 + S)).
  static double share(double e, double log1p_rivals) { return logistic(e - log1p_rivals); }

  double rival_exp_utility(double z, bool access, Regime r) const {
    const double a = regime_effect(r);
    const double h = params_.mu0 + std::sqrt(params_.letter_variance()) * z + (access ? a : 0.0);
    return std::exp(expected_productivity(h, params_.with_A(a)));
  }

  void build_monte_carlo(std::uint64_t stream_index) {
    const std::size_t D = static_cast<std::size_t>(cfg_.draws);
    log1p_pre_.resize(D);
    log1p_post_.resize(D);
    own_.resize(D);
    weight_.assign(D, 1.0 / static_cast<double>(D));
    Rng rng = substream(cfg_.seed, "hiring_integral", stream_index);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t d = 0; d < D; ++d) {
      double s_pre = 0.0, s_post = 0.0;
      for (int k = 0; k < rivals_; ++k) {
        const double z = normal(rng);
        const bool access = unif(rng) < params_.p;
        s_pre += rival_exp_utility(z, access, Regime::pre);
        s_post += rival_exp_utility(z, access, Regime::post);
      }
      log1p_pre_[d] = std::log1p(s_pre);
      log1p_post_[d] = std::log1p(s_post);
      own_[d] = normal(rng);
    }
  }

  void build_quadrature() {
    rule_ = gauss_hermite_normal(cfg_.nodes);
    const std::size_t per_rival = 2 * rule_.x.size();
    double combos = std::pow(static_cast<double>(per_rival), rivals_);
    if (combos > static_cast<double>(1u << 22)) {
      throw_input("gauss_hermite with ", cfg_.nodes, " nodes and ", rivals_,
                  " rivals is too large; use monte_carlo");
    }
    const std::size_t C = static_cast<std::size_t>(combos);
    log1p_pre_.resize(C);
    log1p_post_.resize(C);
    weight_.resize(C);
    std::vector<std::size_t> digit(static_cast<std::size_t>(rivals_), 0);
    for (std::size_t c = 0; c < C; ++c) {
      double s_pre = 0.0, s_post = 0.0, w = 1.0;
      for (int k = 0; k < rivals_; ++k) {
        const std::size_t node = digit[k] / 2;
        const bool access = digit[k] % 2 == 1;
        w *= rule_.w[node] * (access ? params_.p : 1.0 - params_.p);
        s_pre += rival_exp_utility(rule_.x[node], access, Regime::pre);
        s_post += rival_exp_utility(rule_.x[node], access, Regime::post);
      }
      log1p_pre_[c] = std::log1p(s_pre);
      log1p_post_[c] = std::log1p(s_post);
      weight_[c] = w;
      for (int k = 0; k < rivals_; ++k) {
        if (++digit[k] < per_rival) break;
        digit[k] = 0;
      }
    }
  }

  template <typename Kernel>
  Estimate integrate_rivals(Kernel&& kernel) const {
    if (rivals_ == 0) return Estimate{kernel(0), 0.0};
    if (cfg_.method == IntegrationMethod::gauss_hermite) {
      double acc = 0.0;
      for (std::size_t c = 0; c < weight_.size(); ++c) acc += weight_[c] * kernel(c);
      return Estimate{acc, 0.0};
    }
    return mean_and_se(weight_.size(), [&](std::size_t d) { return kernel(d); });
  }

  // own(nu) maps the worker's letter shock to utilities; kernel(own, c) combines
  // them with rival sample c.
  template <typename Own, typename Kernel>
  Estimate integrate_own_and_rivals(Own&& own, Kernel&& kernel) const {
    const double sigma = std::sqrt(params_.sigma2);
    if (cfg_.method == IntegrationMethod::gauss_hermite) {
      double acc = 0.0;
      for (std::size_t i = 0; i < rule_.x.size(); ++i) {
        const auto u = own(sigma * rule_.x[i]);
        double inner = 0.0;
        if (rivals_ == 0) {
          inner = kernel(u, 0);
        } else {
          for (std::size_t c = 0; c < weight_.size(); ++c) inner += weight_[c] * kernel(u, c);
        }
        acc += rule_.w[i] * inner;
      }
      return Estimate{acc, 0.0};
    }
    return mean_and_se(own_.size(), [&](std::size_t d) { return kernel(own(sigma * own_[d]), d); });
  }

  template <typename Sample>
  static Estimate mean_and_se(std::size_t n, Sample&& sample) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      const double v = sample(d);
      const double delta = v - mean;
      mean += delta / static_cast<double>(d + 1);
      m2 += delta * (v - mean);
    }
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    return Estimate{mean, std::sqrt(var / static_cast<double>(n))};
  }

  ModelParams params_;
  IntegrationConfig cfg_;
  int rivals_ = 0;
  QuadratureRule rule_;
  std::vector<double> log1p_pre_, log1p_post_, weight_, own_;
};

inline Regime regime_for(double regime_A, const ModelParams& params) {
  if (regime_A == 0.0) return Regime::pre;
  if (std::abs(regime_A - params.A) <= 1e-12 * std::max(1.0, params.A)) return Regime::post;
  throw_input("regime_A must be 0 or the model's A (", params.A, "), got ", regime_A);
}

inline double hire_prob_ex_ante(double h, const ModelParams& params, const IntegrationConfig& cfg) {
  return HiringIntegrator(params, cfg).ex_ante(h, Regime::post).value;
}

inline double hire_prob_given_q(double q, bool rho, double regime_A, const ModelParams& params,
                                const IntegrationConfig& cfg) {
  const Regime r = regime_for(regime_A, params);
  return HiringIntegrator(params, cfg).given_q(q, rho, r).value;
}

inline double hire_prob_ex_ante_given_q(double q, const ModelParams& params, const IntegrationConfig& cfg) {
  return HiringIntegrator(params, cfg).ex_ante_given_q(q, Regime::post).value;
}

}  // namespace signalmarket::model
