#pragma once

#include <cmath>

#include "signalmarket/errors.hpp"

namespace signalmarket::model {

// Primitives of the screening model. Productivity q ~ N(mu0, tau2), letter
// shock nu ~ N(0, sigma2), AI access with probability p, and a letter-quality
// shift A for letters written with the tool. N applicants compete per job.
struct ModelParams {
  double mu0 = 0.0;
  double tau2 = 1.0;
  double sigma2 = 1.0;
  double p = 0.5;
  double A = 1.0;
  int N = 3;

  // Defaults for the hiring curves.
  static ModelParams figure_defaults() { return ModelParams{}; }

  ModelParams with_A(double a) const {
    ModelParams out = *this;
    out.A = a;
    return out;
  }

  double letter_variance() const { return tau2 + sigma2; }
  double shrinkage() const { return tau2 / (tau2 + sigma2); }

  void validate() const {
    if (!std::isfinite(mu0)) throw_input("mu0 must be finite");
    if (!(tau2 > 0.0) || !std::isfinite(tau2)) throw_input("tau2 must be > 0, got ", tau2);
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw_input("sigma2 must be > 0, got ", sigma2);
    if (!(p > 0.0 && p < 1.0)) throw_input("p must lie in (0,1), got ", p);
    if (!(A >= 0.0) || !std::isfinite(A)) throw_input("A must be >= 0, got ", A);
    if (N < 1) throw_input("N must be >= 1, got ", N);
  }
};

// One realized application: h = q + rho * A + nu.
struct WorkerDraw {
  double q = 0.0;
  bool rho = false;
  double nu = 0.0;
  double h = 0.0;
};

}  // namespace signalmarket::model
