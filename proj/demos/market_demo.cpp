// Library walk-through: simulate a market, estimate the rollout effect and
// compare it with the simulator's truth.
#include <cstdio>

#include "signalmarket/econ/estimators.hpp"
#include "signalmarket/sim/market.hpp"

using namespace signalmarket;

int main() {
  sim::SimConfig cfg;
  cfg.n_workers = 1500;
  cfg.n_jobs = 6000;
  cfg.compliance = 0.4;
  cfg.seed = 11;
  const auto ds = sim::generate_market(cfg);

  econ::EstimatorOptions o;
  o.timing = {cfg.gpt_period, cfg.tool_period, 1};
  const auto frame = econ::frame_from_bids(ds.bids, o.timing);
  const auto itt = econ::did_itt(frame, o);
  const auto iv = econ::late(frame, o);

  std::printf("%zu bids from %d workers\n", ds.bids.size(), cfg.n_workers);
  std::printf("ITT  %.4f (se %.4f)   truth %.4f\n", itt.b(econ::kItt), itt.s(econ::kItt), ds.truth.itt);
  std::printf("LATE %.4f (se %.4f)   truth %.4f   first-stage F %.0f\n", iv.b("used_ai"), iv.s("used_ai"),
              ds.truth.late, *iv.first_stage_F);
  const auto& d = ds.truth.decomposition;
  std::printf("offer-rate DiD %.5f = direct %.5f + spillover %.5f + market %.5f\n", d.total.value, d.direct.value,
              d.spillover.value, d.market_shift.value);
  return 0;
}
