#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "signalmarket/econ/estimators.hpp"
#include "signalmarket/model/curves.hpp"
#include "signalmarket/parallel.hpp"
#include "signalmarket/sim/io.hpp"
#include "signalmarket/sim/market.hpp"
#include "signalmarket/sim/presets.hpp"
#include "signalmarket/sim/summary.hpp"
#include "signalmarket/text/score.hpp"
#include "signalmarket/validate/acceptance.hpp"

#ifndef SIGNALMARKET_VERSION
#define SIGNALMARKET_VERSION "0.0.0"
#endif

namespace signalmarket::cli {

using json = nlohmann::ordered_json;

// Command-line flags bound to the fields of a settings struct. Settings are
// layered: defaults, then a manifest given with --config, then explicit flags.
template <class S>
class FlagSet {
 public:
  // flag is "--name" for options, a bare name for a positional argument.
  template <class Proj>
  CLI::Option* add(CLI::App* app, S& target, const std::string& flag, Proj proj, const std::string& desc) {
    using T = std::remove_reference_t<decltype(proj(std::declval<S&>()))>;
    CLI::Option* opt = app->add_option(flag, proj(target), desc);
    const std::string key = flag.substr(flag.find_first_not_of('-'));
    fields_.push_back(Field{
        key, opt, [proj](S& dst, S src) { proj(dst) = proj(src); },
        [proj](S s) { return json(proj(s)); },
        [proj, key](S& s, const nlohmann::json& j) {
          try {
            proj(s) = j.get<T>();
          } catch (const nlohmann::json::exception&) {
            throw_input("config value for '", key, "' has the wrong type: ", j.dump());
          }
        }});
    return opt;
  }

  // Fields not given on the command line take their value from base.
  void layer(S& target, const S& base) const {
    for (const auto& f : fields_) {
      if (f.option->count() == 0) f.copy(target, base);
    }
  }

  void apply_json(S& s, const nlohmann::json& j) const {
    if (!j.is_object()) throw_input("config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      auto f = std::find_if(fields_.begin(), fields_.end(), [&](const Field& x) { return x.key == it.key(); });
      if (f == fields_.end()) throw_input("unknown config key '", it.key(), "'");
      f->from_json(s, it.value());
    }
  }

  bool given(const std::string& key) const {
    for (const auto& f : fields_) {
      if (f.key == key) return f.option->count() > 0;
    }
    return false;
  }

  json to_json(const S& s) const {
    json j = json::object();
    for (const auto& f : fields_) j[f.key] = f.get(s);
    return j;
  }

 private:
  struct Field {
    std::string key;
    CLI::Option* option;
    std::function<void(S&, S)> copy;
    std::function<json(S)> get;
    std::function<void(S&, const nlohmann::json&)> from_json;
  };
  std::vector<Field> fields_;
};

// Where outputs go: files in a directory, or only the primary output on
// stdout when the directory is "-".
class Sink {
 public:
  Sink(std::string dir, std::ostream& out) : dir_(std::move(dir)), out_(out) {}

  bool to_stdout() const { return dir_ == "-"; }

  void emit(const std::string& name, const std::string& content, bool primary) {
    if (to_stdout()) {
      if (primary) out_ << content;
      return;
    }
    const std::filesystem::path path = std::filesystem::path(dir_) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw_input("cannot write ", path.string());
    f << content;
    if (!f) throw_input("write failed for ", path.string());
    written_.push_back(name);
  }

  void prepare() const {
    if (to_stdout()) return;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw_input("cannot create output directory ", dir_, ": ", ec.message());
  }

  const std::vector<std::string>& written() const { return written_; }
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::ostream& out_;
  std::vector<std::string> written_;
};

struct CurvesSettings {
  model::ModelParams model = model::ModelParams::figure_defaults();
  std::string h_grid = "-4:4:0.05";
  std::string q_grid = "-3:3:0.05";
  std::string method = "monte_carlo";
  int draws = 200000;
  int nodes = 64;
  std::uint64_t seed = 1;
};

struct SimSettings {
  std::string preset = "default";
  sim::SimConfig sim{};
};

struct ScoreSettings {
  std::string jobs, letters;
  std::string scope = "global";
  std::string stopwords;
  std::uint64_t seed = 1;
};

struct EstimateSettings {
  std::string spec;
  std::string bids;
  std::string outcome;  // empty: tailoring, or callback for signal-power
  std::string regressor = "tailoring";
  int gpt_period = 3;
  int tool_period = 4;
  int periods_per_month = 1;
  bool gpt_control = true;
  std::string cluster = "worker";
  bool dynamic = false;
  double max_edit_minutes = 60.0;
  std::uint64_t seed = 1;
};

struct SummarizeSettings {
  std::string bids;
  int tool_period = 4;
  std::uint64_t seed = 1;
};

struct ValidateSettings {
  std::string only;
  std::string bids;
  std::uint64_t seed = 1;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_input("cannot open ", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The settings object of a manifest (its "config" member), or the whole
// document when it is a bare settings object.
inline nlohmann::json load_config(const std::string& path, const std::string& subcommand) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw_input(path, ": invalid JSON: ", e.what());
  }
  if (!doc.is_object()) throw_input(path, ": expected a JSON object");
  if (doc.contains("subcommand") && doc["subcommand"] != subcommand) {
    throw_input(path, " is a manifest for '", doc["subcommand"].get<std::string>(), "', not '", subcommand, "'");
  }
  return doc.contains("config") ? doc["config"] : doc;
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline void add_sim_flags(CLI::App* app, FlagSet<SimSettings>& flags, SimSettings& s) {
  flags.add(app, s, "--preset", [](SimSettings& x) -> auto& { return x.preset; },
            "starting configuration: default, null, recovery, belief_switch, ceiling");
  flags.add(app, s, "--seed", [](SimSettings& x) -> auto& { return x.sim.seed; }, "master seed");
  flags.add(app, s, "--workers", [](SimSettings& x) -> auto& { return x.sim.n_workers; }, "number of workers");
  flags.add(app, s, "--jobs", [](SimSettings& x) -> auto& { return x.sim.n_jobs; }, "number of job posts");
  flags.add(app, s, "--applicants", [](SimSettings& x) -> auto& { return x.sim.applicants_per_job; },
            "applicants per job");
  flags.add(app, s, "--periods", [](SimSettings& x) -> auto& { return x.sim.n_periods; }, "number of periods");
  flags.add(app, s, "--gpt-period", [](SimSettings& x) -> auto& { return x.sim.gpt_period; },
            "first period after the general chatbot release");
  flags.add(app, s, "--tool-period", [](SimSettings& x) -> auto& { return x.sim.tool_period; },
            "first period with the writing tool");
  flags.add(app, s, "--access-share", [](SimSettings& x) -> auto& { return x.sim.access_share; },
            "share of workers with access");
  flags.add(app, s, "--compliance", [](SimSettings& x) -> auto& { return x.sim.compliance; },
            "probability an eligible bid uses the tool");
  flags.add(app, s, "--gpt-shift-treated", [](SimSettings& x) -> auto& { return x.sim.gpt_shift_treated; },
            "tailoring shift after the chatbot release, access group");
  flags.add(app, s, "--gpt-shift-control", [](SimSettings& x) -> auto& { return x.sim.gpt_shift_control; },
            "tailoring shift after the chatbot release, other workers");
  flags.add(app, s, "--market-shift", [](SimSettings& x) -> auto& { return x.sim.market_shift; },
            "change in the outside option after rollout");
  flags.add(app, s, "--mu0", [](SimSettings& x) -> auto& { return x.sim.model.mu0; }, "prior mean of productivity");
  flags.add(app, s, "--tau2", [](SimSettings& x) -> auto& { return x.sim.model.tau2; }, "productivity variance");
  flags.add(app, s, "--sigma2", [](SimSettings& x) -> auto& { return x.sim.model.sigma2; }, "letter noise variance");
  flags.add(app, s, "--A", [](SimSettings& x) -> auto& { return x.sim.model.A; }, "tailoring gain per tool use");
  flags.add(app, s, "--belief-update", [](SimSettings& x) -> auto& { return x.sim.belief_update; },
            "employers discount letters after rollout (true/false)");
  flags.add(app, s, "--review-signal", [](SimSettings& x) -> auto& { return x.sim.review_signal; },
            "employers also observe a review score (true/false)");
  flags.add(app, s, "--review-noise-sd", [](SimSettings& x) -> auto& { return x.sim.review_noise_sd; },
            "noise sd of the review score");
  flags.add(app, s, "--substitution", [](SimSettings& x) -> auto& { return x.sim.substitution; },
            "0 additive effect, 1 common ceiling");
  flags.add(app, s, "--effect-duration", [](SimSettings& x) -> auto& { return x.sim.effect_duration; },
            "periods the effect lasts, 0 for all");
  flags.add(app, s, "--outside-utility", [](SimSettings& x) -> auto& { return x.sim.outside_utility; },
            "utility of not hiring");
  flags.add(app, s, "--wage-sd", [](SimSettings& x) -> auto& { return x.sim.wage_sd; }, "sd of normalized wage bids");
  flags.add(app, s, "--edit-alpha", [](SimSettings& x) -> auto& { return x.sim.edit_alpha; },
            "mean editing minutes at average ability");
  flags.add(app, s, "--edit-beta", [](SimSettings& x) -> auto& { return x.sim.edit_beta; },
            "editing minutes per sd of pre-rollout ability");
  flags.add(app, s, "--edit-noise-sd", [](SimSettings& x) -> auto& { return x.sim.edit_noise_sd; },
            "noise sd of editing minutes");
  flags.add(app, s, "--edit-gain", [](SimSettings& x) -> auto& { return x.sim.edit_gain; },
            "tailoring gained per editing minute");
}

// defaults < preset < --config < explicit flags
inline void resolve_sim(SimSettings& s, const FlagSet<SimSettings>& flags, const nlohmann::json* config) {
  SimSettings base;
  if (flags.given("preset")) {
    base.preset = s.preset;
  } else if (config && config->contains("preset")) {
    base.preset = (*config)["preset"].get<std::string>();
  }
  base.sim = sim::preset(base.preset);
  if (config) flags.apply_json(base, *config);
  flags.layer(s, base);
  s.sim.validate();
}

inline econ::EventTiming timing_of(const EstimateSettings& s) {
  econ::EventTiming t{s.gpt_period, s.tool_period, s.periods_per_month};
  t.validate();
  return t;
}

inline json event_rows_json(const std::vector<econ::EventRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"k", r.k},
                   {"beta", econ::json_number(r.beta)},
                   {"se", econ::json_number(r.se)},
                   {"ci_lo", econ::json_number(r.ci_lo)},
                   {"ci_hi", econ::json_number(r.ci_hi)}});
  }
  return out;
}

}  // namespace detail

// Runs one invocation; args excludes the program name. Returns the exit code.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Cover-letter signalling: hiring curves, synthetic markets, text scoring and estimation",
               "signalmarket"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SIGNALMARKET_VERSION);

  std::string out_dir = ".";
  std::string config_path;
  unsigned threads = 0;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "output directory, or - for the primary output on stdout");
    sub->add_option("--config", config_path, "re-run from a run.json manifest or a settings object")
        ->check(CLI::ExistingFile);
    sub->add_option("--threads", threads, "worker threads (default: SIGNALMARKET_THREADS or 1)");
  };

  // curves
  CurvesSettings curves;
  FlagSet<CurvesSettings> curves_flags;
  auto* c_curves = app.add_subcommand("curves", "hiring-probability curves before and after the tool");
  {
    auto& f = curves_flags;
    auto* a = c_curves;
    f.add(a, curves, "--seed", [](CurvesSettings& x) -> auto& { return x.seed; }, "Monte Carlo seed");
    f.add(a, curves, "--mu0", [](CurvesSettings& x) -> auto& { return x.model.mu0; }, "prior mean of productivity");
    f.add(a, curves, "--tau2", [](CurvesSettings& x) -> auto& { return x.model.tau2; }, "productivity variance");
    f.add(a, curves, "--sigma2", [](CurvesSettings& x) -> auto& { return x.model.sigma2; }, "letter noise variance");
    f.add(a, curves, "--p", [](CurvesSettings& x) -> auto& { return x.model.p; }, "share of workers with access");
    f.add(a, curves, "--A", [](CurvesSettings& x) -> auto& { return x.model.A; }, "letter gain from the tool");
    f.add(a, curves, "--N", [](CurvesSettings& x) -> auto& { return x.model.N; }, "applicants per job");
    f.add(a, curves, "--h-grid", [](CurvesSettings& x) -> auto& { return x.h_grid; }, "letter grid min:max:step");
    f.add(a, curves, "--q-grid", [](CurvesSettings& x) -> auto& { return x.q_grid; },
          "productivity grid min:max:step");
    f.add(a, curves, "--method", [](CurvesSettings& x) -> auto& { return x.method; },
          "monte_carlo or gauss_hermite");
    f.add(a, curves, "--draws", [](CurvesSettings& x) -> auto& { return x.draws; }, "Monte Carlo draws");
    f.add(a, curves, "--nodes", [](CurvesSettings& x) -> auto& { return x.nodes; }, "Gauss-Hermite nodes");
    common(a);
  }

  SimSettings simulate;
  FlagSet<SimSettings> simulate_flags;
  auto* c_simulate = app.add_subcommand("simulate", "generate a synthetic market (bids.csv, truth.json)");
  detail::add_sim_flags(c_simulate, simulate_flags, simulate);
  common(c_simulate);

  SimSettings decomp;
  FlagSet<SimSettings> decomp_flags;
  auto* c_decompose = app.add_subcommand("decompose", "direct, spillover and market-shift terms of the DiD estimand");
  detail::add_sim_flags(c_decompose, decomp_flags, decomp);
  common(c_decompose);

  ScoreSettings score;
  FlagSet<ScoreSettings> score_flags;
  auto* c_score = app.add_subcommand("score", "TF-IDF tailoring of letters against their job posts");
  {
    auto& f = score_flags;
    auto* a = c_score;
    f.add(a, score, "--jobs", [](ScoreSettings& x) -> auto& { return x.jobs; },
          "job posts, doc_id<TAB>text[<TAB>skill]")
        ->required();
    f.add(a, score, "--letters", [](ScoreSettings& x) -> auto& { return x.letters; },
          "letters, bid_id<TAB>job_id<TAB>text")
        ->required();
    f.add(a, score, "--scope", [](ScoreSettings& x) -> auto& { return x.scope; }, "global or per_skill");
    f.add(a, score, "--stopwords", [](ScoreSettings& x) -> auto& { return x.stopwords; },
          "stopword file (default: bundled English list)");
    f.add(a, score, "--seed", [](ScoreSettings& x) -> auto& { return x.seed; }, "unused; recorded in the manifest");
    common(a);
  }

  EstimateSettings est;
  FlagSet<EstimateSettings> est_flags;
  auto* c_estimate = app.add_subcommand("estimate", "panel regressions on a bids.csv file");
  {
    auto& f = est_flags;
    auto* a = c_estimate;
    f.add(a, est, "spec", [](EstimateSettings& x) -> auto& { return x.spec; },
          "itt, late, event, heterogeneity, signal-power or editing")
        ->required()
        ->check(CLI::IsMember({"itt", "late", "event", "heterogeneity", "signal-power", "editing"}));
    f.add(a, est, "--bids", [](EstimateSettings& x) -> auto& { return x.bids; }, "bids.csv")->required();
    f.add(a, est, "--outcome", [](EstimateSettings& x) -> auto& { return x.outcome; },
          "outcome column (default tailoring; callback for signal-power)");
    f.add(a, est, "--regressor", [](EstimateSettings& x) -> auto& { return x.regressor; },
          "signal-power regressor: tailoring or rank_pct");
    f.add(a, est, "--gpt-period", [](EstimateSettings& x) -> auto& { return x.gpt_period; },
          "first period after the chatbot release");
    f.add(a, est, "--tool-period", [](EstimateSettings& x) -> auto& { return x.tool_period; },
          "first period with the tool");
    f.add(a, est, "--periods-per-month", [](EstimateSettings& x) -> auto& { return x.periods_per_month; },
          "periods per event-study month");
    f.add(a, est, "--gpt-control", [](EstimateSettings& x) -> auto& { return x.gpt_control; },
          "include PostGPT x Access (true/false)");
    f.add(a, est, "--cluster", [](EstimateSettings& x) -> auto& { return x.cluster; }, "worker or job")
        ->check(CLI::IsMember({"worker", "job"}));
    f.add(a, est, "--dynamic", [](EstimateSettings& x) -> auto& { return x.dynamic; },
          "month-by-month signal-power interactions (true/false)");
    f.add(a, est, "--max-edit-minutes", [](EstimateSettings& x) -> auto& { return x.max_edit_minutes; },
          "editing sample cutoff");
    f.add(a, est, "--seed", [](EstimateSettings& x) -> auto& { return x.seed; }, "unused; recorded in the manifest");
    common(a);
  }

  SummarizeSettings summ;
  FlagSet<SummarizeSettings> summ_flags;
  auto* c_summarize = app.add_subcommand("summarize", "adoption statistics of a bids.csv file");
  {
    summ_flags.add(c_summarize, summ, "--bids", [](SummarizeSettings& x) -> auto& { return x.bids; }, "bids.csv")
        ->required();
    summ_flags.add(c_summarize, summ, "--tool-period", [](SummarizeSettings& x) -> auto& { return x.tool_period; },
                   "first period with the tool");
    summ_flags.add(c_summarize, summ, "--seed", [](SummarizeSettings& x) -> auto& { return x.seed; },
                   "unused; recorded in the manifest");
    common(c_summarize);
  }

  ValidateSettings val;
  FlagSet<ValidateSettings> val_flags;
  auto* c_validate = app.add_subcommand("validate", "run the acceptance checks, or check a bids.csv schema");
  {
    val_flags.add(c_validate, val, "--only", [](ValidateSettings& x) -> auto& { return x.only; },
                  "model-core, market-sim, textsim, econometrics or cli")
        ->check(CLI::IsMember({"model-core", "market-sim", "textsim", "econometrics", "cli"}));
    val_flags.add(c_validate, val, "--bids", [](ValidateSettings& x) -> auto& { return x.bids; },
                  "check this bids.csv file instead of running the suite");
    val_flags.add(c_validate, val, "--seed", [](ValidateSettings& x) -> auto& { return x.seed; }, "base seed");
    common(c_validate);
  }

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    const unsigned nthreads = resolve_threads(threads);
    std::optional<nlohmann::json> config;
    if (!config_path.empty()) config = detail::load_config(config_path, name);
    const nlohmann::json* cfg = config ? &*config : nullptr;

    Sink sink(out_dir, out);
    sink.prepare();
    json settings;
    std::vector<std::string> inputs;
    std::uint64_t seed = 0;
    int status = 0;

    if (sub == c_curves) {
      CurvesSettings base;
      if (cfg) curves_flags.apply_json(base, *cfg);
      curves_flags.layer(curves, base);
      model::FigureOptions fo;
      fo.h_grid = model::GridSpec::parse(curves.h_grid);
      fo.q_grid = model::GridSpec::parse(curves.q_grid);
      fo.threads = nthreads;
      model::IntegrationConfig ic;
      ic.method = model::parse_integration_method(curves.method);
      ic.draws = curves.draws;
      ic.nodes = curves.nodes;
      ic.seed = curves.seed;
      const auto fc = model::figure_curves(curves.model, fo, ic);
      if (sink.to_stdout()) {
        sink.emit("", detail::render([&](std::ostream& os) {
                    model::write_curve_csv(os, {&fc.hire_by_letter, &fc.treated_by_q, &fc.control_by_q,
                                                &fc.ex_ante_by_q});
                  }),
                  true);
      } else {
        sink.emit("fig5.csv",
                  detail::render([&](std::ostream& os) { model::write_curve_csv(os, {&fc.hire_by_letter}); }), true);
        sink.emit("fig6.csv", detail::render([&](std::ostream& os) {
                    model::write_curve_csv(os, {&fc.treated_by_q, &fc.control_by_q});
                  }),
                  false);
        sink.emit("fig7.csv",
                  detail::render([&](std::ostream& os) { model::write_curve_csv(os, {&fc.ex_ante_by_q}); }), false);
      }
      settings = curves_flags.to_json(curves);
      seed = curves.seed;
    } else if (sub == c_simulate) {
      detail::resolve_sim(simulate, simulate_flags, cfg);
      const auto ds = sim::generate_market(simulate.sim, {}, nthreads);
      sink.emit("bids.csv", detail::render([&](std::ostream& os) { sim::write_bids_csv(os, ds.bids); }), true);
      json truth = sim::to_json(ds.truth);
      truth["pre_ability_missing_workers"] = ds.pre_ability_missing;
      sink.emit("truth.json", detail::dump(truth), false);
      settings = simulate_flags.to_json(simulate);
      seed = simulate.sim.seed;
    } else if (sub == c_decompose) {
      detail::resolve_sim(decomp, decomp_flags, cfg);
      const auto d = sim::decompose_estimand(decomp.sim, nthreads);
      sink.emit("decomposition.json", detail::dump(sim::to_json(d)), true);
      settings = decomp_flags.to_json(decomp);
      seed = decomp.sim.seed;
    } else if (sub == c_score) {
      ScoreSettings base;
      if (cfg) score_flags.apply_json(base, *cfg);
      score_flags.layer(score, base);
      std::ifstream jin(score.jobs, std::ios::binary), lin(score.letters, std::ios::binary);
      if (!jin) throw_input("cannot open ", score.jobs);
      if (!lin) throw_input("cannot open ", score.letters);
      const auto jobs = text::read_jobs_tsv(jin, score.jobs);
      const auto letters = text::read_letters_tsv(lin, score.letters);
      const auto stop = score.stopwords.empty() ? text::default_stopwords() : text::load_stopwords(score.stopwords);
      const auto res = text::score_dataset(jobs, letters, text::parse_model_scope(score.scope), stop, nthreads);
      sink.emit("scores.csv", detail::render([&](std::ostream& os) { text::write_scores_csv(os, res.rows); }), true);
      if (!res.errors.empty()) {
        sink.emit("score_errors.csv",
                  detail::render([&](std::ostream& os) { text::write_score_errors_csv(os, res.errors); }), false);
        err << "signalmarket: " << res.errors.size() << " letter(s) could not be scored";
        if (!sink.to_stdout()) err << "; see score_errors.csv";
        err << '\n';
      }
      settings = score_flags.to_json(score);
      inputs = {score.jobs, score.letters};
      if (!score.stopwords.empty()) inputs.push_back(score.stopwords);
      seed = score.seed;
    } else if (sub == c_estimate) {
      EstimateSettings base;
      if (cfg) est_flags.apply_json(base, *cfg);
      est_flags.layer(est, base);
      const auto timing = detail::timing_of(est);
      const auto bids = sim::read_bids_csv_file(est.bids);
      const auto frame = econ::frame_from_bids(bids, timing);
      econ::EstimatorOptions o;
      o.timing = timing;
      o.gpt_control = est.gpt_control;
      o.cluster_dim = est.cluster;
      if (!est.outcome.empty()) o.outcome = est.outcome;
      json j;
      j["spec"] = est.spec;
      if (est.spec == "itt" || est.spec == "late") {
        const auto r = est.spec == "itt" ? econ::did_itt(frame, o) : econ::late(frame, o);
        j.update(econ::to_json(r));
      } else if (est.spec == "event") {
        const auto r = econ::event_study(frame, o);
        j.update(econ::to_json(r.fit));
        j["reference_k"] = r.reference_k;
        j["rows"] = detail::event_rows_json(r.rows);
        if (!sink.to_stdout()) {
          sink.emit("event.csv", detail::render([&](std::ostream& os) { econ::write_event_csv(os, r.rows); }), false);
        }
      } else if (est.spec == "heterogeneity") {
        const auto r = econ::heterogeneity(frame, o);
        j.update(econ::to_json(r.fit));
        j["workers_excluded"] = r.workers_excluded;
      } else if (est.spec == "signal-power") {
        const auto var = econ::parse_signal_var(est.regressor);
        const auto outcome = econ::parse_signal_outcome(est.outcome.empty() ? "callback" : est.outcome);
        const auto r = econ::signal_power(frame, var, outcome, est.dynamic, o);
        j.update(econ::to_json(r.fit));
        if (est.dynamic) {
          j["rows"] = detail::event_rows_json(r.dynamic);
          if (!sink.to_stdout()) {
            sink.emit("event.csv", detail::render([&](std::ostream& os) { econ::write_event_csv(os, r.dynamic); }),
                      false);
          }
        } else {
          j["interaction"] = r.interaction;
        }
      } else {
        const auto r = econ::editing_regressions(frame, est.max_edit_minutes);
        j["sample_bids"] = r.sample_bids;
        j["worker_level"] = econ::to_json(r.worker_level);
        j["offer"] = econ::to_json(r.offer);
        j["callback"] = econ::to_json(r.callback);
      }
      sink.emit("estimate.json", detail::dump(j), true);
      settings = est_flags.to_json(est);
      inputs = {est.bids};
      seed = est.seed;
    } else if (sub == c_summarize) {
      SummarizeSettings base;
      if (cfg) summ_flags.apply_json(base, *cfg);
      summ_flags.layer(summ, base);
      const auto bids = sim::read_bids_csv_file(summ.bids);
      sink.emit("summary.json", detail::dump(sim::to_json(sim::summarize(bids, summ.tool_period))), true);
      settings = summ_flags.to_json(summ);
      inputs = {summ.bids};
      seed = summ.seed;
    } else if (sub == c_validate) {
      ValidateSettings base;
      if (cfg) val_flags.apply_json(base, *cfg);
      val_flags.layer(val, base);
      settings = val_flags.to_json(val);
      seed = val.seed;
      if (!val.bids.empty()) {
        const auto bids = sim::read_bids_csv_file(val.bids);
        sink.emit("validate.txt", val.bids + ": " + std::to_string(bids.size()) + " bids, schema ok\n", true);
        inputs = {val.bids};
      } else {
        validate::AcceptanceOptions ao;
        ao.seed = val.seed;
        ao.threads = nthreads;
        ao.only = val.only;
        ao.cli = [](const std::vector<std::string>& a, std::ostream& o, std::ostream& e) { return run_cli(a, o, e); };
        // Timings go to stderr so the report itself is reproducible.
        const auto results = validate::run_acceptance(ao, &err);
        sink.emit("validate.txt", validate::format_report(results), true);
        if (!validate::all_passed(results)) status = 1;
      }
    }

    if (!sink.to_stdout()) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      json manifest = {{"subcommand", name},
                       {"tool_version", SIGNALMARKET_VERSION},
                       {"seed", seed},
                       {"threads", nthreads},
                       {"config", settings},
                       {"inputs", inputs},
                       {"outputs", sink.written()},
                       {"duration_seconds", secs}};
      sink.emit("run.json", detail::dump(manifest), false);
    }
    return status;
  } catch (const InputError& e) {
    err << "signalmarket: error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "signalmarket: numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const nlohmann::json::exception& e) {
    err << "signalmarket: error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "signalmarket: internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace signalmarket::cli
