// fairsample: command-line front end.
//
//   fairsample analytic1d   closed-form 1-D quantities and recurrence limits
//   fairsample sweep        p-sweep with Pareto frontier
//   fairsample replay       timestamp / random / adaptive sequential replay
//   fairsample oned         1-D SGD scenario with analytic overlays
//   fairsample check-bounds finite-sample dichotomy study
//
// Exit codes: 0 success, 1 I/O error, 2 invalid input.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fairsample/analytic.hpp"
#include "fairsample/bounds.hpp"
#include "fairsample/data.hpp"
#include "fairsample/emit.hpp"
#include "fairsample/error.hpp"
#include "fairsample/harness.hpp"

using namespace fairsample;
using nlohmann::json;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string format = "json";
};

struct DataFlags {
  std::string path;
  std::string label_col = "label";
  std::string group_col = "group";
  std::vector<std::string> feature_cols;
  std::string timestamp_col;
  std::string label_map = "neg=0,pos=1";
  char delimiter = ',';
  std::string synthetic;
  std::size_t n = 10000;
  double ward_scale = 10.0;
};

struct TruthFlags {
  std::vector<double> uniform;
  std::vector<double> gaussian;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--out", c.out, "Output path ('-' = stdout)");
  cmd->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

void add_data(CLI::App* cmd, DataFlags& d, const std::string& default_synthetic) {
  d.synthetic = default_synthetic;
  cmd->add_option("--data", d.path, "CSV file with a header row");
  cmd->add_option("--label-col", d.label_col, "Label column");
  cmd->add_option("--group-col", d.group_col, "Group column (non-negative integers)");
  cmd->add_option("--feature-cols", d.feature_cols, "Feature columns")->delimiter(',');
  cmd->add_option("--timestamp-col", d.timestamp_col, "Timestamp column");
  cmd->add_option("--label-map", d.label_map, "Label values, e.g. neg=0,pos=1");
  cmd->add_option("--delimiter", d.delimiter, "CSV field delimiter");
  cmd->add_option("--synthetic", d.synthetic, "Synthetic source when --data is absent")
      ->check(CLI::IsMember({"uniform", "gaussian", "wards"}));
  cmd->add_option("--n", d.n, "Synthetic sample size (uniform/gaussian)");
  cmd->add_option("--ward-scale", d.ward_scale, "Divide ward sizes by this factor");
}

void add_truth(CLI::App* cmd, TruthFlags& t) {
  cmd->add_option("--uniform-spec", t.uniform, "alpha0,beta0,t0,alpha1,beta1,t1,lambda*")
      ->delimiter(',')
      ->expected(7);
  cmd->add_option("--gaussian-spec", t.gaussian, "mean0,var0,t0,mean1,var1,t1,lambda*")
      ->delimiter(',')
      ->expected(7);
}

analytic::GroundTruth make_truth(const TruthFlags& t, const analytic::GroundTruth& fallback) {
  require(t.uniform.empty() || t.gaussian.empty(), "give at most one of --uniform-spec and --gaussian-spec");
  if (!t.uniform.empty()) {
    const auto& v = t.uniform;
    UniformMixtureSpec s{v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    s.validate_basic();
    return s;
  }
  if (!t.gaussian.empty()) {
    const auto& v = t.gaussian;
    GaussianMixtureSpec s{v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    s.validate();
    return s;
  }
  return fallback;
}

Dataset load_data(const DataFlags& d, std::uint64_t seed, const analytic::GroundTruth& truth) {
  if (!d.path.empty()) {
    CsvSchema schema;
    schema.label_column = d.label_col;
    schema.group_column = d.group_col;
    schema.feature_columns = d.feature_cols;
    if (!d.timestamp_col.empty()) schema.timestamp_column = d.timestamp_col;
    schema.label_map = parse_label_map(d.label_map);
    schema.delimiter = d.delimiter;
    return load_csv(d.path, schema);
  }
  if (d.synthetic == "wards") return synth_wards(flint_like_ward_spec(d.ward_scale), seed);
  if (d.synthetic == "gaussian") {
    const auto* g = std::get_if<GaussianMixtureSpec>(&truth);
    return synth_gaussian_mixture(g ? *g : GaussianMixtureSpec{}, d.n, seed);
  }
  const auto* u = std::get_if<UniformMixtureSpec>(&truth);
  return synth_uniform_mixture(u ? *u : UniformMixtureSpec{0, 10, 4, 1, 14, 7, 0.85}, d.n, seed);
}

void write_result(const json& doc, const Common& c) {
  const auto text = render(doc, parse_format(c.format));
  if (c.out == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to stdout");
  } else {
    write_file(c.out, text);
  }
}

// ---------------------------------------------------------------------------
// --config: a JSON object whose keys are long option names of the subcommand.
// Its entries are inserted right after the subcommand name, so flags given on
// the command line (which come later) take precedence.

std::vector<std::string> config_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ContractError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  require(doc.is_object(), "config file must hold a JSON object");
  auto scalar = [](const json& v) {
    if (v.is_string()) return v.get<std::string>();
    require(v.is_number() || v.is_boolean(), "config values must be strings, numbers, booleans or arrays");
    return v.dump();
  };
  std::vector<std::string> args;
  for (const auto& [key, value] : doc.items()) {
    if (value.is_array()) {
      std::string joined;
      for (std::size_t i = 0; i < value.size(); ++i) joined += (i ? "," : "") + scalar(value[i]);
      args.push_back("--" + key + "=" + joined);
    } else if (value.is_boolean()) {
      args.push_back("--" + key + "=" + (value.get<bool>() ? "true" : "false"));
    } else {
      args.push_back("--" + key + "=" + scalar(value));
    }
  }
  return args;
}

std::vector<std::string> expand_config(int argc, char** argv, const std::vector<std::string>& commands) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (config.empty()) return args;
  auto extra = config_args(config);
  auto pos = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
    return std::find(commands.begin(), commands.end(), a) != commands.end();
  });
  require(pos != args.end(), "--config needs a subcommand");
  args.insert(pos + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive sampling for group-fair classifiers"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  // analytic1d ---------------------------------------------------------------
  auto* a1 = app.add_subcommand("analytic1d", "Closed-form 1-D quantities and recurrence limits");
  Common a1c;
  TruthFlags a1t;
  std::string a1_loss = "hinge", a1_mode = "expectation";
  std::size_t a1_pgrid = 21, a1_cgrid = 101;
  std::int64_t a1_rounds = 100000, a1_n0 = 50;
  add_common(a1, a1c);
  add_truth(a1, a1t);
  a1->add_option("--loss", a1_loss, "hinge or logistic")->check(CLI::IsMember({"hinge", "logistic"}));
  a1->add_option("--p-grid-size", a1_pgrid, "Number of evenly spaced p values");
  a1->add_option("--lambda-grid-size", a1_cgrid, "Number of lambda values in the c(lambda) table");
  a1->add_option("--rounds", a1_rounds, "Recurrence rounds (uniform + hinge only)");
  a1->add_option("--n0", a1_n0, "Initial training-set size |S0|");
  a1->add_option("--mode", a1_mode, "expectation or stochastic")
      ->check(CLI::IsMember({"expectation", "stochastic"}));

  // sweep ----------------------------------------------------------------------
  auto* sw = app.add_subcommand("sweep", "Sweep p and report the Pareto frontier");
  Common swc;
  DataFlags swd;
  TruthFlags swt;
  std::size_t sw_pgrid = 100, sw_seeds = 10;
  std::vector<double> sw_pvalues;
  SweepConfig sw_cfg;
  std::string sw_metric = "01", sw_update = "batch", sw_model, sw_loss, sw_eval = "validation",
              sw_repl = "without";
  std::int64_t sw_rounds = 200;
  double sw_lr = 1.0;
  add_common(sw, swc);
  add_data(sw, swd, "uniform");
  add_truth(sw, swt);
  sw->add_option("--p-grid-size", sw_pgrid, "Number of evenly spaced p values in [0,1]");
  sw->add_option("--p-values", sw_pvalues, "Explicit p values")->delimiter(',');
  sw->add_option("--seeds", sw_seeds, "Number of seeds");
  sw->add_option("--train", sw_cfg.sizes.train, "Initial training-set size");
  sw->add_option("--pool", sw_cfg.sizes.pool, "Pool size");
  sw->add_option("--validation", sw_cfg.sizes.validation, "Validation-set size");
  sw->add_option("--test", sw_cfg.sizes.test, "Test-set size");
  sw->add_option("--rounds", sw_rounds, "Sampling rounds T");
  sw->add_option("--metric", sw_metric, "01, eqopp, eqodds, stat-parity");
  sw->add_option("--update", sw_update, "batch or sgd")->check(CLI::IsMember({"batch", "sgd"}));
  sw->add_option("--lr-scale", sw_lr, "SGD learning rate scale / sqrt(t)");
  sw->add_option("--model", sw_model, "threshold or linear (default: threshold for 1-D data)")
      ->check(CLI::IsMember({"threshold", "linear"}));
  sw->add_option("--loss", sw_loss, "hinge or logistic")->check(CLI::IsMember({"hinge", "logistic"}));
  sw->add_option("--evaluate-on", sw_eval, "validation or training");
  sw->add_option("--replacement", sw_repl, "with or without");

  // replay ---------------------------------------------------------------------
  auto* rp = app.add_subcommand("replay", "Timestamp / random / adaptive sequential replay");
  Common rpc;
  DataFlags rpd;
  ReplayConfig rp_cfg;
  std::size_t rp_seeds = 1, rp_external = 0;
  std::vector<std::string> rp_strategies;
  std::int64_t rp_retrain = 0;
  std::string rp_metric = "01";
  add_common(rp, rpc);
  add_data(rp, rpd, "wards");
  rp->add_option("--seeds", rp_seeds, "Number of seeds");
  rp->add_option("--strategies", rp_strategies, "Subset of timestamp,random,adaptive")->delimiter(',');
  rp->add_option("--initial-train", rp_cfg.initial_train, "Initial training-set size");
  rp->add_option("--validation", rp_cfg.validation, "Validation-set size");
  rp->add_option("--test-size", rp_cfg.test_size, "Test rows carved from the data");
  rp->add_option("--external-test-size", rp_external, "Synthetic wards: separate test set of this size");
  rp->add_option("--p", rp_cfg.p, "Coin probability of the adaptive strategy");
  rp->add_option("--metric", rp_metric, "01, eqopp, eqodds, stat-parity");
  rp->add_option("--retrain-every", rp_retrain, "Retrain cadence (default depends on data size)");
  rp->add_option("--baselines-train-on-validation", rp_cfg.baselines_train_on_validation,
                 "Baselines start from train + validation");
  rp->add_option("--window-begin", rp_cfg.window_begin, "Mid-run window start (fraction of rounds)");
  rp->add_option("--window-end", rp_cfg.window_end, "Mid-run window end (fraction of rounds)");
  rp->add_option("--l2", rp_cfg.learner.logistic.l2, "Logistic l2 penalty");

  // oned -----------------------------------------------------------------------
  auto* od = app.add_subcommand("oned", "1-D SGD scenario with analytic overlays");
  Common odc;
  TruthFlags odt;
  OnedConfig od_cfg;
  std::string od_loss = "hinge", od_trace;
  add_common(od, odc);
  add_truth(od, odt);
  od->add_option("--loss", od_loss, "hinge or logistic")->check(CLI::IsMember({"hinge", "logistic"}));
  od->add_option("--p", od_cfg.p, "Coin probability");
  od->add_option("--validation", od_cfg.validation, "Validation-set size (split evenly)");
  od->add_option("--rounds", od_cfg.rounds, "SGD rounds");
  od->add_option("--lr-scale", od_cfg.lr.scale, "Learning rate scale / sqrt(t)");
  od->add_option("--initial", od_cfg.initial, "Initial training-set size");
  od->add_option("--trace", od_trace, "Also write the per-round trace as JSON lines");

  // check-bounds -----------------------------------------------------------------
  auto* cb = app.add_subcommand("check-bounds", "Finite-sample dichotomy study");
  Common cbc;
  TruthFlags cbt;
  bounds::DichotomyStudyConfig cb_cfg;
  std::string cb_loss = "hinge";
  add_common(cb, cbc);
  add_truth(cb, cbt);
  cb->add_option("--per-group", cb_cfg.initial_per_group, "Initial points per group");
  cb->add_option("--T", cb_cfg.T, "Rounds T");
  cb->add_option("--seeds", cb_cfg.seeds, "Number of seeded runs");
  cb->add_option("--delta", cb_cfg.delta, "Confidence parameter");
  cb->add_option("--p", cb_cfg.p, "Coin probability");
  cb->add_option("--loss", cb_loss, "hinge or logistic")->check(CLI::IsMember({"hinge", "logistic"}));

  try {
    auto args = expand_config(argc, argv, {"analytic1d", "sweep", "replay", "oned", "check-bounds"});
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return 2;
    }

    if (a1->parsed()) {
      const auto truth = make_truth(a1t, UniformMixtureSpec{});
      const auto loss = parse_loss(a1_loss);
      const auto interval = analytic::lambda_fair_interval(truth, loss);
      const auto ps = linspace(0.0, 1.0, a1_pgrid);
      const auto* uni = std::get_if<UniformMixtureSpec>(&truth);
      if (uni && !uni->chain_holds()) uni = nullptr;
      const bool recurrence = uni && loss == MarginLossKind::Hinge;
      auto records = json::array();
      for (double p : ps) {
        const auto lim = analytic::theorem1_limit(truth, p, loss);
        json row{{"p", p}, {"limit_lambda", lim.lambda}, {"limit_c", lim.c}, {"converges_to_fair", lim.converges_to_fair}};
        if (recurrence) {
          const auto mode =
              a1_mode == "expectation" ? analytic::RecurrenceMode::Expectation : analytic::RecurrenceMode::Stochastic;
          const auto states = analytic::run_recurrence(*uni, a1_n0, p, a1_rounds, mode, a1c.seed, a1_rounds);
          row["recurrence_lambda"] = states.back().lambda;
          row["recurrence_c"] = analytic::c_of_lambda(*uni, states.back().lambda);
        }
        records.push_back(std::move(row));
      }
      auto table = json::array();
      for (double l : linspace(0.0, 1.0, a1_cgrid)) {
        table.push_back({{"lambda", l}, {"c", analytic::c_of_lambda(truth, l, loss)}});
      }
      json doc{{"kind", "analytic1d"},
               {"truth", to_json(truth)},
               {"loss", a1_loss},
               {"c_fair", analytic::c_fair(truth)},
               {"lambda_fair", {{"lower", interval.lower}, {"upper", interval.upper}}},
               {"c_risk_min", analytic::c_of_lambda(truth, analytic::lambda_star(truth), loss)},
               {"c_of_lambda", table},
               {"records", records}};
      if (uni) {
        const auto v = analytic::risk_vertices(*uni, uni->lambda_star);
        doc["vertices"] = {{"s3", v.s3}, {"s4", v.s4}, {"s5", v.s5}, {"phi", v.phi}, {"psi", v.psi}};
        if (recurrence) {
          doc["recurrence"] = {{"n0", a1_n0}, {"rounds", a1_rounds}, {"mode", a1_mode}};
        }
      }
      write_result(doc, a1c);
    } else if (sw->parsed()) {
      const auto truth = make_truth(swt, swd.synthetic == "gaussian" ? analytic::GroundTruth{GaussianMixtureSpec{}}
                                                                     : analytic::GroundTruth{UniformMixtureSpec{
                                                                           0, 10, 4, 1, 14, 7, 0.85}});
      const Dataset data = load_data(swd, swc.seed, truth);
      sw_cfg.p_grid = sw_pvalues.empty() ? linspace(0.0, 1.0, sw_pgrid) : sw_pvalues;
      require(sw_seeds >= 1, "--seeds must be >= 1");
      sw_cfg.seeds.clear();
      for (std::size_t s = 0; s < sw_seeds; ++s) sw_cfg.seeds.push_back(swc.seed + s);
      sw_cfg.master_seed = swc.seed;
      auto& sc = sw_cfg.sampler;
      sc.rounds = sw_rounds;
      sc.metric = parse_metric(sw_metric);
      sc.update_mode = parse_update_mode(sw_update);
      sc.lr.scale = sw_lr;
      sc.evaluate_on = parse_evaluate_on(sw_eval);
      sc.replacement = parse_replacement(sw_repl);
      const bool threshold = sw_model.empty() ? data.dim() == 1 : sw_model == "threshold";
      require(!threshold || data.dim() == 1, "the threshold model needs one-dimensional data");
      sc.learner.family = threshold ? ModelFamily::Threshold : ModelFamily::Linear;
      sc.learner.loss = sw_loss.empty() ? (threshold ? MarginLossKind::Hinge : MarginLossKind::Logistic)
                                        : parse_loss(sw_loss);
      write_result(to_json(sweep_pareto(data, sw_cfg)), swc);
    } else if (rp->parsed()) {
      const Dataset data = load_data(rpd, rpc.seed, UniformMixtureSpec{});
      rp_cfg.seeds.clear();
      require(rp_seeds >= 1, "--seeds must be >= 1");
      for (std::size_t s = 0; s < rp_seeds; ++s) rp_cfg.seeds.push_back(rpc.seed + s);
      rp_cfg.master_seed = rpc.seed;
      rp_cfg.metric = parse_metric(rp_metric);
      if (!rp_strategies.empty()) {
        rp_cfg.strategies.clear();
        for (const auto& s : rp_strategies) rp_cfg.strategies.push_back(parse_strategy(s));
      }
      if (rp_retrain > 0) rp_cfg.retrain_every = rp_retrain;
      require(rp_retrain >= 0, "--retrain-every must be >= 1");
      std::optional<Dataset> test;
      if (rp_external > 0) {
        require(rpd.path.empty(), "--external-test-size applies to synthetic wards only");
        auto spec = flint_like_ward_spec(rpd.ward_scale, rp_external);
        test = synth_wards_test(spec, rpc.seed);
      }
      write_result(to_json(replay(data, rp_cfg, test ? &*test : nullptr)), rpc);
    } else if (od->parsed()) {
      od_cfg.truth = make_truth(odt, od_cfg.truth);
      od_cfg.loss = parse_loss(od_loss);
      od_cfg.seed = odc.seed;
      const auto result = run_oned_scenario(od_cfg);
      if (!od_trace.empty()) write_file(od_trace, to_jsonl(result.trace));
      write_result(to_json(result), odc);
    } else if (cb->parsed()) {
      cb_cfg.truth = make_truth(cbt, cb_cfg.truth);
      cb_cfg.loss = parse_loss(cb_loss);
      cb_cfg.master_seed = cbc.seed;
      write_result(to_json(bounds::dichotomy_study(cb_cfg)), cbc);
    }
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
