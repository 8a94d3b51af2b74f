#include "fairsample/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fairsample/emit.hpp"
#include "fairsample/error.hpp"
#include "fairsample/kernels.hpp"
#include "fairsample/metrics.hpp"

namespace fairsample {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  require(n >= 1, "linspace needs at least one point");
  if (n == 1) return {lo};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = hi;
  return out;
}

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::uint64_t derive(std::uint64_t seed, std::string_view name) { return seed ^ stream_tag(name); }

// (test, remainder) where test is the first `test_size` rows of a seeded permutation.
std::pair<Dataset, Dataset> carve_test(const Dataset& data, std::size_t test_size, std::uint64_t seed) {
  require(test_size <= data.size(), "test size exceeds dataset size");
  const auto perm = split_permutation(data.size(), derive(seed, "test-split"));
  std::span<const std::size_t> all(perm);
  return {data.subset(all.first(test_size)), data.subset(all.subspan(test_size))};
}

}  // namespace

// ---------------------------------------------------------------------------

void SweepConfig::validate() const {
  require(!p_grid.empty(), "p grid is empty");
  for (double p : p_grid) require(p >= 0.0 && p <= 1.0, "p grid values must lie in [0,1]");
  require(!seeds.empty(), "sweep needs at least one seed");
  require(sizes.pool >= 1 && sizes.test >= 1, "sweep needs a non-empty pool and test set");
  require(sizes.validation >= 1 || sampler.evaluate_on == EvaluateOn::Training,
          "sweep needs a validation set unless evaluating on the training set");
  require(sizes.train >= 1, "sweep needs a non-empty initial training set");
  sampler.validate();
}

bool dominates(const FrontierPoint& q, const FrontierPoint& r) {
  return q.mean_error <= r.mean_error && q.mean_violation <= r.mean_violation &&
         (q.mean_error < r.mean_error || q.mean_violation < r.mean_violation);
}

std::vector<FrontierPoint> pareto_filter(const std::vector<FrontierPoint>& points) {
  require(!points.empty(), "pareto_filter needs at least one point");
  std::vector<FrontierPoint> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < points.size() && keep; ++j) {
      if (j == i) continue;
      if (dominates(points[j], points[i])) keep = false;
      // Exact duplicates: keep the first occurrence only.
      if (j < i && points[j].mean_error == points[i].mean_error &&
          points[j].mean_violation == points[i].mean_violation) {
        keep = false;
      }
    }
    if (keep) out.push_back(points[i]);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const FrontierPoint& a, const FrontierPoint& b) { return a.mean_error < b.mean_error; });
  return out;
}

SweepResult sweep_pareto(const Dataset& data, const SweepConfig& config) {
  config.validate();
  require(config.sizes.total() <= data.size(), "split sizes exceed dataset size");
  const auto [test, rest] = carve_test(data, config.sizes.test, config.master_seed);
  const SplitSizes per_seed{config.sizes.train, config.sizes.pool, config.sizes.validation, 0};
  const std::size_t S = config.seeds.size(), P = config.p_grid.size();

  std::vector<DataSplit> splits(S);
  std::vector<Model> initial(S);
  std::vector<double> erm_error(S), erm_violation(S);
  kernels::parallel_for(S, [&](std::size_t s) {
    splits[s] = split(rest, per_seed, config.seeds[s]);
    splits[s].test = test;
    initial[s] = fit(config.sampler.learner, splits[s].train);
    const Model erm = fit(config.sampler.learner, Dataset::concat(splits[s].train, splits[s].pool));
    erm_error[s] = overall_error(erm, test);
    erm_violation[s] = disparity(config.sampler.metric, erm, test);
  });

  std::vector<double> err(P * S), vio(P * S);
  kernels::parallel_for(P * S, [&](std::size_t cell) {
    const std::size_t pi = cell / S, s = cell % S;
    SamplerConfig cfg = config.sampler;
    cfg.p = config.p_grid[pi];
    cfg.seed = config.seeds[s];
    const auto trace = run(cfg, splits[s], initial[s]);
    err[cell] = overall_error(trace.final_model, test);
    vio[cell] = disparity(cfg.metric, trace.final_model, test);
  });

  SweepResult result;
  result.config = config;
  for (std::size_t pi = 0; pi < P; ++pi) {
    FrontierPoint fp;
    fp.p = config.p_grid[pi];
    fp.errors.assign(err.begin() + static_cast<std::ptrdiff_t>(pi * S),
                     err.begin() + static_cast<std::ptrdiff_t>((pi + 1) * S));
    fp.violations.assign(vio.begin() + static_cast<std::ptrdiff_t>(pi * S),
                         vio.begin() + static_cast<std::ptrdiff_t>((pi + 1) * S));
    fp.mean_error = mean(fp.errors);
    fp.mean_violation = mean(fp.violations);
    result.points.push_back(std::move(fp));
  }
  result.frontier = pareto_filter(result.points);
  result.erm_baseline.p = std::numeric_limits<double>::quiet_NaN();
  result.erm_baseline.errors = erm_error;
  result.erm_baseline.violations = erm_violation;
  result.erm_baseline.mean_error = mean(erm_error);
  result.erm_baseline.mean_violation = mean(erm_violation);
  return result;
}

// ---------------------------------------------------------------------------

std::string to_string(ReplayStrategy s) {
  switch (s) {
    case ReplayStrategy::Timestamp: return "timestamp";
    case ReplayStrategy::RandomOrder: return "random";
    case ReplayStrategy::Adaptive: return "adaptive";
  }
  return "?";
}

ReplayStrategy parse_strategy(const std::string& name) {
  if (name == "timestamp") return ReplayStrategy::Timestamp;
  if (name == "random") return ReplayStrategy::RandomOrder;
  if (name == "adaptive") return ReplayStrategy::Adaptive;
  throw ContractError("unknown replay strategy '" + name + "' (expected timestamp, random, adaptive)");
}

void ReplayConfig::validate() const {
  require(!strategies.empty(), "replay needs at least one strategy");
  require(!seeds.empty(), "replay needs at least one seed");
  require(initial_train >= 1, "replay needs a non-empty initial training set");
  require(validation >= 1, "replay needs a non-empty validation set");
  require(p >= 0.0 && p <= 1.0, "p must lie in [0,1]");
  require(!retrain_every || *retrain_every >= 1, "retrain cadence must be >= 1");
  require(window_begin >= 0.0 && window_begin <= window_end && window_end <= 1.0,
          "replay window must satisfy 0 <= begin <= end <= 1");
}

std::vector<std::vector<double>> ReplayResult::mean_group_error(ReplayStrategy s) const {
  std::vector<std::vector<double>> acc;
  std::size_t n = 0;
  for (const auto& r : runs) {
    if (r.strategy != s) continue;
    if (acc.empty()) acc.assign(r.group_error.size(), std::vector<double>(r.group_error.front().size(), 0.0));
    for (std::size_t t = 0; t < acc.size(); ++t) {
      for (std::size_t a = 0; a < acc[t].size(); ++a) acc[t][a] += r.group_error[t][a];
    }
    ++n;
  }
  for (auto& row : acc) {
    for (auto& v : row) v /= static_cast<double>(n);
  }
  return acc;
}

std::vector<double> ReplayResult::mean_overall_error(ReplayStrategy s) const {
  std::vector<double> acc;
  std::size_t n = 0;
  for (const auto& r : runs) {
    if (r.strategy != s) continue;
    if (acc.empty()) acc.assign(r.overall_error.size(), 0.0);
    for (std::size_t t = 0; t < acc.size(); ++t) acc[t] += r.overall_error[t];
    ++n;
  }
  for (auto& v : acc) v /= static_cast<double>(n);
  return acc;
}

const ReplayRun& ReplayResult::find(ReplayStrategy s, std::uint64_t seed) const {
  for (const auto& r : runs) {
    if (r.strategy == s && r.seed == seed) return r;
  }
  throw ContractError("no replay run for strategy " + to_string(s) + " and seed " + std::to_string(seed));
}

namespace {

// Per-round test curves from the sequence of models (row 0 = initial model).
void fill_curves(ReplayRun& run, const std::vector<Model>& models, const Dataset& test, int groups) {
  const Model* prev = nullptr;
  std::vector<double> row;
  double overall = 0.0;
  for (const auto& m : models) {
    if (!prev || !(*prev == m)) {
      const auto conf = kernels::group_confusion(m, test);
      row.assign(static_cast<std::size_t>(groups), std::numeric_limits<double>::quiet_NaN());
      std::size_t n = 0, e = 0;
      for (std::size_t a = 0; a < conf.groups.size() && a < row.size(); ++a) {
        const auto& g = conf.groups[a];
        if (g.n > 0) row[a] = static_cast<double>(g.errors()) / static_cast<double>(g.n);
        n += g.n;
        e += g.errors();
      }
      overall = n == 0 ? 0.0 : static_cast<double>(e) / static_cast<double>(n);
    }
    prev = &m;
    run.group_error.push_back(row);
    run.overall_error.push_back(overall);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : row) {
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    run.max_gap.push_back(hi >= lo ? hi - lo : 0.0);
  }
}

std::vector<std::size_t> timestamp_order(const Dataset& pool) {
  require(pool.has_timestamps(), "timestamp strategy needs timestamps");
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& ts = pool.timestamps();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return ts[l] < ts[r]; });
  return order;
}

std::vector<Model> ordered_models(const Learner& learner, Dataset train, const Dataset& pool,
                                  const std::vector<std::size_t>& order, std::int64_t cadence) {
  std::vector<Model> models;
  models.reserve(order.size() + 1);
  Model model = fit(learner, train);
  models.push_back(model);
  for (std::size_t k = 0; k < order.size(); ++k) {
    train.append(pool[order[k]]);
    const auto t = static_cast<std::int64_t>(k + 1);
    if (t % cadence == 0 || k + 1 == order.size()) model = fit(learner, train, &model);
    models.push_back(model);
  }
  return models;
}

}  // namespace

ReplayResult replay(const Dataset& data, const ReplayConfig& config, const Dataset* external_test) {
  config.validate();
  const bool wants_timestamps =
      std::find(config.strategies.begin(), config.strategies.end(), ReplayStrategy::Timestamp) !=
      config.strategies.end();
  require(!wants_timestamps || data.has_timestamps(), "timestamp strategy needs a dataset with timestamps");

  Dataset test, rest;
  if (external_test) {
    require(!external_test->empty(), "external test set is empty");
    require(external_test->dim() == data.dim(), "external test set has the wrong dimension");
    test = *external_test;
    rest = data;
  } else {
    require(config.test_size >= 1, "replay needs a test set (test_size or an external one)");
    std::tie(test, rest) = carve_test(data, config.test_size, config.master_seed);
  }
  require(config.initial_train + config.validation < rest.size(), "replay split leaves no pool");

  const std::int64_t cadence = config.retrain_every.value_or(data.size() <= 5000 ? 1 : 10);
  const int groups = std::max(data.group_count(), test.group_count());
  const std::size_t S = config.seeds.size(), K = config.strategies.size();

  ReplayResult result;
  result.config = config;
  result.config.retrain_every = cadence;
  result.test_size = test.size();
  result.groups = groups;
  result.rounds = rest.size() - config.initial_train - config.validation;
  result.runs.resize(S * K);

  kernels::parallel_for(S * K, [&](std::size_t cell) {
    const std::size_t s = cell / K;
    const ReplayStrategy strategy = config.strategies[cell % K];
    const std::uint64_t seed = config.seeds[s];
    auto ds = split(rest, {config.initial_train, result.rounds, config.validation, 0}, derive(seed, "replay"));

    ReplayRun& out = result.runs[cell];
    out.strategy = strategy;
    out.seed = seed;
    std::vector<Model> models;
    if (strategy == ReplayStrategy::Adaptive) {
      SamplerConfig sc;
      sc.p = config.p;
      sc.rounds = static_cast<std::int64_t>(result.rounds);
      sc.update_mode = UpdateMode::BatchRetrain;
      sc.replacement = Replacement::Without;
      sc.metric = config.metric;
      sc.evaluate_on = EvaluateOn::Validation;
      sc.learner = config.learner;
      sc.retrain_every = cadence;
      sc.seed = seed;
      const auto trace = run(sc, ds);
      models.push_back(trace.initial_model);
      for (const auto& r : trace.rounds) {
        models.push_back(r.model);
        out.order.push_back(r.index);
      }
    } else {
      if (strategy == ReplayStrategy::Timestamp) {
        out.order = timestamp_order(ds.pool);
      } else {
        out.order.resize(ds.pool.size());
        std::iota(out.order.begin(), out.order.end(), std::size_t{0});
        Rng rng = make_stream(seed, "replay-random-order");
        std::shuffle(out.order.begin(), out.order.end(), rng);
      }
      const Dataset initial =
          config.baselines_train_on_validation ? Dataset::concat(ds.train, ds.validation) : ds.train;
      models = ordered_models(config.learner, initial, ds.pool, out.order, cadence);
    }
    fill_curves(out, models, test, groups);
  });

  const auto R = result.rounds;
  result.window_first = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(config.window_begin * R)));
  result.window_last = std::max(result.window_first,
                                std::min(R, static_cast<std::size_t>(std::ceil(config.window_end * R))));
  for (auto& r : result.runs) {
    double g = 0, e = 0;
    const std::size_t last = std::min(result.window_last, r.max_gap.size() - 1);
    for (std::size_t t = result.window_first; t <= last; ++t) {
      g += r.max_gap[t];
      e += r.overall_error[t];
    }
    const double n = static_cast<double>(last + 1 - result.window_first);
    r.window_gap = g / n;
    r.window_error = e / n;
  }
  return result;
}

// ---------------------------------------------------------------------------

OnedResult run_oned_scenario(const OnedConfig& config) {
  analytic::validate(config.truth);
  require(config.rounds >= 1, "rounds must be >= 1");
  require(config.initial >= 1, "initial set must be non-empty");
  require(config.validation >= 2, "validation set needs at least one point per group");
  const double ls = analytic::lambda_star(config.truth);

  DataSplit ds;
  ds.train = analytic::sample(config.truth, config.initial, derive(config.seed, "oned-initial"));
  ds.validation = analytic::sample_groups(config.truth, config.validation / 2, config.validation - config.validation / 2,
                                          derive(config.seed, "oned-validation"));
  const auto pool_size = static_cast<std::size_t>(
                             std::ceil(1.2 * static_cast<double>(config.rounds) / std::min(ls, 1.0 - ls))) +
                         1000;
  ds.pool = analytic::sample(config.truth, pool_size, derive(config.seed, "oned-pool"));

  SamplerConfig sc;
  sc.p = config.p;
  sc.rounds = config.rounds;
  sc.update_mode = UpdateMode::SgdUpdate;
  sc.lr = config.lr;
  sc.replacement = Replacement::Without;
  sc.metric = MetricKind::ZeroOneError;
  sc.evaluate_on = EvaluateOn::Validation;
  sc.learner.family = ModelFamily::Threshold;
  sc.learner.loss = config.loss;
  sc.seed = config.seed;

  OnedResult out;
  out.config = config;
  out.trace = run(sc, ds);
  out.c_fair = analytic::c_fair(config.truth);
  out.c_risk_min = analytic::c_of_lambda(config.truth, ls, config.loss);
  out.limit = analytic::theorem1_limit(config.truth, config.p, config.loss);

  auto push = [&](const Model& m, const std::vector<std::size_t>& counts) {
    const double c = std::get<ThresholdModel>(m).c;
    out.threshold.push_back(c);
    const double total = static_cast<double>(counts[0] + counts[1]);
    out.lambda.push_back(static_cast<double>(counts[0]) / total);
    out.true_error0.push_back(analytic::group_error(config.truth, 0, c));
    out.true_error1.push_back(analytic::group_error(config.truth, 1, c));
  };
  auto initial_counts = ds.train.group_sizes();
  initial_counts.resize(2, 0);
  push(out.trace.initial_model, initial_counts);
  for (const auto& r : out.trace.rounds) push(r.model, r.group_counts);
  out.final_threshold = out.threshold.back();
  out.final_true_gap = std::abs(out.true_error0.back() - out.true_error1.back());
  return out;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json to_json(const FrontierPoint& fp) {
  return {{"p", fp.p},
          {"mean_error", fp.mean_error},
          {"mean_violation", fp.mean_violation},
          {"errors", fp.errors},
          {"violations", fp.violations}};
}

nlohmann::json learner_json(const Learner& l) {
  return {{"family", l.family == ModelFamily::Threshold ? "threshold" : "linear"},
          {"loss", to_string(l.loss)},
          {"logistic", {{"max_iter", l.logistic.max_iter}, {"tol", l.logistic.tol}, {"l2", l.logistic.l2}}}};
}

}  // namespace

nlohmann::json to_json(const SweepResult& r) {
  const auto& c = r.config;
  auto records = nlohmann::json::array();
  for (const auto& fp : r.points) {
    auto row = to_json(fp);
    row["on_frontier"] = std::any_of(r.frontier.begin(), r.frontier.end(), [&](const FrontierPoint& f) {
      return f.p == fp.p && f.mean_error == fp.mean_error && f.mean_violation == fp.mean_violation;
    });
    records.push_back(std::move(row));
  }
  auto frontier = nlohmann::json::array();
  for (const auto& fp : r.frontier) frontier.push_back(to_json(fp));
  auto erm = to_json(r.erm_baseline);
  erm.erase("p");
  return {{"kind", "sweep"},
          {"config",
           {{"p_grid", c.p_grid},
            {"seeds", c.seeds},
            {"master_seed", c.master_seed},
            {"sizes",
             {{"train", c.sizes.train},
              {"pool", c.sizes.pool},
              {"validation", c.sizes.validation},
              {"test", c.sizes.test}}},
            {"sampler", to_json(c.sampler)},
            {"learner", learner_json(c.sampler.learner)}}},
          {"records", records},
          {"frontier", frontier},
          {"erm_baseline", erm}};
}

nlohmann::json to_json(const ReplayResult& r) {
  const auto& c = r.config;
  auto strategies = nlohmann::json::array();
  for (auto s : c.strategies) strategies.push_back(to_string(s));
  auto runs = nlohmann::json::array();
  for (const auto& run : r.runs) {
    runs.push_back({{"strategy", to_string(run.strategy)},
                    {"seed", run.seed},
                    {"window_gap", run.window_gap},
                    {"window_error", run.window_error},
                    {"final_overall_error", run.overall_error.back()},
                    {"final_group_error", run.group_error.back()},
                    {"max_gap", run.max_gap},
                    {"overall_error", run.overall_error},
                    {"group_error", run.group_error}});
  }
  auto records = nlohmann::json::array();
  for (auto s : c.strategies) {
    const auto ge = r.mean_group_error(s);
    const auto oe = r.mean_overall_error(s);
    for (std::size_t t = 0; t < oe.size(); ++t) {
      records.push_back({{"strategy", to_string(s)}, {"round", t}, {"overall_error", oe[t]}, {"group_error", ge[t]}});
    }
  }
  return {{"kind", "replay"},
          {"config",
           {{"strategies", strategies},
            {"seeds", c.seeds},
            {"master_seed", c.master_seed},
            {"initial_train", c.initial_train},
            {"validation", c.validation},
            {"test_size", r.test_size},
            {"p", c.p},
            {"metric", to_string(c.metric)},
            {"learner", learner_json(c.learner)},
            {"retrain_every", c.retrain_every.value_or(1)},
            {"baselines_train_on_validation", c.baselines_train_on_validation},
            {"window", {c.window_begin, c.window_end}}}},
          {"rounds", r.rounds},
          {"groups", r.groups},
          {"window_rounds", {r.window_first, r.window_last}},
          {"runs", runs},
          {"records", records}};
}

nlohmann::json to_json(const OnedResult& r) {
  const auto& c = r.config;
  auto records = nlohmann::json::array();
  for (std::size_t t = 0; t < r.threshold.size(); ++t) {
    nlohmann::json row{{"t", t},
                       {"threshold", r.threshold[t]},
                       {"lambda", r.lambda[t]},
                       {"true_error0", r.true_error0[t]},
                       {"true_error1", r.true_error1[t]}};
    if (t > 0) {
      const auto& rec = r.trace.rounds[t - 1];
      row["disadvantaged"] = rec.disadvantaged ? nlohmann::json(*rec.disadvantaged) : nlohmann::json();
      row["coin"] = rec.population_draw ? "population" : "group";
      row["group"] = rec.group;
    }
    records.push_back(std::move(row));
  }
  return {{"kind", "oned"},
          {"config",
           {{"truth", fairsample::to_json(c.truth)},
            {"loss", to_string(c.loss)},
            {"p", c.p},
            {"validation", c.validation},
            {"rounds", c.rounds},
            {"lr_scale", c.lr.scale},
            {"initial", c.initial},
            {"seed", c.seed}}},
          {"c_fair", r.c_fair},
          {"c_risk_min", r.c_risk_min},
          {"limit", {{"lambda", r.limit.lambda}, {"c", r.limit.c}, {"converges_to_fair", r.limit.converges_to_fair}}},
          {"final_threshold", r.final_threshold},
          {"final_true_gap", r.final_true_gap},
          {"stop_reason", r.trace.stop_reason ? nlohmann::json(*r.trace.stop_reason) : nlohmann::json()},
          {"records", records}};
}

}  // namespace fairsample
