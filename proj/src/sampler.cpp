#include "fairsample/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fairsample/error.hpp"
#include "fairsample/kernels.hpp"

namespace fairsample {

std::string to_string(UpdateMode mode) { return mode == UpdateMode::BatchRetrain ? "batch" : "sgd"; }
std::string to_string(Replacement mode) { return mode == Replacement::With ? "with" : "without"; }
std::string to_string(EvaluateOn where) { return where == EvaluateOn::Validation ? "validation" : "training"; }

UpdateMode parse_update_mode(const std::string& name) {
  if (name == "batch") return UpdateMode::BatchRetrain;
  if (name == "sgd") return UpdateMode::SgdUpdate;
  throw ContractError("unknown update mode '" + name + "' (expected batch or sgd)");
}

Replacement parse_replacement(const std::string& name) {
  if (name == "with") return Replacement::With;
  if (name == "without") return Replacement::Without;
  throw ContractError("unknown replacement mode '" + name + "' (expected with or without)");
}

EvaluateOn parse_evaluate_on(const std::string& name) {
  if (name == "validation") return EvaluateOn::Validation;
  if (name == "training") return EvaluateOn::Training;
  throw ContractError("unknown evaluation set '" + name + "' (expected validation or training)");
}

double LearningRate::operator()(std::int64_t t) const {
  require(t >= 1, "learning-rate round index must be >= 1");
  return scale / std::sqrt(static_cast<double>(t));
}

void SamplerConfig::validate() const {
  require(p >= 0.0 && p <= 1.0, "p must lie in [0,1]");
  require(rounds >= 1, "rounds (T) must be >= 1");
  require(retrain_every >= 1, "retrain cadence must be >= 1");
  require(lr.scale > 0.0, "learning-rate scale must be > 0");
  require(sgd_l2 >= 0.0, "SGD l2 must be >= 0");
}

// ---------------------------------------------------------------------------

std::optional<int> GroupRanking::top() const {
  if (order.empty() || !values[static_cast<std::size_t>(order.front())]) return std::nullopt;
  return order.front();
}

GroupRanking rank_groups(MetricKind metric, const kernels::Confusion& confusion) {
  GroupRanking r;
  const std::size_t k = confusion.groups.size();
  for (std::size_t a = 0; a < k; ++a) {
    r.values.push_back(group_value_from_counts(metric, confusion.groups[a]));
    if (!r.values.back()) r.warnings.push_back("group " + std::to_string(a) + " not evaluable; excluded");
    r.order.push_back(static_cast<int>(a));
  }
  std::stable_sort(r.order.begin(), r.order.end(), [&](int x, int y) {
    const auto& vx = r.values[static_cast<std::size_t>(x)];
    const auto& vy = r.values[static_cast<std::size_t>(y)];
    if (vx && vy) return *vx > *vy;
    return vx.has_value() && !vy.has_value();
  });
  return r;
}

int disadvantaged_group(const Model& model, const Dataset& data, MetricKind metric,
                        std::vector<std::string>* warnings) {
  if (!data.empty()) check_dimension(model, data.dim());
  const auto ranking = rank_groups(metric, kernels::group_confusion(model, data));
  if (warnings) warnings->insert(warnings->end(), ranking.warnings.begin(), ranking.warnings.end());
  const auto top = ranking.top();
  require(top.has_value(), "no group is evaluable for " + to_string(metric));
  return *top;
}

// ---------------------------------------------------------------------------

Pool::Pool(const Dataset& data) : data_(&data) {
  by_group_.resize(static_cast<std::size_t>(data.group_count()));
  for (std::size_t i = 0; i < data.size(); ++i) by_group_[static_cast<std::size_t>(data[i].a)].push_back(i);
  total_ = data.size();
}

std::size_t Pool::remaining(int a) const {
  if (a < 0 || a >= group_count()) return 0;
  return by_group_[static_cast<std::size_t>(a)].size();
}

std::size_t Pool::take(int a, std::size_t pos, Replacement mode) {
  auto& v = by_group_[static_cast<std::size_t>(a)];
  const std::size_t idx = v[pos];
  if (mode == Replacement::Without) {
    v[pos] = v.back();
    v.pop_back();
    --total_;
  }
  return idx;
}

std::optional<std::size_t> Pool::draw_population(Replacement mode, Rng& rng) {
  if (total_ == 0) return std::nullopt;
  std::size_t k = uniform_index(rng, total_);
  for (int a = 0; a < group_count(); ++a) {
    const std::size_t n = by_group_[static_cast<std::size_t>(a)].size();
    if (k < n) return take(a, k, mode);
    k -= n;
  }
  return std::nullopt;
}

std::optional<std::size_t> Pool::draw_group(int a, Replacement mode, Rng& rng) {
  const std::size_t n = remaining(a);
  if (n == 0) return std::nullopt;
  return take(a, uniform_index(rng, n), mode);
}

std::optional<std::size_t> draw(Pool& pool, DrawTarget target, Replacement mode, Rng& rng) {
  return target.group ? pool.draw_group(*target.group, mode, rng) : pool.draw_population(mode, rng);
}

// ---------------------------------------------------------------------------

namespace {

RunTrace run_impl(const SamplerConfig& config, const DataSplit& split, const std::optional<Model>& initial_model,
                  bool always_population) {
  config.validate();
  if (config.evaluate_on == EvaluateOn::Validation) {
    require(!split.validation.empty(), "validation set is empty");
  }
  require(!split.pool.empty(), "pool is empty");

  Dataset train = split.train;
  const int groups = std::max({train.group_count(), split.pool.group_count(), split.validation.group_count()});
  const Dataset& eval_fixed = split.validation;

  Model model;
  if (initial_model) {
    model = *initial_model;
  } else {
    require(!train.empty(), "initial training set is empty and no initial model was given");
    model = fit(config.learner, train);
  }
  check_dimension(model, split.pool.dim());

  Pool pool(split.pool);
  Rng coin_rng = make_stream(config.seed, "coin");
  Rng population_rng = make_stream(config.seed, "population-draw");
  Rng group_rng = make_stream(config.seed, "group-draw");

  auto evaluate = [&](const Model& m) {
    const Dataset& eval = config.evaluate_on == EvaluateOn::Validation ? eval_fixed : train;
    auto conf = kernels::group_confusion(m, eval);
    conf.groups.resize(static_cast<std::size_t>(groups));
    return conf;
  };
  auto overall = [](const kernels::Confusion& conf) {
    std::size_t n = 0, e = 0;
    for (const auto& g : conf.groups) {
      n += g.n;
      e += g.errors();
    }
    return n == 0 ? 0.0 : static_cast<double>(e) / static_cast<double>(n);
  };
  auto counts = [&] {
    auto c = train.group_sizes();
    c.resize(static_cast<std::size_t>(groups), 0);
    return c;
  };

  RunTrace trace;
  trace.config = config;
  trace.initial_model = model;
  auto ranking = rank_groups(config.metric, evaluate(model));
  trace.initial_f_values = ranking.values;

  for (std::int64_t t = 1; t <= config.rounds; ++t) {
    RoundRecord rec;
    rec.t = t;
    rec.warnings = ranking.warnings;
    rec.disadvantaged = ranking.top();
    rec.population_draw = always_population || bernoulli(coin_rng, config.p);

    std::optional<std::size_t> idx;
    if (rec.population_draw) {
      idx = pool.draw_population(config.replacement, population_rng);
    } else {
      for (int a : ranking.order) {
        idx = pool.draw_group(a, config.replacement, group_rng);
        if (idx) {
          if (rec.disadvantaged && a != *rec.disadvantaged) {
            rec.warnings.push_back("group " + std::to_string(*rec.disadvantaged) + " exhausted; drew from group " +
                                   std::to_string(a));
          }
          break;
        }
      }
    }
    if (!idx) {
      trace.stop_reason = "pool exhausted after " + std::to_string(t - 1) + " rounds";
      break;
    }

    const LabeledPoint& point = split.pool[*idx];
    rec.index = *idx;
    rec.group = point.a;
    train.append(point);

    if (config.update_mode == UpdateMode::SgdUpdate) {
      model = sgd_step(model, point, config.lr(t), config.learner.loss, config.sgd_l2);
    } else if (t % config.retrain_every == 0 || t == config.rounds || pool.empty()) {
      model = fit(config.learner, train, &model);
    }

    const auto conf = evaluate(model);
    ranking = rank_groups(config.metric, conf);
    rec.f_values = ranking.values;
    rec.eval_error = overall(conf);
    rec.group_counts = counts();
    rec.model = model;
    trace.rounds.push_back(std::move(rec));
  }
  trace.final_model = model;
  return trace;
}

nlohmann::json optional_values(const std::vector<std::optional<double>>& values) {
  auto arr = nlohmann::json::array();
  for (const auto& v : values) arr.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
  return arr;
}

}  // namespace

RunTrace run(const SamplerConfig& config, const DataSplit& split, const std::optional<Model>& initial_model) {
  return run_impl(config, split, initial_model, false);
}

RunTrace run_uniform_baseline(const SamplerConfig& config, const DataSplit& split,
                              const std::optional<Model>& initial_model) {
  return run_impl(config, split, initial_model, true);
}

nlohmann::json to_json(const RoundRecord& r) {
  nlohmann::json j;
  j["t"] = r.t;
  j["disadvantaged"] = r.disadvantaged ? nlohmann::json(*r.disadvantaged) : nlohmann::json(nullptr);
  j["coin"] = r.population_draw ? "population" : "group";
  j["index"] = r.index;
  j["group"] = r.group;
  j["f_values"] = optional_values(r.f_values);
  j["eval_error"] = r.eval_error;
  j["group_counts"] = r.group_counts;
  j["model"] = r.model;
  j["warnings"] = r.warnings;
  return j;
}

nlohmann::json to_json(const SamplerConfig& c) {
  return {{"p", c.p},
          {"rounds", c.rounds},
          {"update_mode", to_string(c.update_mode)},
          {"lr_scale", c.lr.scale},
          {"sgd_l2", c.sgd_l2},
          {"replacement", to_string(c.replacement)},
          {"metric", to_string(c.metric)},
          {"evaluate_on", to_string(c.evaluate_on)},
          {"model_family", c.learner.family == ModelFamily::Threshold ? "threshold" : "linear"},
          {"loss", to_string(c.learner.loss)},
          {"retrain_every", c.retrain_every},
          {"seed", c.seed}};
}

std::string to_jsonl(const RunTrace& trace) {
  std::ostringstream out;
  nlohmann::json header{{"config", to_json(trace.config)},
                        {"initial_model", trace.initial_model},
                        {"initial_f_values", optional_values(trace.initial_f_values)},
                        {"final_model", trace.final_model},
                        {"rounds_completed", trace.rounds.size()},
                        {"stop_reason", trace.stop_reason ? nlohmann::json(*trace.stop_reason) : nlohmann::json()}};
  out << header.dump() << '\n';
  for (const auto& r : trace.rounds) out << to_json(r).dump() << '\n';
  return out.str();
}

}  // namespace fairsample
