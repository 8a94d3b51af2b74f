#include "fairsample/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "fairsample/emit.hpp"
#include "fairsample/error.hpp"
#include "fairsample/kernels.hpp"

namespace fairsample::bounds {

void BoundParams::validate() const {
  require(vc >= 1, "VC dimension must be >= 1");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
  require(T >= 1, "T must be >= 1");
  require(n0t >= 1 && n1t >= 1, "per-group counts must be >= 1");
}

double group_width(int vc, double delta, std::int64_t T, std::int64_t n) {
  require(n >= 1, "per-group count must be >= 1");
  return std::sqrt(2.0 * vc * std::log(2.0 * static_cast<double>(T) / delta) / static_cast<double>(n));
}

double epsilon(const BoundParams& p) {
  p.validate();
  return group_width(p.vc, p.delta, p.T, p.n0t) + group_width(p.vc, p.delta, p.T, p.n1t);
}

double dichotomy_bound(const BoundParams& p) {
  p.validate();
  return 2.0 * group_width(p.vc, p.delta, p.T, std::min(p.n0t, p.n1t));
}

double dichotomy_bound_main_text(const BoundParams& p) {
  return dichotomy_bound(p) / std::sqrt(2.0);
}

GroupLosses brute_force_true_loss(const analytic::GroundTruth& truth, const ThresholdModel& model) {
  return {analytic::group_error(truth, 0, model.c), analytic::group_error(truth, 1, model.c)};
}

GroupLosses brute_force_true_loss(const FiniteDistribution& dist, const ThresholdModel& model) {
  double mass[2] = {0, 0}, err[2] = {0, 0};
  for (const auto& atom : dist) {
    require(atom.a == 0 || atom.a == 1, "finite distribution must have groups 0 and 1");
    require(atom.prob >= 0.0, "atom probabilities must be non-negative");
    mass[atom.a] += atom.prob;
    if (sign_label(atom.x - model.c) != atom.y) err[atom.a] += atom.prob;
  }
  require(mass[0] > 0 && mass[1] > 0, "both groups need positive mass");
  return {err[0] / mass[0], err[1] / mass[1]};
}

DichotomyReport theorem2_check(const RunTrace& trace, const analytic::GroundTruth& truth, int vc, double delta,
                               std::int64_t T) {
  const auto& cfg = trace.config;
  require(cfg.evaluate_on == EvaluateOn::Training, "dichotomy check needs training-set evaluation");
  require(cfg.update_mode == UpdateMode::BatchRetrain && cfg.retrain_every == 1,
          "dichotomy check needs ERM retraining in every round");
  require(cfg.learner.family == ModelFamily::Threshold, "dichotomy check needs the threshold class");
  require(cfg.metric == MetricKind::ZeroOneError, "dichotomy check needs the 0-1 metric");
  require(T >= 1 && static_cast<std::int64_t>(trace.rounds.size()) >= T + 1,
          "dichotomy check needs a trace with at least T+1 rounds");

  const auto& last = trace.rounds[static_cast<std::size_t>(T - 1)];
  require(last.group_counts.size() >= 2, "dichotomy check needs two groups");

  DichotomyReport rep;
  rep.params = BoundParams{vc, delta, T, static_cast<std::int64_t>(last.group_counts[0]),
                           static_cast<std::int64_t>(last.group_counts[1])};
  rep.params.validate();
  rep.counts = last.group_counts;
  rep.threshold = std::get<ThresholdModel>(last.model).c;
  rep.true_losses = brute_force_true_loss(truth, std::get<ThresholdModel>(last.model));
  rep.bound = dichotomy_bound(rep.params);
  rep.bound_main_text = dichotomy_bound_main_text(rep.params);
  rep.higher_true_loss_group = rep.true_losses.loss1 > rep.true_losses.loss0 ? 1 : 0;
  rep.next_round_group = trace.rounds[static_cast<std::size_t>(T)].disadvantaged;
  rep.arm1 = rep.true_losses.gap() <= rep.bound;
  rep.arm2 = !rep.arm1 && rep.next_round_group == rep.higher_true_loss_group;
  return rep;
}

DichotomyStudy dichotomy_study(const DichotomyStudyConfig& config) {
  require(config.seeds >= 1, "dichotomy study needs at least one seed");
  require(config.T >= 1, "T must be >= 1");
  require(config.initial_per_group >= 1, "initial set needs at least one point per group");
  const double ls = analytic::lambda_star(config.truth);
  const auto rounds = config.T + 1;
  // Large enough that either group alone can supply every round.
  const auto pool_size =
      static_cast<std::size_t>(std::ceil(2.0 * static_cast<double>(rounds) / std::min(ls, 1.0 - ls))) + 200;

  DichotomyStudy study;
  study.config = config;
  study.reports.resize(config.seeds);
  kernels::parallel_for(config.seeds, [&](std::size_t k) {
    const std::uint64_t seed = config.master_seed + k;
    DataSplit split;
    split.train = analytic::sample_groups(config.truth, config.initial_per_group, config.initial_per_group, seed);
    split.pool = analytic::sample(config.truth, pool_size, seed ^ 0x9e3779b97f4a7c15ULL);
    SamplerConfig sc;
    sc.p = config.p;
    sc.rounds = rounds;
    sc.update_mode = UpdateMode::BatchRetrain;
    sc.replacement = Replacement::Without;
    sc.metric = MetricKind::ZeroOneError;
    sc.evaluate_on = EvaluateOn::Training;
    sc.learner.family = ModelFamily::Threshold;
    sc.learner.loss = config.loss;
    sc.seed = seed;
    const auto trace = run(sc, split);
    study.reports[k] = theorem2_check(trace, config.truth, 1, config.delta, config.T);
  });
  for (const auto& r : study.reports) {
    study.arm1 += r.arm1;
    study.arm2 += r.arm2;
    study.violations += !r.holds();
  }
  const double n = static_cast<double>(config.seeds);
  study.violation_fraction = static_cast<double>(study.violations) / n;
  study.allowed_fraction = config.delta + 3.0 * std::sqrt(config.delta * (1.0 - config.delta) / n);
  return study;
}

nlohmann::json to_json(const BoundParams& p) {
  return {{"vc", p.vc}, {"delta", p.delta}, {"T", p.T}, {"n0t", p.n0t}, {"n1t", p.n1t}};
}

nlohmann::json to_json(const DichotomyReport& r) {
  return {{"params", to_json(r.params)},
          {"threshold", r.threshold},
          {"true_loss0", r.true_losses.loss0},
          {"true_loss1", r.true_losses.loss1},
          {"true_gap", r.true_losses.gap()},
          {"counts", r.counts},
          {"epsilon", epsilon(r.params)},
          {"bound", r.bound},
          {"bound_main_text", r.bound_main_text},
          {"higher_true_loss_group", r.higher_true_loss_group},
          {"next_round_group", r.next_round_group ? nlohmann::json(*r.next_round_group) : nlohmann::json()},
          {"arm1", r.arm1},
          {"arm2", r.arm2},
          {"holds", r.holds()}};
}

nlohmann::json to_json(const DichotomyStudy& s) {
  auto records = nlohmann::json::array();
  for (std::size_t k = 0; k < s.reports.size(); ++k) {
    auto row = to_json(s.reports[k]);
    row["seed"] = s.config.master_seed + k;
    records.push_back(std::move(row));
  }
  return {{"kind", "check-bounds"},
          {"truth", to_json(s.config.truth)},
          {"initial_per_group", s.config.initial_per_group},
          {"T", s.config.T},
          {"seeds", s.config.seeds},
          {"master_seed", s.config.master_seed},
          {"delta", s.config.delta},
          {"p", s.config.p},
          {"loss", to_string(s.config.loss)},
          {"arm1", s.arm1},
          {"arm2", s.arm2},
          {"violations", s.violations},
          {"violation_fraction", s.violation_fraction},
          {"allowed_fraction", s.allowed_fraction},
          {"passed", s.passed()},
          {"records", records}};
}

}  // namespace fairsample::bounds
