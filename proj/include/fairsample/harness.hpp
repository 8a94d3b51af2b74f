#pragma once

// Experiment drivers: p-sweeps with Pareto filtering, the three-ordering
// sequential replay, and the one-dimensional SGD scenario with analytic
// overlays.

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"

#include "fairsample/analytic.hpp"
#include "fairsample/data.hpp"
#include "fairsample/sampler.hpp"

namespace fairsample {

// n evenly spaced values over [lo, hi] including both ends (n >= 2), or {lo}.
std::vector<double> linspace(double lo, double hi, std::size_t n);

// ---------------------------------------------------------------------------
// Pareto sweep

struct SweepConfig {
  std::vector<double> p_grid = linspace(0.0, 1.0, 100);
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::uint64_t master_seed = 0;  // fixes the test split
  SplitSizes sizes{200, 2000, 1000, 2000};
  // p and seed are overwritten per cell.
  SamplerConfig sampler;

  void validate() const;
};

struct FrontierPoint {
  double p = 0;
  double mean_error = 0;
  double mean_violation = 0;
  std::vector<double> errors;      // per seed, in config.seeds order
  std::vector<double> violations;  // per seed
};

struct SweepResult {
  SweepConfig config;
  std::vector<FrontierPoint> points;    // in p_grid order
  std::vector<FrontierPoint> frontier;  // pareto_filter(points)
  FrontierPoint erm_baseline;           // fit on train + pool, p = NaN
};

// Every (p, seed) cell shares the test split and the seed's train/pool/validation
// split; cells run in parallel and are averaged in (p, seed) order.
SweepResult sweep_pareto(const Dataset& data, const SweepConfig& config);

// q dominates r if q is no worse in both error and violation and better in one.
bool dominates(const FrontierPoint& q, const FrontierPoint& r);

// Non-dominated points (exact duplicates collapsed), stably sorted by error.
std::vector<FrontierPoint> pareto_filter(const std::vector<FrontierPoint>& points);

// ---------------------------------------------------------------------------
// Sequential replay

enum class ReplayStrategy { Timestamp, RandomOrder, Adaptive };

std::string to_string(ReplayStrategy s);
ReplayStrategy parse_strategy(const std::string& name);  // "timestamp" | "random" | "adaptive"

struct ReplayConfig {
  std::vector<ReplayStrategy> strategies = {ReplayStrategy::Timestamp, ReplayStrategy::RandomOrder,
                                            ReplayStrategy::Adaptive};
  std::vector<std::uint64_t> seeds = {0};
  std::uint64_t master_seed = 0;
  std::size_t initial_train = 200;
  std::size_t validation = 1000;
  // Carved off the data with master_seed when no external test set is passed.
  std::size_t test_size = 0;
  double p = 0.0;  // coin of the adaptive strategy
  MetricKind metric = MetricKind::ZeroOneError;
  Learner learner;
  // Default: every round for data with <= 5000 rows, else every 10 rounds.
  std::optional<std::int64_t> retrain_every;
  // Baselines start from train + validation (the adaptive strategy needs the
  // validation set for group detection and does not train on it).
  bool baselines_train_on_validation = true;
  double window_begin = 0.05;  // fractions of the round count
  double window_end = 0.30;

  void validate() const;
};

struct ReplayRun {
  ReplayStrategy strategy = ReplayStrategy::Adaptive;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> group_error;  // [round][group], row 0 = initial model
  std::vector<double> overall_error;             // [round]
  std::vector<double> max_gap;                   // [round] max pairwise group-error gap
  std::vector<std::size_t> order;                // pool indices in draw order
  double window_gap = 0;    // mean of max_gap over the window
  double window_error = 0;  // mean of overall_error over the window
};

struct ReplayResult {
  ReplayConfig config;
  std::size_t rounds = 0;
  std::size_t window_first = 0, window_last = 0;  // inclusive round range
  std::size_t test_size = 0;
  int groups = 0;
  std::vector<ReplayRun> runs;  // seed-major, strategies in config order

  // Mean curves over seeds for one strategy.
  std::vector<std::vector<double>> mean_group_error(ReplayStrategy s) const;
  std::vector<double> mean_overall_error(ReplayStrategy s) const;
  const ReplayRun& find(ReplayStrategy s, std::uint64_t seed) const;
};

ReplayResult replay(const Dataset& data, const ReplayConfig& config, const Dataset* external_test = nullptr);

// ---------------------------------------------------------------------------
// One-dimensional SGD scenario

struct OnedConfig {
  analytic::GroundTruth truth = UniformMixtureSpec{0, 10, 7, 6, 12, 9, 0.85};
  MarginLossKind loss = MarginLossKind::Hinge;
  double p = 0.0;
  std::size_t validation = 20000;  // split evenly between the groups
  std::int64_t rounds = 5000;
  LearningRate lr{1.0};
  std::size_t initial = 50;
  std::uint64_t seed = 0;
};

struct OnedResult {
  OnedConfig config;
  RunTrace trace;
  double c_fair = 0;
  double c_risk_min = 0;  // c(lambda*)
  analytic::LimitPrediction limit;
  std::vector<double> threshold;     // [round], row 0 = initial
  std::vector<double> lambda;        // group-0 fraction of the training set
  std::vector<double> true_error0;   // [round]
  std::vector<double> true_error1;   // [round]
  double final_threshold = 0;
  double final_true_gap = 0;
};

OnedResult run_oned_scenario(const OnedConfig& config);

nlohmann::json to_json(const SweepResult& result);
nlohmann::json to_json(const ReplayResult& result);
nlohmann::json to_json(const OnedResult& result);

}  // namespace fairsample
