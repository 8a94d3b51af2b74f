#pragma once

// Finite-sample deviation widths and a checker for the two-arm dichotomy of the
// training-set-evaluated strategy: after T rounds either the true group losses
// are within the bound of each other, or the next round samples from the group
// with the higher true loss.

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"

#include "fairsample/analytic.hpp"
#include "fairsample/models.hpp"
#include "fairsample/sampler.hpp"

namespace fairsample::bounds {

struct BoundParams {
  int vc = 1;
  double delta = 0.05;
  std::int64_t T = 1;
  std::int64_t n0t = 1;
  std::int64_t n1t = 1;

  void validate() const;
};

// sqrt(2 VC ln(2T/delta) / n)
double group_width(int vc, double delta, std::int64_t T, std::int64_t n);

// eps(t) = group_width(n0t) + group_width(n1t).
double epsilon(const BoundParams& params);

// Dichotomy threshold 2 max_a sqrt(2 VC ln(2T/delta) / n_a^T), and the variant
// without the 2 inside the root.
double dichotomy_bound(const BoundParams& params);
double dichotomy_bound_main_text(const BoundParams& params);

// A distribution on finitely many labeled points.
struct FiniteAtom {
  double x = 0;
  int y = 1;
  int a = 0;
  double prob = 0;
};
using FiniteDistribution = std::vector<FiniteAtom>;

struct GroupLosses {
  double loss0 = 0;
  double loss1 = 0;

  double gap() const { return loss0 > loss1 ? loss0 - loss1 : loss1 - loss0; }
};

// Population 0-1 loss of a threshold model in each group (conditional on the
// group): closed-form CDF expressions, or exact enumeration.
GroupLosses brute_force_true_loss(const analytic::GroundTruth& truth, const ThresholdModel& model);
GroupLosses brute_force_true_loss(const FiniteDistribution& dist, const ThresholdModel& model);

struct DichotomyReport {
  BoundParams params;
  double threshold = 0;           // c of h_T
  GroupLosses true_losses;
  std::vector<std::size_t> counts;  // n_a^T
  double bound = 0;
  double bound_main_text = 0;
  int higher_true_loss_group = 0;   // ties -> 0
  std::optional<int> next_round_group;  // group targeted in round T+1
  bool arm1 = false;  // |loss0 - loss1| <= bound
  bool arm2 = false;  // gap > bound and round T+1 targets the higher-true-loss group
  bool holds() const { return arm1 || arm2; }
};

// `trace` must come from a train-set-evaluated, every-round-retrained threshold
// ERM run with the 0-1 metric and at least T+1 rounds.
DichotomyReport theorem2_check(const RunTrace& trace, const analytic::GroundTruth& truth, int vc, double delta,
                               std::int64_t T);

struct DichotomyStudyConfig {
  analytic::GroundTruth truth = UniformMixtureSpec{};
  std::size_t initial_per_group = 25;
  std::int64_t T = 200;
  std::size_t seeds = 200;
  std::uint64_t master_seed = 0;
  double delta = 0.05;
  double p = 0.0;
  MarginLossKind loss = MarginLossKind::Hinge;
};

struct DichotomyStudy {
  DichotomyStudyConfig config;
  std::vector<DichotomyReport> reports;  // one per seed, in seed order
  std::size_t arm1 = 0, arm2 = 0, violations = 0;
  double violation_fraction = 0;
  double allowed_fraction = 0;  // delta + 3 sqrt(delta (1 - delta) / N)

  bool passed() const { return violation_fraction <= allowed_fraction; }
};

// Runs T+1 rounds per seed (seed index k uses seed master_seed + k), in parallel
// over seeds.
DichotomyStudy dichotomy_study(const DichotomyStudyConfig& config);

nlohmann::json to_json(const BoundParams& params);
nlohmann::json to_json(const DichotomyReport& report);
nlohmann::json to_json(const DichotomyStudy& study);

}  // namespace fairsample::bounds
