#pragma once

// The adaptive sampling loop. Each round: find the disadvantaged group (largest
// metric value on the evaluation set), flip a p-coin, draw one pool point from
// the whole pool (heads) or from that group (tails), add it to the training
// set and update the model.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fairsample/data.hpp"
#include "fairsample/metrics.hpp"
#include "fairsample/models.hpp"
#include "fairsample/rng.hpp"

namespace fairsample {

enum class UpdateMode { BatchRetrain, SgdUpdate };
enum class Replacement { With, Without };
enum class EvaluateOn { Validation, Training };

std::string to_string(UpdateMode mode);
std::string to_string(Replacement mode);
std::string to_string(EvaluateOn where);
UpdateMode parse_update_mode(const std::string& name);      // "batch" | "sgd"
Replacement parse_replacement(const std::string& name);     // "with" | "without"
EvaluateOn parse_evaluate_on(const std::string& name);      // "validation" | "training"

// lr(t) = scale / sqrt(t), t >= 1.
struct LearningRate {
  double scale = 1.0;

  double operator()(std::int64_t t) const;
};

struct SamplerConfig {
  double p = 0.0;
  std::int64_t rounds = 1;
  UpdateMode update_mode = UpdateMode::BatchRetrain;
  LearningRate lr;
  double sgd_l2 = 0.0;
  Replacement replacement = Replacement::Without;
  MetricKind metric = MetricKind::ZeroOneError;
  EvaluateOn evaluate_on = EvaluateOn::Validation;
  Learner learner;
  // BatchRetrain refits every k-th round and after the last round.
  std::int64_t retrain_every = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

// Groups ranked by metric value, largest first, ties toward the smaller id.
// Groups without a value (absent or lacking the conditioning event) come last
// in id order and get a warning.
struct GroupRanking {
  std::vector<int> order;
  std::vector<std::optional<double>> values;
  std::vector<std::string> warnings;

  // First ranked group; nullopt if no group has a value.
  std::optional<int> top() const;
};

GroupRanking rank_groups(MetricKind metric, const kernels::Confusion& confusion);

// argmax_a f_a(model) on `data`. Throws ContractError if no group is evaluable.
int disadvantaged_group(const Model& model, const Dataset& data, MetricKind metric,
                        std::vector<std::string>* warnings = nullptr);

// Unlabeled points available for sampling, indexed into the pool dataset.
class Pool {
 public:
  explicit Pool(const Dataset& data);

  const Dataset& data() const { return *data_; }
  int group_count() const { return static_cast<int>(by_group_.size()); }
  std::size_t remaining() const { return total_; }
  std::size_t remaining(int a) const;
  bool empty() const { return total_ == 0; }

  // Uniform over remaining entries (of group a); Without removes the entry.
  // nullopt when nothing eligible is left.
  std::optional<std::size_t> draw_population(Replacement mode, Rng& rng);
  std::optional<std::size_t> draw_group(int a, Replacement mode, Rng& rng);

 private:
  std::size_t take(int a, std::size_t pos, Replacement mode);

  const Dataset* data_;
  std::vector<std::vector<std::size_t>> by_group_;
  std::size_t total_ = 0;
};

struct DrawTarget {
  std::optional<int> group;  // nullopt = whole pool

  static DrawTarget population() { return {}; }
  static DrawTarget of_group(int a) { return {a}; }
};

std::optional<std::size_t> draw(Pool& pool, DrawTarget target, Replacement mode, Rng& rng);

struct RoundRecord {
  std::int64_t t = 0;
  std::optional<int> disadvantaged;  // from the model before the update
  bool population_draw = false;      // coin outcome
  std::size_t index = 0;             // into the pool dataset
  int group = 0;                     // group of the drawn point
  // Metric values and overall 0-1 error of the updated model on the evaluation set.
  std::vector<std::optional<double>> f_values;
  double eval_error = 0.0;
  std::vector<std::size_t> group_counts;  // of the training set after this round
  Model model;                            // after the update
  std::vector<std::string> warnings;
};

struct RunTrace {
  SamplerConfig config;
  Model initial_model;
  std::vector<std::optional<double>> initial_f_values;
  std::vector<RoundRecord> rounds;
  Model final_model;
  std::optional<std::string> stop_reason;  // set on early termination
};

// Rounds 1..T on split.train (S_0), split.pool and split.validation.
// `initial_model` defaults to a fit on S_0.
RunTrace run(const SamplerConfig& config, const DataSplit& split, const std::optional<Model>& initial_model = {});

// Same loop with every point drawn from the whole pool; uses the same random
// stream as the adaptive run's population draws.
RunTrace run_uniform_baseline(const SamplerConfig& config, const DataSplit& split,
                              const std::optional<Model>& initial_model = {});

nlohmann::json to_json(const RoundRecord& record);
nlohmann::json to_json(const SamplerConfig& config);
// Header line (config, initial model, stop reason) followed by one line per round.
std::string to_jsonl(const RunTrace& trace);

}  // namespace fairsample
