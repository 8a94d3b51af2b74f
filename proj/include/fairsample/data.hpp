#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fairsample {

// sign(0) resolves to +1 everywhere in the library.
constexpr int sign_label(double v) { return v >= 0.0 ? 1 : -1; }

struct LabeledPoint {
  std::vector<double> x;
  int y = 1;  // -1 or +1
  int a = 0;  // group id

  std::span<const double> features() const { return x; }
};

// Ordered collection of points sharing one feature dimension. Grows only by
// append(); copies are cheap enough for the sizes used here.
class Dataset {
 public:
  Dataset() = default;

  // group_count defaults to 1 + max group id. An explicit value lets subsets
  // keep the parent's group count when some group is absent from the subset.
  explicit Dataset(std::vector<LabeledPoint> points, std::optional<int> group_count = std::nullopt,
                   std::vector<std::int64_t> timestamps = {});

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  std::size_t dim() const { return dim_; }
  int group_count() const { return group_count_; }

  const std::vector<LabeledPoint>& points() const { return points_; }
  const LabeledPoint& operator[](std::size_t i) const { return points_[i]; }

  bool has_timestamps() const { return !timestamps_.empty(); }
  const std::vector<std::int64_t>& timestamps() const { return timestamps_; }

  std::vector<std::size_t> group_sizes() const;

  // Points at `indices` in that order; keeps dimension, group count and timestamps.
  Dataset subset(std::span<const std::size_t> indices) const;

  // Adds one point. A timestamped dataset stays timestamped only when `timestamp`
  // is given; otherwise its timestamps are dropped.
  void append(const LabeledPoint& point, std::optional<std::int64_t> timestamp = std::nullopt);

  // Concatenation of two datasets with matching dimension.
  static Dataset concat(const Dataset& first, const Dataset& second);

 private:
  std::vector<LabeledPoint> points_;
  std::vector<std::int64_t> timestamps_;
  std::size_t dim_ = 0;
  int group_count_ = 0;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t pool = 0;
  std::size_t validation = 0;
  std::size_t test = 0;

  std::size_t total() const { return train + pool + validation + test; }
};

// Index-disjoint partition of a source dataset.
struct DataSplit {
  Dataset train;
  Dataset pool;
  Dataset validation;
  Dataset test;
};

// Seeded random partition. Rows beyond sizes.total() are discarded.
DataSplit split(const Dataset& data, const SplitSizes& sizes, std::uint64_t seed);

// The permutation used by split(); exposed so callers can reproduce it.
std::vector<std::size_t> split_permutation(std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// CSV ingestion

struct LabelMap {
  std::string negative = "0";
  std::string positive = "1";
};

// Parses "neg=0,pos=1".
LabelMap parse_label_map(const std::string& text);

struct CsvSchema {
  std::string label_column;
  std::string group_column;
  std::vector<std::string> feature_columns;
  std::optional<std::string> timestamp_column;
  LabelMap label_map;
  char delimiter = ',';
};

// Reads a headed CSV. Data errors throw ContractError naming the 1-based data
// row; a missing or unreadable file throws IoError.
Dataset load_csv(const std::string& path, const CsvSchema& schema);

// ---------------------------------------------------------------------------
// Synthetic generators

// Two groups, x ~ Uniform(alpha_a, beta_a), y = sign(x - t_a).
struct UniformMixtureSpec {
  double alpha0 = 0, beta0 = 10, t0 = 4;
  double alpha1 = 1, beta1 = 14, t1 = 7;
  double lambda_star = 0.5;

  double w0() const { return 1.0 / (beta0 - alpha0); }
  double w1() const { return 1.0 / (beta1 - alpha1); }

  // Throws ContractError unless
  // a0+1 < a1+1 < t0-1 < t0+1 < t1-1 < t1+1 < b0-1 < b1-1 and lambda* in (0,1).
  // The closed-form engine needs this ordering.
  void validate() const;

  // alpha_a < t_a < beta_a, t0 < t1, lambda* in (0,1). Enough for sampling and
  // the numerical ground-truth path.
  void validate_basic() const;
  bool chain_holds() const;
};

// Two groups, x ~ N(mean_a, var_a), y = sign(x - t_a). The second parameter is
// a variance.
struct GaussianMixtureSpec {
  double mean0 = 0, var0 = 1, t0 = 0;
  double mean1 = 2, var1 = 2, t1 = 1.4;
  double lambda_star = 0.85;

  void validate() const;
};

Dataset synth_uniform_mixture(const UniformMixtureSpec& spec, std::size_t n, std::uint64_t seed);
Dataset synth_gaussian_mixture(const GaussianMixtureSpec& spec, std::size_t n, std::uint64_t seed);

// Draws exactly `per_group[a]` points from group a (a in {0,1}) of a mixture;
// used for validation sets with fixed group counts.
Dataset synth_uniform_groups(const UniformMixtureSpec& spec, std::size_t n0, std::size_t n1,
                             std::uint64_t seed);
Dataset synth_gaussian_groups(const GaussianMixtureSpec& spec, std::size_t n0, std::size_t n1,
                              std::uint64_t seed);

// Generative parameters of one ward: x ~ N(mean, I), y = sign(normal.(x - mean) - offset),
// flipped with probability label_noise. timestamp_bias shifts the ward earlier
// (small) or later (large) in the historical ordering.
struct WardParams {
  std::vector<double> mean;
  std::vector<double> normal;
  double offset = 0.0;
  double label_noise = 0.0;
  double timestamp_bias = 0.0;
};

struct WardSpec {
  std::vector<std::size_t> ward_sizes;
  std::vector<WardParams> wards;
  std::size_t test_size = 0;

  void validate() const;
};

// Exactly ward_sizes[a] points per ward, with integer-rank timestamps.
Dataset synth_wards(const WardSpec& spec, std::uint64_t seed);

// Held-out set of spec.test_size points, ward proportions matching ward_sizes.
Dataset synth_wards_test(const WardSpec& spec, std::uint64_t seed);

// Nine wards with the Flint per-ward record counts divided by `scale`
// (rounded), three features, and one clearly harder ward.
WardSpec flint_like_ward_spec(double scale = 1.0, std::size_t test_size = 5000);

}  // namespace fairsample
