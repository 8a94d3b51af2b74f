#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairsample/data.hpp"
#include "fairsample/error.hpp"
#include "fairsample/rng.hpp"

namespace fairsample {

bool UniformMixtureSpec::chain_holds() const {
  const double chain[] = {alpha0 + 1, alpha1 + 1, t0 - 1, t0 + 1, t1 - 1, t1 + 1, beta0 - 1, beta1 - 1};
  for (std::size_t i = 0; i + 1 < std::size(chain); ++i) {
    if (!(chain[i] < chain[i + 1])) return false;
  }
  return true;
}

void UniformMixtureSpec::validate_basic() const {
  require(alpha0 < t0 && t0 < beta0, "uniform mixture needs alpha0 < t0 < beta0");
  require(alpha1 < t1 && t1 < beta1, "uniform mixture needs alpha1 < t1 < beta1");
  require(t0 < t1, "uniform mixture requires t0 < t1");
  require(lambda_star > 0.0 && lambda_star < 1.0, "lambda* must lie in (0,1)");
}

void UniformMixtureSpec::validate() const {
  require(chain_holds(), "uniform mixture spec violates a0+1 < a1+1 < t0-1 < t0+1 < t1-1 < t1+1 < b0-1 < b1-1");
  validate_basic();
}

void GaussianMixtureSpec::validate() const {
  require(var0 > 0 && var1 > 0, "Gaussian variances must be positive");
  require(t0 < t1, "Gaussian mixture requires t0 < t1");
  require(lambda_star > 0.0 && lambda_star < 1.0, "lambda* must lie in (0,1)");
  require(std::isfinite(mean0) && std::isfinite(mean1), "Gaussian means must be finite");
}

namespace {

LabeledPoint uniform_point(const UniformMixtureSpec& s, int a, Rng& rng) {
  const double lo = a == 0 ? s.alpha0 : s.alpha1;
  const double hi = a == 0 ? s.beta0 : s.beta1;
  const double t = a == 0 ? s.t0 : s.t1;
  const double x = std::uniform_real_distribution<double>(lo, hi)(rng);
  return LabeledPoint{{x}, sign_label(x - t), a};
}

LabeledPoint gaussian_point(const GaussianMixtureSpec& s, int a, Rng& rng) {
  const double mean = a == 0 ? s.mean0 : s.mean1;
  const double sd = std::sqrt(a == 0 ? s.var0 : s.var1);
  const double t = a == 0 ? s.t0 : s.t1;
  const double x = std::normal_distribution<double>(mean, sd)(rng);
  return LabeledPoint{{x}, sign_label(x - t), a};
}

void check_sampleable(const UniformMixtureSpec& s) { s.validate_basic(); }
void check_sampleable(const GaussianMixtureSpec& s) { s.validate(); }

template <class Spec, class Draw>
Dataset mixture(const Spec& spec, std::size_t n, std::uint64_t seed, Draw draw) {
  check_sampleable(spec);
  require(n >= 1, "synthetic sample size must be >= 1");
  Rng group_rng = make_stream(seed, "mixture-group");
  Rng x_rng = make_stream(seed, "mixture-x");
  std::vector<LabeledPoint> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int a = bernoulli(group_rng, spec.lambda_star) ? 0 : 1;
    pts.push_back(draw(spec, a, x_rng));
  }
  return Dataset(std::move(pts), 2);
}

template <class Spec, class Draw>
Dataset fixed_groups(const Spec& spec, std::size_t n0, std::size_t n1, std::uint64_t seed, Draw draw) {
  check_sampleable(spec);
  require(n0 + n1 >= 1, "synthetic sample size must be >= 1");
  Rng rng = make_stream(seed, "fixed-groups");
  std::vector<LabeledPoint> pts;
  pts.reserve(n0 + n1);
  for (std::size_t i = 0; i < n0; ++i) pts.push_back(draw(spec, 0, rng));
  for (std::size_t i = 0; i < n1; ++i) pts.push_back(draw(spec, 1, rng));
  return Dataset(std::move(pts), 2);
}

}  // namespace

Dataset synth_uniform_mixture(const UniformMixtureSpec& spec, std::size_t n, std::uint64_t seed) {
  return mixture(spec, n, seed, uniform_point);
}

Dataset synth_gaussian_mixture(const GaussianMixtureSpec& spec, std::size_t n, std::uint64_t seed) {
  return mixture(spec, n, seed, gaussian_point);
}

Dataset synth_uniform_groups(const UniformMixtureSpec& spec, std::size_t n0, std::size_t n1,
                             std::uint64_t seed) {
  return fixed_groups(spec, n0, n1, seed, uniform_point);
}

Dataset synth_gaussian_groups(const GaussianMixtureSpec& spec, std::size_t n0, std::size_t n1,
                              std::uint64_t seed) {
  return fixed_groups(spec, n0, n1, seed, gaussian_point);
}

// ---------------------------------------------------------------------------
// Wards

void WardSpec::validate() const {
  require(ward_sizes.size() >= 2, "ward spec needs at least two wards");
  require(wards.size() == ward_sizes.size(), "ward spec: one parameter block per ward");
  const std::size_t d = wards.front().mean.size();
  require(d >= 1, "ward spec: feature dimension must be >= 1");
  for (std::size_t a = 0; a < wards.size(); ++a) {
    require(ward_sizes[a] > 0, "ward spec: sizes must be positive");
    require(wards[a].mean.size() == d && wards[a].normal.size() == d,
            "ward spec: mean and normal must share one dimension");
    require(wards[a].label_noise >= 0.0 && wards[a].label_noise < 0.5,
            "ward spec: label noise must lie in [0, 0.5)");
  }
}

namespace {

LabeledPoint ward_point(const WardParams& w, int a, Rng& rng) {
  std::normal_distribution<double> std_normal(0.0, 1.0);
  LabeledPoint p;
  p.a = a;
  p.x.resize(w.mean.size());
  double proj = 0.0;
  for (std::size_t k = 0; k < w.mean.size(); ++k) {
    const double z = std_normal(rng);
    p.x[k] = w.mean[k] + z;
    proj += w.normal[k] * z;
  }
  p.y = sign_label(proj - w.offset);
  if (bernoulli(rng, w.label_noise)) p.y = -p.y;
  return p;
}

}  // namespace

Dataset synth_wards(const WardSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng = make_stream(seed, "wards");
  Rng ts_rng = make_stream(seed, "wards-timestamp");
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  std::vector<LabeledPoint> pts;
  std::vector<double> priority;
  for (std::size_t a = 0; a < spec.ward_sizes.size(); ++a) {
    for (std::size_t i = 0; i < spec.ward_sizes[a]; ++i) {
      pts.push_back(ward_point(spec.wards[a], static_cast<int>(a), rng));
      priority.push_back(spec.wards[a].timestamp_bias + jitter(ts_rng));
    }
  }
  // Timestamps are ranks of the biased priorities.
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return priority[l] < priority[r]; });
  std::vector<std::int64_t> ts(pts.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) ts[order[rank]] = static_cast<std::int64_t>(rank);
  return Dataset(std::move(pts), static_cast<int>(spec.ward_sizes.size()), std::move(ts));
}

Dataset synth_wards_test(const WardSpec& spec, std::uint64_t seed) {
  spec.validate();
  require(spec.test_size >= 1, "ward spec: test_size must be >= 1");
  const double total = static_cast<double>(
      std::accumulate(spec.ward_sizes.begin(), spec.ward_sizes.end(), std::size_t{0}));
  Rng rng = make_stream(seed, "wards-test");
  std::vector<LabeledPoint> pts;
  std::size_t assigned = 0;
  for (std::size_t a = 0; a < spec.ward_sizes.size(); ++a) {
    std::size_t count = (a + 1 == spec.ward_sizes.size())
                            ? spec.test_size - assigned
                            : static_cast<std::size_t>(std::llround(
                                  static_cast<double>(spec.test_size) * spec.ward_sizes[a] / total));
    count = std::min(count, spec.test_size - assigned);
    assigned += count;
    for (std::size_t i = 0; i < count; ++i) pts.push_back(ward_point(spec.wards[a], static_cast<int>(a), rng));
  }
  return Dataset(std::move(pts), static_cast<int>(spec.ward_sizes.size()));
}

WardSpec flint_like_ward_spec(double scale, std::size_t test_size) {
  require(scale >= 1.0, "ward scale must be >= 1");
  static constexpr std::size_t kFlintSizes[9] = {2548, 2697, 1489, 2998, 1477, 2945, 2732, 2970, 2894};
  // Ward 9 has a shifted decision boundary; ward 3 a milder shift and more noise.
  static constexpr double kOffset[9] = {0.0, 0.1, -0.45, 0.05, 0.15, -0.1, 0.1, 0.0, 1.1};
  static constexpr double kNoise[9] = {0.03, 0.02, 0.06, 0.03, 0.04, 0.02, 0.03, 0.02, 0.04};
  static constexpr double kTimestampBias[9] = {0.0, 0.2, 0.9, 0.3, 0.8, 0.1, 0.4, 0.5, 0.7};
  WardSpec spec;
  spec.test_size = test_size;
  for (std::size_t a = 0; a < 9; ++a) {
    spec.ward_sizes.push_back(static_cast<std::size_t>(std::llround(kFlintSizes[a] / scale)));
    const double angle = 2.0 * 3.14159265358979323846 * static_cast<double>(a) / 9.0;
    WardParams w;
    w.mean = {0.25 * std::cos(angle), 0.25 * std::sin(angle), 0.0};
    w.normal = {1.0, 0.6, 0.0};
    w.offset = kOffset[a];
    w.label_noise = kNoise[a];
    w.timestamp_bias = kTimestampBias[a];
    spec.wards.push_back(std::move(w));
  }
  return spec;
}

}  // namespace fairsample
