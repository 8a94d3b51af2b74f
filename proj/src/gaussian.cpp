// Ground-truth overloads for uniform and Gaussian mixtures. Uniform + hinge
// routes to the exact engine; everything else integrates numerically.

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "fairsample/analytic.hpp"
#include "fairsample/error.hpp"

namespace fairsample::analytic {
namespace {

constexpr double kTailSigmas = 12.0;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct Component {
  double lo, hi;  // integration domain
  double t;
  bool gaussian;
  double mean, sd, density;  // density used for the uniform case
};

Component component(const GroundTruth& truth, int a) {
  require(a == 0 || a == 1, "mixture has groups 0 and 1");
  if (const auto* u = std::get_if<UniformMixtureSpec>(&truth)) {
    const double lo = a == 0 ? u->alpha0 : u->alpha1;
    const double hi = a == 0 ? u->beta0 : u->beta1;
    return {lo, hi, a == 0 ? u->t0 : u->t1, false, 0.0, 0.0, 1.0 / (hi - lo)};
  }
  const auto& g = std::get<GaussianMixtureSpec>(truth);
  const double mean = a == 0 ? g.mean0 : g.mean1;
  const double sd = std::sqrt(a == 0 ? g.var0 : g.var1);
  return {mean - kTailSigmas * sd, mean + kTailSigmas * sd, a == 0 ? g.t0 : g.t1, true, mean, sd, 0.0};
}

double pdf(const Component& k, double x) {
  if (!k.gaussian) return k.density;
  const double z = (x - k.mean) / k.sd;
  return std::exp(-0.5 * z * z) / (k.sd * std::sqrt(2.0 * M_PI));
}

double cdf(const Component& k, double x) {
  if (!k.gaussian) return std::clamp((x - k.lo) * k.density, 0.0, 1.0);
  return normal_cdf((x - k.mean) / k.sd);
}

const UniformMixtureSpec* chained(const GroundTruth& truth) {
  const auto* u = std::get_if<UniformMixtureSpec>(&truth);
  return u && u->chain_holds() ? u : nullptr;
}

bool exact(const GroundTruth& truth, MarginLossKind loss) {
  return loss == MarginLossKind::Hinge && chained(truth);
}

// Minimizer search interval covering both groups' mass and thresholds.
std::pair<double, double> search_bracket(const GroundTruth& truth) {
  const auto k0 = component(truth, 0), k1 = component(truth, 1);
  if (!k0.gaussian) return {std::min(k0.lo, k1.lo) - 1.0, std::max(k0.hi, k1.hi) + 1.0};
  const double lo = std::min({k0.mean - 6 * k0.sd, k1.mean - 6 * k1.sd, k0.t, k1.t});
  const double hi = std::max({k0.mean + 6 * k0.sd, k1.mean + 6 * k1.sd, k0.t, k1.t});
  return {lo - 1.0, hi + 1.0};
}

}  // namespace

void validate(const GroundTruth& truth) {
  if (const auto* u = std::get_if<UniformMixtureSpec>(&truth)) {
    u->validate_basic();
  } else {
    std::get<GaussianMixtureSpec>(truth).validate();
  }
}

double lambda_star(const GroundTruth& truth) {
  return std::visit([](const auto& s) { return s.lambda_star; }, truth);
}

double t_of(const GroundTruth& truth, int a) { return component(truth, a).t; }

double group_error(const GroundTruth& truth, int a, double c) {
  if (const auto* u = std::get_if<UniformMixtureSpec>(&truth)) return group_error(*u, a, c);
  const auto k = component(truth, a);
  return std::abs(cdf(k, c) - cdf(k, k.t));
}

double bias(const GroundTruth& truth, double c) {
  if (const auto* u = chained(truth)) return bias(*u, c);
  return group_error(truth, 0, c) - group_error(truth, 1, c);
}

double c_fair(const GroundTruth& truth) {
  validate(truth);
  if (const auto* u = chained(truth)) return c_fair(*u);
  // bias is increasing on [t0, t1], negative at t0 and positive at t1.
  double lo = t_of(truth, 0), hi = t_of(truth, 1);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (bias(truth, mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double group_risk(const GroundTruth& truth, int a, double c, MarginLossKind loss) {
  if (exact(truth, loss)) return group_hinge_risk(std::get<UniformMixtureSpec>(truth), a, c);
  const auto k = component(truth, a);
  std::vector<double> cuts{k.lo, k.hi};
  for (double v : {k.t, c - 1.0, c + 1.0}) {
    if (v > k.lo && v < k.hi) cuts.push_back(v);
  }
  std::sort(cuts.begin(), cuts.end());
  auto integrand = [&](double x) {
    const double y = x >= k.t ? 1.0 : -1.0;
    return margin_loss(loss, y * (x - c)) * pdf(k, x);
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, cuts[i], cuts[i + 1], 15,
                                                                           1e-12);
  }
  return total;
}

double risk(const GroundTruth& truth, double lambda, double c, MarginLossKind loss) {
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0,1]");
  if (exact(truth, loss)) return hinge_risk(std::get<UniformMixtureSpec>(truth), lambda, c);
  return lambda * group_risk(truth, 0, c, loss) + (1.0 - lambda) * group_risk(truth, 1, c, loss);
}

double c_of_lambda(const GroundTruth& truth, double lambda, MarginLossKind loss) {
  validate(truth);
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0,1]");
  if (exact(truth, loss)) return c_of_lambda(std::get<UniformMixtureSpec>(truth), lambda);
  const auto [lo, hi] = search_bracket(truth);
  std::uintmax_t max_iter = 500;
  const auto res = boost::math::tools::brent_find_minima(
      [&](double c) { return risk(truth, lambda, c, loss); }, lo, hi, std::numeric_limits<double>::digits / 2,
      max_iter);
  return res.first;
}

LambdaInterval lambda_fair_interval(const GroundTruth& truth, MarginLossKind loss, double tol) {
  if (exact(truth, loss)) return lambda_fair_interval(std::get<UniformMixtureSpec>(truth), std::min(tol, 1e-12));
  const double target = c_fair(truth);
  auto bisect = [&](auto in_left) {
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (in_left(c_of_lambda(truth, mid, loss)) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  LambdaInterval out{bisect([&](double c) { return c > target; }), bisect([&](double c) { return c >= target; })};
  if (out.lower > out.upper) out.lower = out.upper = 0.5 * (out.lower + out.upper);
  return out;
}

LimitPrediction theorem1_limit(const GroundTruth& truth, double p, MarginLossKind loss) {
  const auto interval = lambda_fair_interval(truth, loss);
  LimitPrediction out;
  out.lambda = theorem1_lambda_limit(lambda_star(truth), interval.upper, p);
  out.converges_to_fair = out.lambda == interval.upper;
  out.c = out.converges_to_fair ? c_fair(truth) : c_of_lambda(truth, out.lambda, loss);
  return out;
}

Dataset sample(const GroundTruth& truth, std::size_t n, std::uint64_t seed) {
  if (const auto* u = std::get_if<UniformMixtureSpec>(&truth)) return synth_uniform_mixture(*u, n, seed);
  return synth_gaussian_mixture(std::get<GaussianMixtureSpec>(truth), n, seed);
}

Dataset sample_groups(const GroundTruth& truth, std::size_t n0, std::size_t n1, std::uint64_t seed) {
  if (const auto* u = std::get_if<UniformMixtureSpec>(&truth)) return synth_uniform_groups(*u, n0, n1, seed);
  return synth_gaussian_groups(std::get<GaussianMixtureSpec>(truth), n0, n1, seed);
}

}  // namespace fairsample::analytic
