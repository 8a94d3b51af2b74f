#pragma once

// Population quantities of the one-dimensional two-group model: group errors
// of the threshold classifier sign(x - c), the error gap Bias(c), the fair
// threshold, the risk minimizer c(lambda) of the lambda-weighted margin risk,
// and the expected group-0 weight recurrence of the adaptive strategy.
//
// Uniform mixtures with hinge loss use exact piecewise closed forms. Gaussian
// mixtures (and uniform mixtures with logistic loss) fall back to numerical
// integration plus a one-dimensional minimizer.

#include <array>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "fairsample/data.hpp"
#include "fairsample/models.hpp"
#include "fairsample/rng.hpp"

namespace fairsample::analytic {

// ---------------------------------------------------------------------------
// Exact engine for uniform mixtures

// Population 0-1 error of sign(x - c) on group a (a in {0,1}).
double group_error(const UniformMixtureSpec& spec, int a, double c);

// group_error(0, c) - group_error(1, c), evaluated with the seven-case
// piecewise formula.
double bias(const UniformMixtureSpec& spec, double c);

// (w0 t0 + w1 t1) / (w0 + w1), the unique root of bias on (t0, t1).
double c_fair(const UniformMixtureSpec& spec);

// E(c) = a2 c^2 + a1 c + a0 on [lo, hi].
struct QuadraticPiece {
  double lo = 0, hi = 0;
  double a2 = 0, a1 = 0, a0 = 0;

  double operator()(double c) const { return (a2 * c + a1) * c + a0; }
};

// Expected hinge loss of one group as a function of c: five pieces split at
// alpha+1, t-1, t+1, beta-1.
std::array<QuadraticPiece, 5> group_hinge_pieces(const UniformMixtureSpec& spec, int a);
double group_hinge_risk(const UniformMixtureSpec& spec, int a, double c);

// The lambda-weighted population hinge risk E(c) as nine quadratic pieces
// split at a0+1, a1+1, t0-1, t0+1, t1-1, t1+1, b0-1, b1-1.
class RiskCurve {
 public:
  RiskCurve(const UniformMixtureSpec& spec, double lambda);

  double operator()(double c) const;
  const std::array<QuadraticPiece, 9>& pieces() const { return pieces_; }
  std::array<double, 8> breakpoints() const;
  double lambda() const { return lambda_; }

 private:
  UniformMixtureSpec spec_;
  double lambda_;
  std::array<QuadraticPiece, 9> pieces_;
};

double hinge_risk(const UniformMixtureSpec& spec, double lambda, double c);

// Vertices of the quadratics that coincide with E on [t0-1,t0+1],
// [t0+1,t1-1], [t1-1,t1+1], and the two case selectors.
struct RiskVertices {
  double s3 = 0, s4 = 0, s5 = 0;
  double phi = 0, psi = 0;
};
RiskVertices risk_vertices(const UniformMixtureSpec& spec, double lambda);

// Unique minimizer of hinge_risk(spec, lambda, .): S3 if phi <= 0, else S5 if
// psi <= 0, else S4. Exactly t1 at lambda = 0 and t0 at lambda = 1.
double c_of_lambda(const UniformMixtureSpec& spec, double lambda);

struct LambdaInterval {
  double lower = 0;
  double upper = 0;
};

// {lambda : c(lambda) = c_fair} located by bisection on the monotone map.
LambdaInterval lambda_fair_interval(const UniformMixtureSpec& spec, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Expected / stochastic recurrence of the group-0 weight

struct RecurrenceState {
  std::int64_t i = 0;          // round index
  double lambda = 0;           // fraction of group 0 in S_i
  std::int64_t n0 = 1;         // |S_0|
  double p = 0;                // population-sampling probability
  double group0_mass = 0;      // lambda * (n0 + i), tracked directly to stay exact

  static RecurrenceState initial(std::int64_t n0, double lambda0, double p);
};

enum class RecurrenceMode { Expectation, Stochastic };

// Expectation mode:
//   lambda_{i+1} = ((n0+i) lambda_i + (1-p) [Dis = G0] + p lambda*) / (n0+i+1)
// with c_i = c(lambda_i) and Dis = G1 iff Bias(c_i) < 0.
RecurrenceState recurrence_step(const RecurrenceState& state, const UniformMixtureSpec& spec);

// Stochastic mode: with probability p the new point comes from the population
// (group 0 with probability lambda*), otherwise from the disadvantaged group.
RecurrenceState recurrence_step(const RecurrenceState& state, const UniformMixtureSpec& spec, Rng& rng);

// Runs `rounds` steps from lambda0 = lambda*; returns every `stride`-th state
// plus the final one.
std::vector<RecurrenceState> run_recurrence(const UniformMixtureSpec& spec, std::int64_t n0, double p,
                                            std::int64_t rounds, RecurrenceMode mode,
                                            std::uint64_t seed = 0, std::int64_t stride = 0);

struct LimitPrediction {
  double lambda = 0;
  double c = 0;
  bool converges_to_fair = false;
};

// Limit of (lambda_i, c_i) as i -> infinity, from lambda*, lambda_U and p.
LimitPrediction theorem1_limit(const UniformMixtureSpec& spec, double p);

struct ConvergenceReport {
  double bound_constant = 0;     // 4 (t1 - t0 + 1)
  std::int64_t start_round = 0;  // ceil(n0 (1 - 2 lambda0))
  std::int64_t rounds = 0;
  std::int64_t checked = 0;
  std::int64_t violations = 0;
  std::optional<std::int64_t> first_violation;
  double max_ratio = 0;  // max over checked i of |c_fair - c_i| / bound_i
};

// Requires w0 = w1 and lambda* < 1/2; p = 0 expectation recurrence with
// lambda0 = lambda*. Checks |c_fair - c_i| <= 4 (t1 - t0 + 1) / (n0 + i) for
// i >= n0 (1 - 2 lambda0).
ConvergenceReport convergence_rate_check(const UniformMixtureSpec& spec, std::int64_t n0, std::int64_t rounds);

// ---------------------------------------------------------------------------
// Generic ground truth (uniform or Gaussian mixture)

// Uniform members only need validate_basic(); the closed forms are used when
// the ordering chain also holds.
using GroundTruth = std::variant<UniformMixtureSpec, GaussianMixtureSpec>;

void validate(const GroundTruth& truth);

double lambda_star(const GroundTruth& truth);
double t_of(const GroundTruth& truth, int a);

double group_error(const GroundTruth& truth, int a, double c);
double bias(const GroundTruth& truth, double c);
double c_fair(const GroundTruth& truth);

// Expected margin loss of group a at threshold c.
double group_risk(const GroundTruth& truth, int a, double c, MarginLossKind loss);
double risk(const GroundTruth& truth, double lambda, double c, MarginLossKind loss);

// Exact for uniform (chain holds) + hinge; Brent minimization of the integrated risk
// (about 1e-8 in c) otherwise.
double c_of_lambda(const GroundTruth& truth, double lambda, MarginLossKind loss);
LambdaInterval lambda_fair_interval(const GroundTruth& truth, MarginLossKind loss, double tol = 1e-10);
LimitPrediction theorem1_limit(const GroundTruth& truth, double p, MarginLossKind loss);

// Shared case analysis once lambda*, lambda_U are known.
double theorem1_lambda_limit(double lambda_star, double lambda_upper, double p);

Dataset sample(const GroundTruth& truth, std::size_t n, std::uint64_t seed);
Dataset sample_groups(const GroundTruth& truth, std::size_t n0, std::size_t n1, std::uint64_t seed);

}  // namespace fairsample::analytic
