#include "fairsample/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairsample/error.hpp"

namespace fairsample::analytic {
namespace {

struct GroupParams {
  double alpha, beta, t, w;
};

GroupParams group_params(const UniformMixtureSpec& s, int a) {
  return a == 0 ? GroupParams{s.alpha0, s.beta0, s.t0, s.w0()} : GroupParams{s.alpha1, s.beta1, s.t1, s.w1()};
}

void check_lambda(double lambda) { require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0,1]"); }

}  // namespace

double group_error(const UniformMixtureSpec& spec, int a, double c) {
  require(a == 0 || a == 1, "uniform mixture has groups 0 and 1");
  const auto g = group_params(spec, a);
  if (c <= g.alpha) return (g.t - g.alpha) * g.w;
  if (c <= g.t) return (g.t - c) * g.w;
  if (c <= g.beta) return (c - g.t) * g.w;
  return (g.beta - g.t) * g.w;
}

double bias(const UniformMixtureSpec& s, double c) {
  const double w0 = s.w0(), w1 = s.w1();
  if (c <= s.alpha0) return (s.t0 - s.alpha0) * w0 - (s.t1 - s.alpha1) * w1;
  if (c <= s.alpha1) return (s.t0 - c) * w0 - (s.t1 - s.alpha1) * w1;
  if (c <= s.t0) return (s.t0 - c) * w0 - (s.t1 - c) * w1;
  if (c <= s.t1) return (c - s.t0) * w0 - (s.t1 - c) * w1;
  if (c <= s.beta0) return (c - s.t0) * w0 - (c - s.t1) * w1;
  if (c <= s.beta1) return (s.beta0 - s.t0) * w0 - (c - s.t1) * w1;
  return (s.beta0 - s.t0) * w0 - (s.beta1 - s.t1) * w1;
}

double c_fair(const UniformMixtureSpec& spec) {
  spec.validate();
  const double w0 = spec.w0(), w1 = spec.w1();
  return (w0 * spec.t0 + w1 * spec.t1) / (w0 + w1);
}

std::array<QuadraticPiece, 5> group_hinge_pieces(const UniformMixtureSpec& spec, int a) {
  require(a == 0 || a == 1, "uniform mixture has groups 0 and 1");
  const auto [alpha, beta, t, w] = group_params(spec, a);
  const double inf = std::numeric_limits<double>::infinity();
  return {{
      {-inf, alpha + 1, 0.0, -w * (t - alpha), w * (t - alpha) + 0.5 * w * (t * t - alpha * alpha)},
      {alpha + 1, t - 1, 0.5 * w, -(t * w + w), 0.5 * t * t * w + t * w + 0.5 * w},
      {t - 1, t + 1, w, -2.0 * t * w, t * t * w + w},
      {t + 1, beta - 1, 0.5 * w, -(t * w - w), 0.5 * t * t * w - t * w + 0.5 * w},
      {beta - 1, inf, 0.0, -t * w + beta * w, 0.5 * t * t * w - t * w - 0.5 * beta * beta * w + beta * w},
  }};
}

namespace {

template <std::size_t N>
const QuadraticPiece& piece_at(const std::array<QuadraticPiece, N>& pieces, double c) {
  for (const auto& p : pieces) {
    if (c <= p.hi) return p;
  }
  return pieces.back();
}

}  // namespace

double group_hinge_risk(const UniformMixtureSpec& spec, int a, double c) {
  return piece_at(group_hinge_pieces(spec, a), c)(c);
}

RiskCurve::RiskCurve(const UniformMixtureSpec& spec, double lambda) : spec_(spec), lambda_(lambda) {
  spec.validate();
  check_lambda(lambda);
  const auto g0 = group_hinge_pieces(spec, 0);
  const auto g1 = group_hinge_pieces(spec, 1);
  const auto bp = breakpoints();
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < 9; ++k) {
    const double lo = k == 0 ? -inf : bp[k - 1];
    const double hi = k == 8 ? inf : bp[k];
    // A representative interior point selects the active piece of each group.
    const double probe = k == 0 ? hi - 1.0 : (k == 8 ? lo + 1.0 : 0.5 * (lo + hi));
    const auto& p0 = piece_at(g0, probe);
    const auto& p1 = piece_at(g1, probe);
    pieces_[k] = QuadraticPiece{lo, hi, lambda * p0.a2 + (1 - lambda) * p1.a2,
                                lambda * p0.a1 + (1 - lambda) * p1.a1, lambda * p0.a0 + (1 - lambda) * p1.a0};
  }
}

std::array<double, 8> RiskCurve::breakpoints() const {
  const auto& s = spec_;
  return {s.alpha0 + 1, s.alpha1 + 1, s.t0 - 1, s.t0 + 1, s.t1 - 1, s.t1 + 1, s.beta0 - 1, s.beta1 - 1};
}

double RiskCurve::operator()(double c) const { return piece_at(pieces_, c)(c); }

double hinge_risk(const UniformMixtureSpec& spec, double lambda, double c) { return RiskCurve(spec, lambda)(c); }

RiskVertices risk_vertices(const UniformMixtureSpec& s, double lambda) {
  check_lambda(lambda);
  const double w0 = s.w0(), w1 = s.w1(), l = lambda, m = 1.0 - lambda;
  const double gap = s.t1 - s.t0;
  RiskVertices v;
  // Written as offsets from t0, t0-1, t1 so that the endpoints are exact.
  v.s3 = s.t0 + m * w1 * (gap + 1) / (2 * l * w0 + m * w1);
  v.s4 = (s.t0 - 1) + m * w1 * (gap + 2) / (l * w0 + m * w1);
  v.s5 = s.t1 - l * w0 * (gap + 1) / (l * w0 + 2 * m * w1);
  v.phi = -l * (w1 * gap + 2 * w0) + w1 * gap;
  v.psi = l * (w0 * gap + 2 * w1) - 2 * w1;
  return v;
}

double c_of_lambda(const UniformMixtureSpec& spec, double lambda) {
  const auto v = risk_vertices(spec, lambda);
  if (v.phi <= 0) return v.s3;
  if (v.psi <= 0) return v.s5;
  return v.s4;
}

LambdaInterval lambda_fair_interval(const UniformMixtureSpec& spec, double tol) {
  const double target = c_fair(spec);
  auto bisect = [&](auto in_left) {
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (in_left(c_of_lambda(spec, mid)) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  // upper = sup{lambda : c >= c_fair}; lower = inf{lambda : c <= c_fair}.
  LambdaInterval out{bisect([&](double c) { return c > target; }), bisect([&](double c) { return c >= target; })};
  if (out.lower > out.upper) out.lower = out.upper = 0.5 * (out.lower + out.upper);
  return out;
}

// ---------------------------------------------------------------------------

RecurrenceState RecurrenceState::initial(std::int64_t n0, double lambda0, double p) {
  require(n0 >= 1, "|S0| must be >= 1");
  require(lambda0 >= 0.0 && lambda0 <= 1.0, "lambda0 must lie in [0,1]");
  require(p >= 0.0 && p <= 1.0, "p must lie in [0,1]");
  RecurrenceState s;
  s.n0 = n0;
  s.p = p;
  s.lambda = lambda0;
  s.group0_mass = lambda0 * static_cast<double>(n0);
  if (const double r = std::round(s.group0_mass); std::abs(r - s.group0_mass) < 1e-9) s.group0_mass = r;
  return s;
}

namespace {

bool disadvantaged_is_group0(const UniformMixtureSpec& spec, double lambda) {
  return !(bias(spec, c_of_lambda(spec, lambda)) < 0.0);
}

RecurrenceState advance(const RecurrenceState& s, double added_mass) {
  RecurrenceState next = s;
  next.i = s.i + 1;
  next.group0_mass = s.group0_mass + added_mass;
  next.lambda = next.group0_mass / static_cast<double>(s.n0 + next.i);
  return next;
}

}  // namespace

RecurrenceState recurrence_step(const RecurrenceState& state, const UniformMixtureSpec& spec) {
  const double dis0 = disadvantaged_is_group0(spec, state.lambda) ? 1.0 : 0.0;
  return advance(state, (1.0 - state.p) * dis0 + state.p * spec.lambda_star);
}

RecurrenceState recurrence_step(const RecurrenceState& state, const UniformMixtureSpec& spec, Rng& rng) {
  double added = 0.0;
  if (bernoulli(rng, state.p)) {
    added = bernoulli(rng, spec.lambda_star) ? 1.0 : 0.0;
  } else {
    added = disadvantaged_is_group0(spec, state.lambda) ? 1.0 : 0.0;
  }
  return advance(state, added);
}

std::vector<RecurrenceState> run_recurrence(const UniformMixtureSpec& spec, std::int64_t n0, double p,
                                            std::int64_t rounds, RecurrenceMode mode, std::uint64_t seed,
                                            std::int64_t stride) {
  spec.validate();
  require(rounds >= 0, "rounds must be >= 0");
  auto state = RecurrenceState::initial(n0, spec.lambda_star, p);
  Rng rng = make_stream(seed, "recurrence");
  std::vector<RecurrenceState> out;
  const bool keep_all = stride <= 0;
  out.push_back(state);
  for (std::int64_t r = 0; r < rounds; ++r) {
    state = mode == RecurrenceMode::Expectation ? recurrence_step(state, spec) : recurrence_step(state, spec, rng);
    if (!keep_all && state.i % stride == 0) out.push_back(state);
    else if (keep_all) out.push_back(state);
  }
  if (out.back().i != state.i) out.push_back(state);
  return out;
}

double theorem1_lambda_limit(double ls, double lu, double p) {
  require(p >= 0.0 && p <= 1.0, "p must lie in [0,1]");
  if (ls >= lu) return p <= lu / ls ? lu : p * ls;
  return p <= (1.0 - lu) / (1.0 - ls) ? lu : 1.0 - p + p * ls;
}

LimitPrediction theorem1_limit(const UniformMixtureSpec& spec, double p) {
  const auto interval = lambda_fair_interval(spec);
  LimitPrediction out;
  out.lambda = theorem1_lambda_limit(spec.lambda_star, interval.upper, p);
  out.converges_to_fair = out.lambda == interval.upper;
  out.c = out.converges_to_fair ? c_fair(spec) : c_of_lambda(spec, out.lambda);
  return out;
}

ConvergenceReport convergence_rate_check(const UniformMixtureSpec& spec, std::int64_t n0, std::int64_t rounds) {
  spec.validate();
  require(std::abs(spec.w0() - spec.w1()) <= 1e-12 * std::max(spec.w0(), spec.w1()),
          "convergence-rate check requires w0 = w1");
  require(spec.lambda_star < 0.5, "convergence-rate check requires lambda* < 1/2");
  ConvergenceReport rep;
  rep.bound_constant = 4.0 * (spec.t1 - spec.t0 + 1.0);
  rep.start_round = static_cast<std::int64_t>(
      std::ceil(static_cast<double>(n0) * (1.0 - 2.0 * spec.lambda_star) - 1e-9));
  rep.rounds = rounds;
  const double fair = c_fair(spec);
  auto state = RecurrenceState::initial(n0, spec.lambda_star, 0.0);
  for (std::int64_t i = 0; i <= rounds; ++i) {
    if (i >= rep.start_round) {
      const double bound = rep.bound_constant / static_cast<double>(n0 + i);
      const double dev = std::abs(fair - c_of_lambda(spec, state.lambda));
      ++rep.checked;
      rep.max_ratio = std::max(rep.max_ratio, dev / bound);
      if (dev > bound) {
        ++rep.violations;
        if (!rep.first_violation) rep.first_violation = i;
      }
    }
    if (i < rounds) state = recurrence_step(state, spec);
  }
  return rep;
}

}  // namespace fairsample::analytic
