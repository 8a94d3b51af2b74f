// Acceptance criteria 1-9. One PASS/FAIL line per criterion; exit status is
// the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fairsample/analytic.hpp"
#include "fairsample/bounds.hpp"
#include "fairsample/emit.hpp"
#include "fairsample/harness.hpp"
#include "oracles.hpp"

using namespace fairsample;
namespace an = fairsample::analytic;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, double time_limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool ok = out.ok;
  std::string detail = out.detail;
  if (time_limit_s > 0 && secs >= time_limit_s) {
    ok = false;
    detail += "; runtime over limit";
  }
  std::printf("AC%d %s  %s  [%.2f s%s]\n", id, ok ? "PASS" : "FAIL", detail.c_str(), secs,
              time_limit_s > 0 ? (" / limit " + std::to_string(static_cast<int>(time_limit_s)) + " s").c_str() : "");
  std::fflush(stdout);
  failures += !ok;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const UniformMixtureSpec kEqual{0, 12, 4, 1, 13, 8, 0.3};

Outcome ac1() {
  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<double> u01(0, 1);
  double worst_risk = 0, worst_bias = 0;
  for (int s = 0; s < 10; ++s) {
    const auto spec = oracle::random_spec(rng);
    for (int k = 0; k < 100; ++k) {
      const double lambda = u01(rng);
      const double c = spec.alpha0 - 2 + (spec.beta1 - spec.alpha0 + 4) * u01(rng);
      worst_risk = std::max(worst_risk,
                            std::abs(an::hinge_risk(spec, lambda, c) - oracle::uniform_hinge_risk(spec, lambda, c)));
      worst_bias = std::max(worst_bias, std::abs(an::bias(spec, c) - oracle::uniform_bias(spec, c)));
    }
  }
  return {worst_risk <= 1e-6 && worst_bias <= 1e-6,
          fmt("max |risk - quadrature| = %.2e, max |bias - CDF| = %.2e (tol 1e-6)", worst_risk, worst_bias)};
}

Outcome ac2() {
  std::mt19937_64 rng(7);
  const UniformMixtureSpec fig{0, 10, 4, 1, 14, 7, 0.3};
  std::vector<UniformMixtureSpec> specs{fig, kEqual};
  for (int s = 0; s < 3; ++s) specs.push_back(oracle::random_spec(rng));
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    const auto& spec = specs[static_cast<std::size_t>(k) % specs.size()];
    const double lambda = (k + 0.5) / 50.0;
    const auto g = oracle::grid_argmin([&](double c) { return oracle::uniform_hinge_risk_closed(spec, lambda, c); },
                                       spec.t0 - 1, spec.t1 + 1, 1e-5);
    worst = std::max(worst, std::abs(an::c_of_lambda(spec, lambda) - g.x));
  }
  bool monotone = true, endpoints = true;
  for (const auto& spec : specs) {
    double prev = an::c_of_lambda(spec, 0.0);
    for (int k = 1; k <= 1000; ++k) {
      const double c = an::c_of_lambda(spec, k / 1000.0);
      monotone = monotone && c <= prev;
      prev = c;
    }
    endpoints = endpoints && an::c_of_lambda(spec, 0.0) == spec.t1 && an::c_of_lambda(spec, 1.0) == spec.t0;
  }
  return {worst <= 1e-4 && monotone && endpoints,
          fmt("max |c(lambda) - grid argmin| = %.2e over 50 lambdas (tol 1e-4)", worst) +
              (monotone ? "; monotone" : "; NOT monotone") + (endpoints ? "; endpoints exact" : "; endpoints off")};
}

Outcome ac3() {
  std::mt19937_64 rng(33);
  std::vector<UniformMixtureSpec> specs{kEqual, {0, 10, 4, 1, 14, 7, 0.85}};
  for (int s = 0; s < 3; ++s) specs.push_back(oracle::random_spec(rng));
  const auto eq = an::lambda_fair_interval(kEqual);
  const bool half = std::abs(eq.upper - 0.5) < 1e-9;
  double worst = 0, worst_fair = 0;
  const std::int64_t rounds = 1000000;
  for (const auto& spec : specs) {
    for (int k = 0; k <= 20; ++k) {
      const double p = k / 20.0;
      const auto st = an::run_recurrence(spec, 50, p, rounds, an::RecurrenceMode::Expectation, 0, rounds);
      const auto lim = an::theorem1_limit(spec, p);
      worst = std::max(worst, std::abs(st.back().lambda - lim.lambda));
      if (k == 0) worst_fair = std::max(worst_fair, std::abs(an::c_of_lambda(spec, st.back().lambda) - an::c_fair(spec)));
    }
  }
  return {worst <= 1e-3 && worst_fair <= 1e-3 && half,
          fmt("max |lambda_1e6 - limit| = %.2e, p=0 max |c - c_fair| = %.2e (tol 1e-3); lambda_U(w0=w1) = %.12f", worst,
              worst_fair, eq.upper)};
}

Outcome ac4() {
  const std::vector<UniformMixtureSpec> specs{kEqual, {0, 12, 4, 1, 13, 7, 0.1}, {-3, 9, 2, -2, 10, 6.5, 0.45},
                                              {0, 20, 4, 1, 21, 15, 0.2}};
  std::int64_t violations = 0, checked = 0;
  double ratio = 0;
  for (const auto& spec : specs) {
    for (std::int64_t n0 : {10, 50, 200}) {
      const auto rep = an::convergence_rate_check(spec, n0, 10000);
      violations += rep.violations;
      checked += rep.checked;
      ratio = std::max(ratio, rep.max_ratio);
    }
  }
  return {violations == 0 && checked > 0,
          fmt("%.0f violations over %.0f checked rounds; max deviation/bound = %.3f", static_cast<double>(violations),
              static_cast<double>(checked), ratio)};
}

Outcome ac5() {
  OnedConfig cfg;
  cfg.truth = GaussianMixtureSpec{};
  cfg.p = 0.0;
  cfg.validation = 20000;
  cfg.rounds = 5000;
  cfg.lr = LearningRate{1.0};
  const auto res = run_oned_scenario(cfg);
  const GaussianMixtureSpec g{};
  const double fair = oracle::bisect_root([&](double c) { return oracle::gaussian_bias(g, c); }, g.t0, g.t1);
  const double dc = std::abs(res.final_threshold - fair);
  return {res.final_true_gap < 0.02 && dc < 0.05,
          fmt("final true error gap = %.4f (< 0.02), |c_T - c_fair| = %.4f (< 0.05), c_fair = %.4f",
              res.final_true_gap, dc, fair)};
}

Outcome ac6() {
  bounds::DichotomyStudyConfig cfg;  // VC 1, 25 per group, T = 200, 200 seeds, delta 0.05
  const auto st = bounds::dichotomy_study(cfg);
  std::ostringstream os;
  os << "violations " << st.violations << "/" << cfg.seeds << " = " << st.violation_fraction << " (allowed "
     << st.allowed_fraction << "); arm1 " << st.arm1 << ", arm2 " << st.arm2;
  return {st.passed() && std::abs(st.allowed_fraction - 0.0962) < 1e-3, os.str()};
}

Outcome ac7() {
  const auto spec = flint_like_ward_spec(10.0, 5000);
  const Dataset data = synth_wards(spec, 2024);
  const Dataset test = synth_wards_test(spec, 2025);
  ReplayConfig cfg;
  cfg.strategies = {ReplayStrategy::RandomOrder, ReplayStrategy::Adaptive};
  cfg.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  cfg.initial_train = 100;
  cfg.validation = 600;
  const auto res = replay(data, cfg, &test);
  int wins = 0;
  double err_a = 0, err_r = 0;
  for (auto seed : cfg.seeds) {
    const auto& a = res.find(ReplayStrategy::Adaptive, seed);
    const auto& r = res.find(ReplayStrategy::RandomOrder, seed);
    wins += a.window_gap < r.window_gap;
    err_a += a.window_error / 10.0;
    err_r += r.window_error / 10.0;
  }
  std::ostringstream os;
  os << "adaptive gap below random in " << wins << "/10 seeds (need >= 8); mean window error adaptive " << err_a
     << " vs random " << err_r << " (diff " << err_a - err_r << " < 0.05); rounds " << res.rounds << ", window "
     << res.window_first << ".." << res.window_last;
  return {wins >= 8 && err_a - err_r < 0.05, os.str()};
}

SweepConfig ac8_config() {
  SweepConfig cfg;
  cfg.p_grid = linspace(0, 1, 11);
  cfg.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  cfg.sizes = {50, 1000, 1000, 2000};
  cfg.sampler.rounds = 500;
  cfg.sampler.learner.family = ModelFamily::Threshold;
  cfg.sampler.learner.loss = MarginLossKind::Hinge;
  return cfg;
}

Dataset ac8_data() { return synth_uniform_mixture(UniformMixtureSpec{0, 10, 4, 1, 14, 7, 0.85}, 6000, 8); }

Outcome ac8() {
  const auto res = sweep_pareto(ac8_data(), ac8_config());
  const auto& p0 = res.points.front();
  const auto& p1 = res.points.back();
  bool antichain = true;
  for (const auto& q : res.frontier)
    for (const auto& r : res.frontier) antichain = antichain && !dominates(q, r);
  std::ostringstream os;
  os << "p=0 (err " << p0.mean_error << ", viol " << p0.mean_violation << "), p=1 (err " << p1.mean_error << ", viol "
     << p1.mean_violation << "); frontier " << res.frontier.size() << " points, "
     << (antichain ? "antichain" : "NOT an antichain");
  return {p0.mean_violation <= p1.mean_violation && p1.mean_error <= p0.mean_error && antichain, os.str()};
}

Outcome ac9() {
  std::vector<std::pair<std::string, std::function<std::string()>>> experiments{
      {"sweep", [] { return render(to_json(sweep_pareto(ac8_data(), ac8_config())), OutputFormat::Json); }},
      {"oned",
       [] {
         OnedConfig c;
         c.rounds = 500;
         c.validation = 2000;
         c.seed = 5;
         return render(to_json(run_oned_scenario(c)), OutputFormat::Json);
       }},
      {"check-bounds",
       [] {
         bounds::DichotomyStudyConfig c;
         c.seeds = 20;
         c.T = 50;
         return render(bounds::to_json(bounds::dichotomy_study(c)), OutputFormat::Json);
       }},
      {"replay",
       [] {
         const auto spec = flint_like_ward_spec(100.0, 300);
         const Dataset test = synth_wards_test(spec, 2);
         ReplayConfig c;
         c.seeds = {3, 4};
         c.initial_train = 40;
         c.validation = 60;
         return render(to_json(replay(synth_wards(spec, 1), c, &test)), OutputFormat::Json);
       }},
  };
  std::string bad;
  for (const auto& [name, make] : experiments) {
    if (make() != make()) bad += " " + name;
  }
  return {bad.empty(), bad.empty() ? "sweep, oned, check-bounds, replay: repeated runs byte-identical"
                                   : "differing output:" + bad};
}

}  // namespace

int main() {
  criterion(1, 10, ac1);
  criterion(2, 0, ac2);
  criterion(3, 60, ac3);
  criterion(4, 0, ac4);
  criterion(5, 30, ac5);
  criterion(6, 120, ac6);
  criterion(7, 0, ac7);
  criterion(8, 0, ac8);
  criterion(9, 0, ac9);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
