#include "fairsample/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairsample/error.hpp"
#include "fairsample/kernels.hpp"

namespace fairsample {

std::string to_string(MarginLossKind kind) { return kind == MarginLossKind::Hinge ? "hinge" : "logistic"; }

MarginLossKind parse_loss(const std::string& name) {
  if (name == "hinge") return MarginLossKind::Hinge;
  if (name == "logistic") return MarginLossKind::Logistic;
  throw ContractError("unknown loss '" + name + "' (expected hinge or logistic)");
}

double margin_loss(MarginLossKind kind, double z) {
  if (kind == MarginLossKind::Hinge) return z < 1.0 ? 1.0 - z : 0.0;
  if (z >= 0.0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

double margin_loss_derivative(MarginLossKind kind, double z) {
  if (kind == MarginLossKind::Hinge) return z < 1.0 ? -1.0 : 0.0;
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(z));
}

void check_dimension(const Model& model, std::size_t dim) {
  if (std::holds_alternative<ThresholdModel>(model)) {
    require(dim == 1, "threshold model needs one-dimensional features, got " + std::to_string(dim));
  } else {
    const auto& lin = std::get<LinearModel>(model);
    require(lin.w.size() == dim, "linear model dimension " + std::to_string(lin.w.size()) +
                                     " does not match feature dimension " + std::to_string(dim));
  }
}

double score(const Model& model, std::span<const double> x) {
  check_dimension(model, x.size());
  return score_unchecked(model, x);
}

int predict(const Model& model, std::span<const double> x) { return sign_label(score(model, x)); }

// ---------------------------------------------------------------------------
// Threshold ERM

double threshold_empirical_risk(const Dataset& data, MarginLossKind kind, double c) {
  require(!data.empty(), "empirical risk of an empty dataset");
  return kernels::margin_risk_sum(data, kind, c) / static_cast<double>(data.size());
}

ThresholdModel fit_threshold(const Dataset& data, MarginLossKind kind) {
  require(!data.empty(), "fit_threshold: empty dataset");
  require(data.dim() == 1, "fit_threshold: data must be one-dimensional");
  double lo = data[0].x[0], hi = data[0].x[0];
  for (const auto& p : data.points()) {
    require(std::isfinite(p.x[0]), "fit_threshold: non-finite feature");
    lo = std::min(lo, p.x[0]);
    hi = std::max(hi, p.x[0]);
  }
  lo -= 1.0;
  hi += 1.0;
  auto f = [&](double c) { return kernels::margin_risk_sum(data, kind, c); };

  const double tol = 1e-10 * (1.0 + std::abs(lo) + std::abs(hi));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  double best = f1 <= f2 ? x1 : x2;
  double best_value = std::min(f1, f2);
  // The golden-section bracket may miss an endpoint minimum by ~tol.
  for (double edge : {lo, hi}) {
    if (const double v = f(edge); v < best_value) {
      best = edge;
      best_value = v;
    }
  }

  // Flat-minimum resolution: locate both edges of {c : f(c) <= f*} by bisection.
  const double slack = 1e-11 * std::max(1.0, std::abs(best_value));
  auto flat = [&](double c) { return f(c) <= best_value + slack; };
  auto edge = [&](double inside, double outside) {
    if (flat(outside)) return outside;
    while (std::abs(outside - inside) > 1e-9) {
      const double mid = 0.5 * (inside + outside);
      (flat(mid) ? inside : outside) = mid;
    }
    return inside;
  };
  const double left = edge(best, lo);
  const double right = edge(best, hi);
  double c = 0.5 * (left + right);
  // A unique hinge minimizer sits on a kink x_i +- 1; snap onto it.
  if (kind == MarginLossKind::Hinge && right - left < 1e-7) {
    double kink = c, dist = std::numeric_limits<double>::infinity();
    for (const auto& p : data.points()) {
      for (double k : {p.x[0] - 1.0, p.x[0] + 1.0}) {
        if (std::abs(k - c) < dist) {
          dist = std::abs(k - c);
          kink = k;
        }
      }
    }
    if (dist < 1e-7 && f(kink) <= f(c)) c = kink;
  }
  return ThresholdModel{c};
}

// ---------------------------------------------------------------------------
// Logistic regression

namespace {

double objective(const kernels::LogisticEval& e, const LinearModel& m, double l2) {
  double norm2 = 0.0;
  for (double wk : m.w) norm2 += wk * wk;
  return e.loss_sum / e.weight_sum + 0.5 * l2 * norm2;
}

}  // namespace

LogisticFit fit_logistic_detailed(const Dataset& data, const LogisticConfig& config, const LinearModel* warm_start,
                                  std::span<const double> weights) {
  require(!data.empty(), "fit_logistic: empty dataset");
  require(weights.empty() || weights.size() == data.size(), "fit_logistic: one weight per point");
  require(config.l2 >= 0.0 && config.tol > 0.0 && config.max_iter >= 0, "fit_logistic: bad config");
  for (const auto& p : data.points()) {
    for (double v : p.x) require(std::isfinite(v), "fit_logistic: non-finite feature");
  }
  for (double v : weights) require(v >= 0.0 && std::isfinite(v), "fit_logistic: weights must be finite, >= 0");

  const std::size_t d = data.dim();
  LogisticFit out;
  out.model.w.assign(d, 0.0);
  if (warm_start && warm_start->w.size() == d) out.model = *warm_start;

  auto& m = out.model;
  auto eval = kernels::logistic_eval(data, m, weights, true);
  require(eval.weight_sum > 0.0, "fit_logistic: total weight is zero");
  double f = objective(eval, m, config.l2);
  std::vector<double> gw(d);
  double step = 1.0;
  for (out.iterations = 0;; ++out.iterations) {
    double gb = eval.grad_b_sum / eval.weight_sum;
    double gnorm2 = gb * gb;
    for (std::size_t k = 0; k < d; ++k) {
      gw[k] = eval.grad_w_sum[k] / eval.weight_sum + config.l2 * m.w[k];
      gnorm2 += gw[k] * gw[k];
    }
    out.gradient_norm = std::sqrt(gnorm2);
    out.objective = f;
    if (out.gradient_norm <= config.tol) {
      out.converged = true;
      break;
    }
    if (out.iterations >= config.max_iter) break;

    // Armijo backtracking from a step that grows after each success.
    step *= 2.0;
    LinearModel trial;
    kernels::LogisticEval trial_eval;
    double trial_f = 0.0;
    for (int halvings = 0;; ++halvings) {
      trial.w.resize(d);
      for (std::size_t k = 0; k < d; ++k) trial.w[k] = m.w[k] - step * gw[k];
      trial.b = m.b - step * gb;
      trial_eval = kernels::logistic_eval(data, trial, weights, false);
      trial_f = objective(trial_eval, trial, config.l2);
      if (trial_f <= f - 0.5 * step * gnorm2 || halvings > 60) break;
      step *= 0.5;
    }
    if (!(trial_f < f)) break;  // no further progress representable
    m = std::move(trial);
    eval = kernels::logistic_eval(data, m, weights, true);
    f = objective(eval, m, config.l2);
  }
  return out;
}

LinearModel fit_logistic(const Dataset& data, const LogisticConfig& config, const LinearModel* warm_start,
                         std::span<const double> weights) {
  return fit_logistic_detailed(data, config, warm_start, weights).model;
}

// ---------------------------------------------------------------------------

Model sgd_step(const Model& model, const LabeledPoint& point, double lr, MarginLossKind kind, double l2) {
  require(lr > 0.0, "sgd_step: learning rate must be positive");
  check_dimension(model, point.x.size());
  if (const auto* t = std::get_if<ThresholdModel>(&model)) {
    const double z = point.y * (point.x[0] - t->c);
    const double grad = margin_loss_derivative(kind, z) * -point.y + l2 * t->c;
    return ThresholdModel{t->c - lr * grad};
  }
  LinearModel m = std::get<LinearModel>(model);
  double s = m.b;
  for (std::size_t k = 0; k < m.w.size(); ++k) s += m.w[k] * point.x[k];
  const double g = margin_loss_derivative(kind, point.y * s) * point.y;
  for (std::size_t k = 0; k < m.w.size(); ++k) m.w[k] -= lr * (g * point.x[k] + l2 * m.w[k]);
  m.b -= lr * g;
  return m;
}

Model fit(const Learner& learner, const Dataset& data, const Model* previous) {
  if (learner.family == ModelFamily::Threshold) return fit_threshold(data, learner.loss);
  const LinearModel* warm = previous ? std::get_if<LinearModel>(previous) : nullptr;
  return fit_logistic(data, learner.logistic, warm);
}

void to_json(nlohmann::json& j, const Model& model) {
  if (const auto* t = std::get_if<ThresholdModel>(&model)) {
    j = nlohmann::json{{"kind", "threshold"}, {"c", t->c}};
  } else {
    const auto& lin = std::get<LinearModel>(model);
    j = nlohmann::json{{"kind", "linear"}, {"w", lin.w}, {"b", lin.b}};
  }
}

void from_json(const nlohmann::json& j, Model& model) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "threshold") {
    model = ThresholdModel{j.at("c").get<double>()};
  } else if (kind == "linear") {
    model = LinearModel{j.at("w").get<std::vector<double>>(), j.at("b").get<double>()};
  } else {
    throw ContractError("unknown model kind '" + kind + "'");
  }
}

}  // namespace fairsample
