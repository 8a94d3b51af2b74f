#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "fairsample/data.hpp"

namespace fairsample {

enum class MarginLossKind { Hinge, Logistic };

std::string to_string(MarginLossKind kind);
MarginLossKind parse_loss(const std::string& name);

// Hinge: max(0, 1 - z). Logistic: ln(1 + exp(-z)), overflow-safe.
double margin_loss(MarginLossKind kind, double z);

// d/dz of the loss; for hinge the subgradient -1 on z < 1, else 0.
double margin_loss_derivative(MarginLossKind kind, double z);

// y_hat = sign(x - c) on one-dimensional data.
struct ThresholdModel {
  double c = 0.0;

  bool operator==(const ThresholdModel&) const = default;
};

// y_hat = sign(w.x + b).
struct LinearModel {
  std::vector<double> w;
  double b = 0.0;

  bool operator==(const LinearModel&) const = default;
};

using Model = std::variant<ThresholdModel, LinearModel>;

// Throws ContractError on dimension mismatch.
double score(const Model& model, std::span<const double> x);
int predict(const Model& model, std::span<const double> x);

// Unchecked variants for inner loops; caller guarantees dimensions.
inline double score_unchecked(const Model& model, std::span<const double> x) {
  if (const auto* t = std::get_if<ThresholdModel>(&model)) return x[0] - t->c;
  const auto& lin = std::get<LinearModel>(model);
  double s = lin.b;
  for (std::size_t k = 0; k < lin.w.size(); ++k) s += lin.w[k] * x[k];
  return s;
}
inline int predict_unchecked(const Model& model, std::span<const double> x) {
  return sign_label(score_unchecked(model, x));
}

void check_dimension(const Model& model, std::size_t dim);

// Mean margin loss (1/n) sum l(y_i (x_i - c)) on one-dimensional data.
double threshold_empirical_risk(const Dataset& data, MarginLossKind kind, double c);

// Minimizes the empirical margin risk over c by golden-section search on
// [min x - 1, max x + 1]. When the minimum is attained on a flat interval the
// midpoint of that interval is returned.
ThresholdModel fit_threshold(const Dataset& data, MarginLossKind kind);

struct LogisticConfig {
  int max_iter = 10000;
  double tol = 1e-6;
  double l2 = 1e-4;
};

struct LogisticFit {
  LinearModel model;
  int iterations = 0;
  double gradient_norm = 0.0;
  double objective = 0.0;
  bool converged = false;
};

// Regularized logistic objective
//   sum_i v_i ln(1 + exp(-y_i (w.x_i + b))) / sum_i v_i + l2/2 |w|^2
// (intercept unpenalized), minimized by full-batch gradient descent with
// Armijo backtracking. `weights` is optional (empty = unit weights).
LogisticFit fit_logistic_detailed(const Dataset& data, const LogisticConfig& config,
                                  const LinearModel* warm_start = nullptr,
                                  std::span<const double> weights = {});

LinearModel fit_logistic(const Dataset& data, const LogisticConfig& config,
                         const LinearModel* warm_start = nullptr, std::span<const double> weights = {});

// One (sub)gradient step on l(y * score(x)) + l2/2 |params|^2. For the
// threshold model the parameter is c and score = x - c; for the linear model
// the intercept is not penalized.
Model sgd_step(const Model& model, const LabeledPoint& point, double lr, MarginLossKind kind, double l2);

// Which model family a learner trains and how.
enum class ModelFamily { Threshold, Linear };

struct Learner {
  ModelFamily family = ModelFamily::Linear;
  MarginLossKind loss = MarginLossKind::Logistic;  // threshold ERM loss and SGD loss
  LogisticConfig logistic;
};

// Batch fit: threshold ERM or logistic regression (warm-started when `previous`
// holds a linear model of matching dimension).
Model fit(const Learner& learner, const Dataset& data, const Model* previous = nullptr);

void to_json(nlohmann::json& j, const Model& model);
void from_json(const nlohmann::json& j, Model& model);

}  // namespace fairsample
