#include "fairsample/kernels.hpp"

#include <cmath>
#include <limits>

#if defined(FAIRSAMPLE_HAVE_OPENMP)
#include <omp.h>
#endif

namespace fairsample::kernels {

int max_threads() {
#if defined(FAIRSAMPLE_HAVE_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Confusion& Confusion::operator+=(const Confusion& other) {
  if (groups.size() < other.groups.size()) groups.resize(other.groups.size());
  for (std::size_t a = 0; a < other.groups.size(); ++a) {
    auto& g = groups[a];
    const auto& o = other.groups[a];
    g.n += o.n;
    g.positives += o.positives;
    g.false_negatives += o.false_negatives;
    g.false_positives += o.false_positives;
    g.predicted_positive += o.predicted_positive;
  }
  return *this;
}

LogisticEval& LogisticEval::operator+=(const LogisticEval& other) {
  loss_sum += other.loss_sum;
  if (grad_w_sum.size() < other.grad_w_sum.size()) grad_w_sum.resize(other.grad_w_sum.size(), 0.0);
  for (std::size_t k = 0; k < other.grad_w_sum.size(); ++k) grad_w_sum[k] += other.grad_w_sum[k];
  grad_b_sum += other.grad_b_sum;
  weight_sum += other.weight_sum;
  return *this;
}

namespace {

auto confusion_chunk(const Model& model, const Dataset& data) {
  return [&model, &data](std::size_t begin, std::size_t end) {
    Confusion c;
    c.groups.resize(static_cast<std::size_t>(data.group_count()));
    for (std::size_t i = begin; i < end; ++i) {
      const auto& p = data[i];
      auto& g = c.groups[static_cast<std::size_t>(p.a)];
      const int yhat = predict_unchecked(model, p.x);
      ++g.n;
      if (yhat > 0) ++g.predicted_positive;
      if (p.y > 0) {
        ++g.positives;
        if (yhat < 0) ++g.false_negatives;
      } else if (yhat > 0) {
        ++g.false_positives;
      }
    }
    return c;
  };
}

Confusion empty_confusion(const Dataset& data) {
  Confusion c;
  c.groups.resize(static_cast<std::size_t>(data.group_count()));
  return c;
}

auto risk_chunk(const Dataset& data, MarginLossKind kind, double c) {
  return [&data, kind, c](std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& p = data[i];
      s += margin_loss(kind, p.y * (p.x[0] - c));
    }
    return s;
  };
}

auto logistic_chunk(const Dataset& data, const LinearModel& model, std::span<const double> weights,
                    bool with_gradient) {
  return [&data, &model, weights, with_gradient](std::size_t begin, std::size_t end) {
    LogisticEval e;
    if (with_gradient) e.grad_w_sum.assign(model.w.size(), 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& p = data[i];
      const double v = weights.empty() ? 1.0 : weights[i];
      double s = model.b;
      for (std::size_t k = 0; k < model.w.size(); ++k) s += model.w[k] * p.x[k];
      const double z = p.y * s;
      e.loss_sum += v * margin_loss(MarginLossKind::Logistic, z);
      e.weight_sum += v;
      if (with_gradient) {
        const double g = v * margin_loss_derivative(MarginLossKind::Logistic, z) * p.y;
        for (std::size_t k = 0; k < model.w.size(); ++k) e.grad_w_sum[k] += g * p.x[k];
        e.grad_b_sum += g;
      }
    }
    return e;
  };
}

LogisticEval empty_eval(const LinearModel& model, bool with_gradient) {
  LogisticEval e;
  if (with_gradient) e.grad_w_sum.assign(model.w.size(), 0.0);
  return e;
}

struct GridBest {
  std::size_t index = std::numeric_limits<std::size_t>::max();
  double value = std::numeric_limits<double>::infinity();

  GridBest& operator+=(const GridBest& o) {
    if (o.value < value || (o.value == value && o.index < index)) *this = o;
    return *this;
  }
};

std::size_t grid_count(double lo, double hi, double step) {
  return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

auto grid_chunk(const std::function<double(double)>& f, double lo, double step) {
  return [&f, lo, step](std::size_t begin, std::size_t end) {
    GridBest best;
    for (std::size_t k = begin; k < end; ++k) best += GridBest{k, f(lo + static_cast<double>(k) * step)};
    return best;
  };
}

}  // namespace

Confusion group_confusion(const Model& model, const Dataset& data) {
  return chunked_reduce(data.size(), empty_confusion(data), confusion_chunk(model, data));
}

Confusion group_confusion_serial(const Model& model, const Dataset& data) {
  return chunked_reduce_serial(data.size(), empty_confusion(data), confusion_chunk(model, data));
}

double margin_risk_sum(const Dataset& data, MarginLossKind kind, double c) {
  return chunked_reduce(data.size(), 0.0, risk_chunk(data, kind, c));
}

double margin_risk_sum_serial(const Dataset& data, MarginLossKind kind, double c) {
  return chunked_reduce_serial(data.size(), 0.0, risk_chunk(data, kind, c));
}

LogisticEval logistic_eval(const Dataset& data, const LinearModel& model, std::span<const double> weights,
                           bool with_gradient) {
  return chunked_reduce(data.size(), empty_eval(model, with_gradient),
                        logistic_chunk(data, model, weights, with_gradient));
}

LogisticEval logistic_eval_serial(const Dataset& data, const LinearModel& model,
                                  std::span<const double> weights, bool with_gradient) {
  return chunked_reduce_serial(data.size(), empty_eval(model, with_gradient),
                               logistic_chunk(data, model, weights, with_gradient));
}

GridMin grid_argmin(const std::function<double(double)>& f, double lo, double hi, double step) {
  const auto best = chunked_reduce(grid_count(lo, hi, step), GridBest{}, grid_chunk(f, lo, step));
  return {lo + static_cast<double>(best.index) * step, best.value};
}

GridMin grid_argmin_serial(const std::function<double(double)>& f, double lo, double hi, double step) {
  const auto best = chunked_reduce_serial(grid_count(lo, hi, step), GridBest{}, grid_chunk(f, lo, step));
  return {lo + static_cast<double>(best.index) * step, best.value};
}

}  // namespace fairsample::kernels
