#include "fairsample/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fairsample/error.hpp"

namespace fairsample {

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::ZeroOneError: return "01";
    case MetricKind::EqualOpportunityGap: return "eqopp";
    case MetricKind::EqualizedOddsComponent: return "eqodds";
    case MetricKind::StatisticalParityRate: return "stat-parity";
  }
  return "?";
}

MetricKind parse_metric(const std::string& name) {
  if (name == "01") return MetricKind::ZeroOneError;
  if (name == "eqopp") return MetricKind::EqualOpportunityGap;
  if (name == "eqodds") return MetricKind::EqualizedOddsComponent;
  if (name == "stat-parity") return MetricKind::StatisticalParityRate;
  throw ContractError("unknown metric '" + name + "' (expected 01, eqopp, eqodds, stat-parity)");
}

namespace {

double ratio(std::size_t num, std::size_t den) { return static_cast<double>(num) / static_cast<double>(den); }

std::optional<double> conditional_error(const kernels::GroupCounts& c, int y) {
  if (y > 0) return c.positives == 0 ? std::nullopt : std::optional(ratio(c.false_negatives, c.positives));
  return c.negatives() == 0 ? std::nullopt : std::optional(ratio(c.false_positives, c.negatives()));
}

double max_pairwise_gap(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

}  // namespace

std::optional<double> group_value_from_counts(MetricKind metric, const kernels::GroupCounts& c) {
  if (c.n == 0) return std::nullopt;
  switch (metric) {
    case MetricKind::ZeroOneError: return ratio(c.errors(), c.n);
    case MetricKind::EqualOpportunityGap: return conditional_error(c, +1);
    case MetricKind::StatisticalParityRate: return ratio(c.predicted_positive, c.n);
    case MetricKind::EqualizedOddsComponent: {
      const auto pos = conditional_error(c, +1);
      const auto neg = conditional_error(c, -1);
      if (pos && neg) return std::max(*pos, *neg);
      return pos ? pos : neg;
    }
  }
  return std::nullopt;
}

double group_value(MetricKind metric, const Model& model, const Dataset& data, int a) {
  require(a >= 0 && a < data.group_count(), "group id " + std::to_string(a) + " out of range");
  check_dimension(model, data.dim());
  const auto conf = kernels::group_confusion(model, data);
  const auto& c = conf.groups[static_cast<std::size_t>(a)];
  require(c.n > 0, "group " + std::to_string(a) + " is empty");
  const auto v = group_value_from_counts(metric, c);
  require(v.has_value(), "group " + std::to_string(a) + " has no positives for " + to_string(metric));
  return *v;
}

std::vector<std::optional<double>> group_values(MetricKind metric, const Model& model, const Dataset& data) {
  if (!data.empty()) check_dimension(model, data.dim());
  const auto conf = kernels::group_confusion(model, data);
  std::vector<std::optional<double>> out;
  out.reserve(conf.groups.size());
  for (const auto& c : conf.groups) out.push_back(group_value_from_counts(metric, c));
  return out;
}

double disparity_from_confusion(MetricKind metric, const kernels::Confusion& confusion,
                                std::vector<std::string>* warnings) {
  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };
  if (metric == MetricKind::EqualizedOddsComponent) {
    double worst = 0.0;
    bool any = false;
    for (int y : {+1, -1}) {
      std::vector<double> rates;
      for (std::size_t a = 0; a < confusion.groups.size(); ++a) {
        if (auto r = conditional_error(confusion.groups[a], y)) {
          rates.push_back(*r);
        } else {
          warn("group " + std::to_string(a) + " skipped: no y=" + (y > 0 ? "+1" : "-1") + " points");
        }
      }
      if (rates.size() >= 2) {
        worst = std::max(worst, max_pairwise_gap(rates));
        any = true;
      }
    }
    require(any, "disparity needs at least two evaluable groups");
    return worst;
  }
  std::vector<double> values;
  for (std::size_t a = 0; a < confusion.groups.size(); ++a) {
    if (auto v = group_value_from_counts(metric, confusion.groups[a])) {
      values.push_back(*v);
    } else {
      warn("group " + std::to_string(a) + " skipped: not evaluable for " + to_string(metric));
    }
  }
  require(values.size() >= 2, "disparity needs at least two evaluable groups");
  return max_pairwise_gap(values);
}

double disparity(MetricKind metric, const Model& model, const Dataset& data, std::vector<std::string>* warnings) {
  if (!data.empty()) check_dimension(model, data.dim());
  return disparity_from_confusion(metric, kernels::group_confusion(model, data), warnings);
}

double overall_error(const Model& model, const Dataset& data) {
  require(!data.empty(), "overall_error: empty dataset");
  check_dimension(model, data.dim());
  const auto conf = kernels::group_confusion(model, data);
  std::size_t errors = 0;
  for (const auto& g : conf.groups) errors += g.errors();
  return ratio(errors, data.size());
}

}  // namespace fairsample
