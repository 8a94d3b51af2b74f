#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fairsample/data.hpp"
#include "fairsample/kernels.hpp"
#include "fairsample/models.hpp"

namespace fairsample {

// CLI names: "01", "eqopp", "eqodds", "stat-parity".
enum class MetricKind { ZeroOneError, EqualOpportunityGap, EqualizedOddsComponent, StatisticalParityRate };

std::string to_string(MetricKind kind);
MetricKind parse_metric(const std::string& name);

// Per-group value of a metric from precomputed counts; nullopt when the group
// lacks the conditioning event (no points, or no positives for eqopp).
//   01          fraction misclassified
//   eqopp       fraction of y=+1 misclassified
//   eqodds      max of the y=+1 and y=-1 conditional error rates (groups with
//               only one label use the rate that exists)
//   stat-parity fraction predicted +1
std::optional<double> group_value_from_counts(MetricKind metric, const kernels::GroupCounts& counts);

// Throws ContractError when the group is empty or lacks the conditioning event.
double group_value(MetricKind metric, const Model& model, const Dataset& data, int a);

// Per-group values; absent groups are nullopt.
std::vector<std::optional<double>> group_values(MetricKind metric, const Model& model, const Dataset& data);

// Largest pairwise |value_a - value_b| over evaluable groups. For equalized
// odds: the max over y in {-1,+1} of the largest pairwise gap of y-conditional
// error rates. Skipped groups are reported through `warnings` when given.
// Throws ContractError if fewer than two groups are evaluable.
double disparity(MetricKind metric, const Model& model, const Dataset& data,
                 std::vector<std::string>* warnings = nullptr);
double disparity_from_confusion(MetricKind metric, const kernels::Confusion& confusion,
                                std::vector<std::string>* warnings = nullptr);

double overall_error(const Model& model, const Dataset& data);

}  // namespace fairsample
