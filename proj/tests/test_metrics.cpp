#include <cmath>

#include "doctest.h"

#include "fairsample/error.hpp"
#include "fairsample/metrics.hpp"

using namespace fairsample;

namespace {

// Group 0: x in {1,2,3,-1}, labels +1; group 1: x in {-1,-2,1}, labels -1.
Dataset small() {
  return Dataset({{{1.0}, 1, 0},
                  {{2.0}, 1, 0},
                  {{3.0}, 1, 0},
                  {{-1.0}, 1, 0},
                  {{-1.0}, -1, 1},
                  {{-2.0}, -1, 1},
                  {{1.0}, -1, 1}});
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("names round trip") {
    for (auto m : {MetricKind::ZeroOneError, MetricKind::EqualOpportunityGap, MetricKind::EqualizedOddsComponent,
                   MetricKind::StatisticalParityRate}) {
      CHECK(parse_metric(to_string(m)) == m);
    }
    CHECK_THROWS_AS(parse_metric("accuracy"), ContractError);
  }

  TEST_CASE("group_value examples") {
    const auto d = small();
    const Model c0 = ThresholdModel{0.0};
    CHECK(group_value(MetricKind::ZeroOneError, c0, d, 0) == 0.25);
    CHECK(group_value(MetricKind::ZeroOneError, c0, d, 1) == doctest::Approx(1.0 / 3));
    CHECK(group_value(MetricKind::EqualOpportunityGap, c0, d, 0) == 0.25);
    CHECK_THROWS_AS(group_value(MetricKind::EqualOpportunityGap, c0, d, 1), ContractError);
    const Model always = ThresholdModel{-100.0};
    CHECK(group_value(MetricKind::StatisticalParityRate, always, d, 0) == 1.0);
    CHECK(group_value(MetricKind::StatisticalParityRate, always, d, 1) == 1.0);
    const Dataset perfect({{{1.0}, 1, 0}, {{-1.0}, -1, 0}, {{2.0}, 1, 1}});
    CHECK(group_value(MetricKind::ZeroOneError, c0, perfect, 0) == 0.0);
    CHECK(group_value(MetricKind::ZeroOneError, c0, perfect, 1) == 0.0);
    CHECK_THROWS_AS(group_value(MetricKind::ZeroOneError, c0, Dataset({{{1.0}, 1, 1}}), 0), ContractError);
  }

  TEST_CASE("disparity examples and warnings") {
    const auto d = small();
    const Model c0 = ThresholdModel{0.0};
    CHECK(disparity(MetricKind::ZeroOneError, c0, d) == doctest::Approx(1.0 / 3 - 0.25));
    // Equal opportunity: group 1 has no positives, so only one group is evaluable.
    std::vector<std::string> warnings;
    CHECK_THROWS_AS(disparity(MetricKind::EqualOpportunityGap, c0, d, &warnings), ContractError);
    CHECK(!warnings.empty());

    kernels::Confusion conf;
    conf.groups.resize(2);
    conf.groups[0] = {10, 5, 0, 3, 5};  // error 0.3
    conf.groups[1] = {10, 5, 1, 0, 4};  // error 0.1
    CHECK(disparity_from_confusion(MetricKind::ZeroOneError, conf) == doctest::Approx(0.2));
    conf.groups[1] = conf.groups[0];
    CHECK(disparity_from_confusion(MetricKind::ZeroOneError, conf) == 0.0);
  }

  TEST_CASE("equalized odds takes the max over labels of the pairwise gaps") {
    kernels::Confusion conf;
    conf.groups.resize(3);
    conf.groups[0] = {20, 10, 1, 2, 11};  // FNR 0.1, FPR 0.2
    conf.groups[1] = {20, 10, 4, 1, 7};   // FNR 0.4, FPR 0.1
    conf.groups[2] = {20, 10, 2, 5, 13};  // FNR 0.2, FPR 0.5
    CHECK(disparity_from_confusion(MetricKind::EqualizedOddsComponent, conf) == doctest::Approx(0.4));
    CHECK(*group_value_from_counts(MetricKind::EqualizedOddsComponent, conf.groups[1]) == doctest::Approx(0.4));
  }

  TEST_CASE("disparity is symmetric under group relabelling") {
    kernels::Confusion conf, swapped;
    conf.groups = {{12, 6, 1, 2, 7}, {9, 3, 2, 1, 2}, {15, 5, 0, 4, 9}};
    swapped.groups = {conf.groups[2], conf.groups[0], conf.groups[1]};
    for (auto m : {MetricKind::ZeroOneError, MetricKind::EqualOpportunityGap, MetricKind::EqualizedOddsComponent,
                   MetricKind::StatisticalParityRate}) {
      CHECK(disparity_from_confusion(m, conf) == disparity_from_confusion(m, swapped));
    }
  }

  TEST_CASE("overall error decomposes into group errors") {
    const auto d = synth_wards(flint_like_ward_spec(10.0), 3);
    const Model m = LinearModel{{1.0, 0.5, 0.0}, -0.1};
    const auto values = group_values(MetricKind::ZeroOneError, m, d);
    const auto sizes = d.group_sizes();
    double total = 0;
    for (std::size_t a = 0; a < sizes.size(); ++a) total += static_cast<double>(sizes[a]) / d.size() * *values[a];
    CHECK(std::abs(overall_error(m, d) - total) < 1e-12);
    const Dataset balanced({{{1.0}, 1, 0}, {{2.0}, -1, 0}});
    CHECK(overall_error(ThresholdModel{-5.0}, balanced) == 0.5);
    CHECK_THROWS_AS(overall_error(m, Dataset()), ContractError);
  }
}
