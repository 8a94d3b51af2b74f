#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"

#include "fairsample/data.hpp"
#include "fairsample/error.hpp"

using namespace fairsample;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("fairsample_test_" + name);
  std::ofstream(path) << content;
  return path.string();
}

CsvSchema basic_schema() {
  CsvSchema s;
  s.label_column = "label";
  s.group_column = "group";
  s.feature_columns = {"x1", "x2"};
  return s;
}

Dataset line_data(std::size_t n) {
  std::vector<LabeledPoint> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({{static_cast<double>(i)}, i % 2 ? 1 : -1, static_cast<int>(i % 3)});
  return Dataset(std::move(pts));
}

}  // namespace

TEST_SUITE("data") {
  TEST_CASE("sign(0) is +1") {
    CHECK(sign_label(0.0) == 1);
    CHECK(sign_label(-0.0) == 1);
    CHECK(sign_label(-1e-300) == -1);
  }

  TEST_CASE("dataset invariants") {
    const auto d = line_data(6);
    CHECK(d.size() == 6);
    CHECK(d.dim() == 1);
    CHECK(d.group_count() == 3);
    CHECK(d.group_sizes() == std::vector<std::size_t>{2, 2, 2});
    CHECK_THROWS_AS(Dataset({{{1.0}, 0, 0}}), ContractError);
    CHECK_THROWS_AS(Dataset({{{1.0}, 1, -1}}), ContractError);
    CHECK_THROWS_AS(Dataset({{{1.0}, 1, 0}, {{1.0, 2.0}, 1, 0}}), ContractError);
    CHECK_THROWS_AS(Dataset({{{1.0}, 1, 3}}, 2), ContractError);
  }

  TEST_CASE("subset keeps group count and append grows by one") {
    const auto d = line_data(6);
    const std::vector<std::size_t> idx{0, 3};
    auto s = d.subset(idx);
    CHECK(s.group_count() == 3);
    CHECK(s.size() == 2);
    s.append({{7.0}, 1, 1});
    CHECK(s.size() == 3);
    CHECK(s[2].x[0] == 7.0);
    CHECK_THROWS_AS(s.append({{1.0, 2.0}, 1, 0}), ContractError);
  }

  TEST_CASE("split example: 100 rows, (10,60,20,10), seed 7") {
    const auto d = line_data(100);
    const auto sp = split(d, {10, 60, 20, 10}, 7);
    CHECK(sp.train.size() == 10);
    CHECK(sp.pool.size() == 60);
    CHECK(sp.validation.size() == 20);
    CHECK(sp.test.size() == 10);
    // x holds the source index, so disjointness is checked on x.
    std::set<double> seen;
    for (const auto* part : {&sp.train, &sp.pool, &sp.validation, &sp.test}) {
      CHECK(part->group_count() == d.group_count());
      CHECK(part->dim() == d.dim());
      for (const auto& p : part->points()) CHECK(seen.insert(p.x[0]).second);
    }
    CHECK(seen.size() == 100);
    const auto again = split(d, {10, 60, 20, 10}, 7);
    for (std::size_t i = 0; i < 60; ++i) CHECK(again.pool[i].x == sp.pool[i].x);
    CHECK_THROWS_AS(split(d, {50, 50, 1, 0}, 7), ContractError);
  }

  TEST_CASE("split property: partition for random sizes") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 1 + rng() % 300;
      const auto d = line_data(n);
      std::size_t left = n;
      SplitSizes s;
      for (auto* part : {&s.train, &s.pool, &s.validation, &s.test}) {
        *part = left ? rng() % (left + 1) : 0;
        left -= *part;
      }
      const auto sp = split(d, s, rng());
      std::set<double> seen;
      std::size_t total = 0;
      for (const auto* part : {&sp.train, &sp.pool, &sp.validation, &sp.test}) {
        total += part->size();
        for (const auto& p : part->points()) CHECK(seen.insert(p.x[0]).second);
      }
      CHECK(total == s.total());
    }
  }

  TEST_CASE("csv: 3-row file with {0,1} labels") {
    const auto path = write_temp("ok.csv", "x1,x2,label,group\n1.5,2,0,0\n-3,4e-1,1,1\n0,0,1,0\n");
    const auto d = load_csv(path, basic_schema());
    CHECK(d.size() == 3);
    CHECK(d.group_count() == 2);
    CHECK(d[0].y == -1);
    CHECK(d[1].y == 1);
    CHECK(d[1].x == std::vector<double>{-3.0, 0.4});
    CHECK(d[2].a == 0);
  }

  TEST_CASE("csv errors name the row") {
    auto schema = basic_schema();
    const auto bad_label = write_temp("bad_label.csv", "x1,x2,label,group\n1,2,0,0\n1,2,2,1\n");
    try {
      load_csv(bad_label, schema);
      FAIL("expected an error");
    } catch (const ContractError& e) {
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
    const auto bad_feature = write_temp("bad_feature.csv", "x1,x2,label,group\n1,abc,0,0\n");
    CHECK_THROWS_AS(load_csv(bad_feature, schema), ContractError);
    const auto neg_group = write_temp("neg_group.csv", "x1,x2,label,group\n1,2,0,-1\n");
    CHECK_THROWS_AS(load_csv(neg_group, schema), ContractError);
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", schema), IoError);
  }

  TEST_CASE("csv: label map, delimiter, timestamps") {
    auto schema = basic_schema();
    schema.label_map = parse_label_map("neg=no,pos=yes");
    schema.delimiter = ';';
    schema.timestamp_column = "ts";
    const auto path = write_temp("semi.csv", "ts;x1;x2;label;group\n5;1;2;yes;0\n3;1;2;no;1\n");
    const auto d = load_csv(path, schema);
    CHECK(d[0].y == 1);
    CHECK(d[1].y == -1);
    CHECK(d.timestamps() == std::vector<std::int64_t>{5, 3});
    CHECK_THROWS_AS(parse_label_map("neg=0"), ContractError);
  }

  TEST_CASE("uniform mixture generator") {
    const UniformMixtureSpec spec{0, 10, 4, 1, 14, 7, 0.5};
    const std::size_t n = 100000;
    const auto d = synth_uniform_mixture(spec, n, 3);
    const double frac0 = static_cast<double>(d.group_sizes()[0]) / n;
    CHECK(std::abs(frac0 - 0.5) < 0.01);
    for (const auto& p : d.points()) {
      CHECK(p.x[0] >= 0.0);
      CHECK(p.x[0] <= 14.0);
      const double t = p.a == 0 ? spec.t0 : spec.t1;
      CHECK(p.y == sign_label(p.x[0] - t));
    }
    const auto one = synth_uniform_mixture(spec, 1, 3);
    CHECK(one.size() == 1);
    CHECK_THROWS_AS(synth_uniform_mixture(spec, 0, 3), ContractError);
    CHECK_THROWS_AS(synth_uniform_mixture(UniformMixtureSpec{0, 10, 4, 1, 14, 4, 0.5}, 10, 3), ContractError);
    const auto again = synth_uniform_mixture(spec, 100, 3);
    for (std::size_t i = 0; i < 100; ++i) CHECK(again[i].x == d[i].x);
  }

  TEST_CASE("Gaussian mixture generator") {
    const GaussianMixtureSpec spec{};
    const std::size_t n = 100000;
    const auto d = synth_gaussian_mixture(spec, n, 5);
    const double frac1 = static_cast<double>(d.group_sizes()[1]) / n;
    CHECK(std::abs(frac1 - 0.15) < 0.01);
    CHECK(std::abs(frac1 - 0.15) < 3 * std::sqrt(0.85 * 0.15 / n));
    double sum = 0, sq = 0;
    std::size_t n1 = 0;
    for (const auto& p : d.points()) {
      if (p.a == 0) CHECK(p.y == sign_label(p.x[0]));
      if (p.a == 1) {
        sum += p.x[0];
        sq += p.x[0] * p.x[0];
        ++n1;
      }
    }
    // Second parameter is a variance: group-1 sample variance near 2.
    const double mean1 = sum / n1;
    CHECK(std::abs(sq / n1 - mean1 * mean1 - 2.0) < 0.1);
    CHECK_THROWS_AS(synth_gaussian_mixture(spec, 0, 5), ContractError);
  }

  TEST_CASE("wards: Flint sizes, determinism, separable case") {
    const auto full = flint_like_ward_spec(1.0);
    const auto total = std::accumulate(full.ward_sizes.begin(), full.ward_sizes.end(), std::size_t{0});
    CHECK(total == 22750);
    const auto d = synth_wards(full, 1);
    CHECK(d.size() == 22750);
    CHECK(d.group_count() == 9);
    CHECK(d.group_sizes() == full.ward_sizes);
    CHECK(d.has_timestamps());
    auto ts = d.timestamps();
    std::sort(ts.begin(), ts.end());
    for (std::size_t i = 0; i < ts.size(); ++i) CHECK(ts[i] == static_cast<std::int64_t>(i));

    // Flint-like 200/1000 split.
    const auto sp = split(d, {200, 0, 1000, 0}, 2);
    CHECK(sp.train.size() == 200);
    CHECK(sp.validation.size() == 1000);

    const auto scaled = flint_like_ward_spec(10.0);
    CHECK(std::accumulate(scaled.ward_sizes.begin(), scaled.ward_sizes.end(), std::size_t{0}) == 2276);
    const auto a = synth_wards(scaled, 9), b = synth_wards(scaled, 9);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].x == b[i].x);

    WardSpec two;
    two.ward_sizes = {300, 300};
    for (int k = 0; k < 2; ++k) two.wards.push_back(WardParams{{0.0, 0.0}, {1.0, -1.0}, 0.0, 0.0, 0.0});
    const auto sep = synth_wards(two, 4);
    for (const auto& p : sep.points()) CHECK(p.y == sign_label(p.x[0] - p.x[1]));

    WardSpec one;
    one.ward_sizes = {10};
    one.wards.push_back(two.wards[0]);
    CHECK_THROWS_AS(synth_wards(one, 1), ContractError);
  }
}
