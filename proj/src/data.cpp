#include "fairsample/data.hpp"

#include <algorithm>
#include <numeric>

#include "fairsample/error.hpp"
#include "fairsample/rng.hpp"

namespace fairsample {

Dataset::Dataset(std::vector<LabeledPoint> points, std::optional<int> group_count,
                 std::vector<std::int64_t> timestamps)
    : points_(std::move(points)), timestamps_(std::move(timestamps)) {
  require(timestamps_.empty() || timestamps_.size() == points_.size(),
          "timestamp count does not match point count");
  int max_group = -1;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    require(p.y == 1 || p.y == -1, "label must be -1 or +1 (point " + std::to_string(i) + ")");
    require(p.a >= 0, "group id must be non-negative (point " + std::to_string(i) + ")");
    require(!p.x.empty(), "feature vector must be non-empty (point " + std::to_string(i) + ")");
    if (i == 0) dim_ = p.x.size();
    require(p.x.size() == dim_, "inconsistent feature dimension at point " + std::to_string(i));
    max_group = std::max(max_group, p.a);
  }
  group_count_ = group_count.value_or(max_group + 1);
  require(group_count_ >= max_group + 1, "group_count smaller than 1 + max group id");
}

std::vector<std::size_t> Dataset::group_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(group_count_), 0);
  for (const auto& p : points_) ++sizes[static_cast<std::size_t>(p.a)];
  return sizes;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<LabeledPoint> pts;
  pts.reserve(indices.size());
  std::vector<std::int64_t> ts;
  if (has_timestamps()) ts.reserve(indices.size());
  for (std::size_t idx : indices) {
    require(idx < points_.size(), "subset index out of range");
    pts.push_back(points_[idx]);
    if (has_timestamps()) ts.push_back(timestamps_[idx]);
  }
  Dataset out(std::move(pts), group_count_, std::move(ts));
  if (out.empty()) out.dim_ = dim_;
  return out;
}

void Dataset::append(const LabeledPoint& point, std::optional<std::int64_t> timestamp) {
  require(point.y == 1 || point.y == -1, "label must be -1 or +1");
  require(point.a >= 0, "group id must be non-negative");
  require(!point.x.empty(), "feature vector must be non-empty");
  require(points_.empty() ? (dim_ == 0 || point.x.size() == dim_) : point.x.size() == dim_,
          "appended point has the wrong feature dimension");
  if (has_timestamps() && timestamp) {
    timestamps_.push_back(*timestamp);
  } else {
    timestamps_.clear();
  }
  dim_ = point.x.size();
  group_count_ = std::max(group_count_, point.a + 1);
  points_.push_back(point);
}

Dataset Dataset::concat(const Dataset& first, const Dataset& second) {
  if (first.empty()) return second;
  if (second.empty()) return first;
  require(first.dim() == second.dim(), "concat: dimension mismatch");
  std::vector<LabeledPoint> pts = first.points_;
  pts.insert(pts.end(), second.points_.begin(), second.points_.end());
  std::vector<std::int64_t> ts;
  if (first.has_timestamps() && second.has_timestamps()) {
    ts = first.timestamps_;
    ts.insert(ts.end(), second.timestamps_.begin(), second.timestamps_.end());
  }
  return Dataset(std::move(pts), std::max(first.group_count_, second.group_count_), std::move(ts));
}

std::vector<std::size_t> split_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = make_stream(seed, "split");
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

DataSplit split(const Dataset& data, const SplitSizes& sizes, std::uint64_t seed) {
  require(sizes.total() <= data.size(),
          "split sizes (" + std::to_string(sizes.total()) + ") exceed dataset size (" +
              std::to_string(data.size()) + ")");
  const auto perm = split_permutation(data.size(), seed);
  std::span<const std::size_t> rest(perm);
  auto take = [&](std::size_t n) {
    auto part = data.subset(rest.first(n));
    rest = rest.subspan(n);
    return part;
  };
  DataSplit out;
  out.train = take(sizes.train);
  out.pool = take(sizes.pool);
  out.validation = take(sizes.validation);
  out.test = take(sizes.test);
  return out;
}

}  // namespace fairsample
