#pragma once

// Data-parallel inner loops. Every kernel has a `_serial` twin that is the
// reference implementation; the tests require both to agree bit-for-bit.
//
// Reductions split the index range into fixed-size chunks (independent of the
// thread count), reduce each chunk sequentially, then fold the chunk partials
// in chunk order. Floating-point results are therefore identical for any
// number of threads.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fairsample/data.hpp"
#include "fairsample/models.hpp"

namespace fairsample::kernels {

inline constexpr std::size_t kChunk = 1024;

int max_threads();

template <class T, class ChunkFn>
T chunked_reduce(std::size_t n, const T& zero, ChunkFn&& reduce_chunk) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  if (chunks <= 1) return n == 0 ? zero : reduce_chunk(std::size_t{0}, n);
  std::vector<T> partial(chunks, zero);
#if defined(FAIRSAMPLE_HAVE_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
    const std::size_t end = std::min(n, begin + kChunk);
    partial[static_cast<std::size_t>(c)] = reduce_chunk(begin, end);
  }
  T total = partial[0];
  for (std::size_t c = 1; c < chunks; ++c) total += partial[c];
  return total;
}

// Same chunking, one thread.
template <class T, class ChunkFn>
T chunked_reduce_serial(std::size_t n, const T& zero, ChunkFn&& reduce_chunk) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  if (chunks == 0) return zero;
  T total = reduce_chunk(std::size_t{0}, std::min(n, kChunk));
  for (std::size_t c = 1; c < chunks; ++c) total += reduce_chunk(c * kChunk, std::min(n, (c + 1) * kChunk));
  return total;
}

// Runs f(i) for i in [0, n); iterations must be independent.
template <class F>
void parallel_for(std::size_t n, F&& f) {
#if defined(FAIRSAMPLE_HAVE_OPENMP)
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) f(static_cast<std::size_t>(i));
}

template <class F>
void serial_for(std::size_t n, F&& f) {
  for (std::size_t i = 0; i < n; ++i) f(i);
}

// ---------------------------------------------------------------------------

struct GroupCounts {
  std::size_t n = 0;
  std::size_t positives = 0;        // y = +1
  std::size_t false_negatives = 0;  // y = +1, predicted -1
  std::size_t false_positives = 0;  // y = -1, predicted +1
  std::size_t predicted_positive = 0;

  std::size_t negatives() const { return n - positives; }
  std::size_t errors() const { return false_negatives + false_positives; }
  bool operator==(const GroupCounts&) const = default;
};

struct Confusion {
  std::vector<GroupCounts> groups;

  Confusion& operator+=(const Confusion& other);
  bool operator==(const Confusion&) const = default;
};

// Per-group prediction counts of `model` on `data`.
Confusion group_confusion(const Model& model, const Dataset& data);
Confusion group_confusion_serial(const Model& model, const Dataset& data);

// sum_i l(y_i (x_i - c)) over one-dimensional data (not averaged).
double margin_risk_sum(const Dataset& data, MarginLossKind kind, double c);
double margin_risk_sum_serial(const Dataset& data, MarginLossKind kind, double c);

struct LogisticEval {
  double loss_sum = 0.0;           // sum_i v_i ln(1 + exp(-y_i s_i))
  std::vector<double> grad_w_sum;  // sum_i v_i l'(y_i s_i) y_i x_i
  double grad_b_sum = 0.0;
  double weight_sum = 0.0;

  LogisticEval& operator+=(const LogisticEval& other);
};

// Unregularized weighted sums for the logistic objective; empty weights mean 1.
LogisticEval logistic_eval(const Dataset& data, const LinearModel& model, std::span<const double> weights,
                           bool with_gradient);
LogisticEval logistic_eval_serial(const Dataset& data, const LinearModel& model,
                                  std::span<const double> weights, bool with_gradient);

struct GridMin {
  double argmin = 0.0;
  double value = 0.0;
};

// Minimum of f over lo, lo+step, ..., <= hi. Ties resolve to the smallest argument.
GridMin grid_argmin(const std::function<double(double)>& f, double lo, double hi, double step);
GridMin grid_argmin_serial(const std::function<double(double)>& f, double lo, double hi, double step);

}  // namespace fairsample::kernels
