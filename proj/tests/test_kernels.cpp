#include <cmath>

#include "doctest.h"

#if defined(FAIRSAMPLE_HAVE_OPENMP)
#include <omp.h>
#endif

#include "fairsample/kernels.hpp"

using namespace fairsample;

namespace {

struct Threads {
  explicit Threads(int n) {
#if defined(FAIRSAMPLE_HAVE_OPENMP)
    saved = omp_get_max_threads();
    omp_set_num_threads(n);
#else
    (void)n;
#endif
  }
  ~Threads() {
#if defined(FAIRSAMPLE_HAVE_OPENMP)
    omp_set_num_threads(saved);
#endif
  }
  int saved = 1;
};

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("parallel kernels equal their serial references bit for bit") {
    for (int threads : {1, 3, 4}) {
      Threads guard(threads);
      for (std::size_t n : {std::size_t{1}, std::size_t{1023}, std::size_t{1024}, std::size_t{5000}}) {
        const auto d1 = synth_uniform_mixture({0, 10, 4, 1, 14, 7, 0.6}, n, n);
        const auto dw = synth_wards(flint_like_ward_spec(10.0), n);
        const Model t = ThresholdModel{5.1};
        const Model lin = LinearModel{{0.4, -1.1, 0.3}, 0.05};

        CHECK(kernels::group_confusion(t, d1) == kernels::group_confusion_serial(t, d1));
        CHECK(kernels::group_confusion(lin, dw) == kernels::group_confusion_serial(lin, dw));
        for (auto k : {MarginLossKind::Hinge, MarginLossKind::Logistic}) {
          CHECK(kernels::margin_risk_sum(d1, k, 5.1) == kernels::margin_risk_sum_serial(d1, k, 5.1));
        }
        std::vector<double> weights(dw.size());
        for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = 0.5 + (i % 7) * 0.25;
        for (bool grad : {false, true}) {
          for (std::span<const double> w : {std::span<const double>{}, std::span<const double>(weights)}) {
            const auto a = kernels::logistic_eval(dw, std::get<LinearModel>(lin), w, grad);
            const auto b = kernels::logistic_eval_serial(dw, std::get<LinearModel>(lin), w, grad);
            CHECK(a.loss_sum == b.loss_sum);
            CHECK(a.grad_w_sum == b.grad_w_sum);
            CHECK(a.grad_b_sum == b.grad_b_sum);
            CHECK(a.weight_sum == b.weight_sum);
          }
        }
      }
      auto f = [](double x) { return std::cos(3 * x) + 0.1 * x * x; };
      const auto a = kernels::grid_argmin(f, -4, 4, 1e-4);
      const auto b = kernels::grid_argmin_serial(f, -4, 4, 1e-4);
      CHECK(a.argmin == b.argmin);
      CHECK(a.value == b.value);
    }
  }

  TEST_CASE("chunked reduction matches a plain sum on integers") {
    const std::size_t n = 10000;
    const auto total = kernels::chunked_reduce(n, std::size_t{0}, [](std::size_t lo, std::size_t hi) {
      std::size_t s = 0;
      for (std::size_t i = lo; i < hi; ++i) s += i;
      return s;
    });
    CHECK(total == n * (n - 1) / 2);
  }

  TEST_CASE("grid_argmin ties resolve to the smallest argument") {
    const auto g = kernels::grid_argmin([](double) { return 1.0; }, 0.0, 1.0, 0.25);
    CHECK(g.argmin == 0.0);
  }

  TEST_CASE("confusion counts") {
    const Dataset d({{{1.0}, 1, 0}, {{-1.0}, 1, 0}, {{2.0}, -1, 1}, {{-2.0}, -1, 1}});
    const auto c = kernels::group_confusion(ThresholdModel{0.0}, d);
    REQUIRE(c.groups.size() == 2);
    CHECK(c.groups[0].n == 2);
    CHECK(c.groups[0].positives == 2);
    CHECK(c.groups[0].false_negatives == 1);
    CHECK(c.groups[1].false_positives == 1);
    CHECK(c.groups[1].predicted_positive == 1);
  }
}
