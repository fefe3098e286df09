#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "modekit/error.hpp"
#include "modekit/experiments.hpp"
#include "modekit/sifting.hpp"
#include "oracles.hpp"

using namespace modekit;

namespace {

const std::vector<StopCriterion>& all_criteria() {
  static const std::vector<StopCriterion> c{
      StopCriterion::fixed_with_imf_check(10), StopCriterion::fixed_exact(10),
      StopCriterion::standard_deviation(0.2), StopCriterion::dual_threshold()};
  return c;
}

EnvelopePair constant_env(std::size_t n, double m, double a) {
  EnvelopePair e;
  e.mean.assign(n, m);
  e.amplitude.assign(n, a);
  e.upper.assign(n, m + a);
  e.lower.assign(n, m - a);
  return e;
}

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("criterion validation") {
  CHECK_NOTHROW(StopCriterion{}.validate());
  CHECK_THROWS_AS(StopCriterion::fixed_exact(0), Error);
  CHECK_THROWS_AS(StopCriterion::fixed_exact(20, 10), Error);
  CHECK_THROWS_AS(StopCriterion::fixed_with_imf_check(0), Error);
  CHECK_THROWS_AS(StopCriterion::fixed_with_imf_check(5, 0), Error);
  CHECK_THROWS_AS(StopCriterion::standard_deviation(0.0), Error);
  CHECK_THROWS_AS(StopCriterion::dual_threshold(0.5, 0.05), Error);
  CHECK_THROWS_AS(StopCriterion::dual_threshold(0.05, 0.5, 1.0), Error);
  CHECK_THROWS_AS(StopCriterion::dual_threshold(0.05, 0.5, 0.0), Error);
  CHECK_THROWS_AS(StopCriterion::dual_threshold(0.05, 0.5, 0.05, 0), Error);

  StopCriterion d;
  CHECK(d.kind() == "dual");
  CHECK(d.max_iter == 5000);
  auto& r = std::get<DualThreshold>(d.rule);
  CHECK(r.theta1 == 0.05);
  CHECK(r.theta2 == 0.5);
  CHECK(r.alpha == 0.05);
  CHECK(StopCriterion::standard_deviation().kind() == "sd");
  CHECK(std::get<StandardDeviation>(StopCriterion::standard_deviation().rule).sd_threshold == 0.2);
}

TEST_CASE("sift_once examples") {
  const auto x = oracle::sine(5, 200, 1024);
  auto [d, env] = sift_once(x);
  REQUIRE(d.size() == x.size());
  for (std::size_t i = 102; i < 922; ++i) CHECK(std::abs(d[i] - x[i]) < 0.05);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] - d[i] == env.mean[i]);

  const auto y = oracle::sine(5, 200, 1024, 1.0, 3.0);
  auto [dy, ey] = sift_once(y);
  for (std::size_t i = 102; i < 922; ++i) CHECK(std::abs(dy[i] - x[i]) < 0.05);
  // Against the independent envelope mean.
  auto ref = oracle::envelope_mean(y);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(y[i] - dy[i] - ref[i]) < 1e-9);

  std::vector<double> ramp{0, 1, 2, 3, 4, 5};
  CHECK_THROWS_AS(sift_once(ramp), Error);
}

TEST_CASE("imf_condition_holds examples") {
  const auto x = oracle::sine(5, 200, 1024);
  const auto ext = static_cast<long long>(oracle::extrema_count(x));
  const auto zc = static_cast<long long>(oracle::zero_crossings(x));
  CHECK(std::llabs(ext - zc) <= 1);
  CHECK(imf_condition_holds(x, 0.05));
  CHECK_FALSE(imf_condition_holds(oracle::sine(5, 200, 1024, 1.0, 3.0), 0.05));
  CHECK_FALSE(imf_condition_holds(std::vector<double>{0, 1, 2, 1, 0}, 0.05));
}

TEST_CASE("sd_value examples") {
  std::vector<double> a{1, 2, 3};
  CHECK(sd_value(a, a) == 0.0);
  CHECK(sd_value(std::vector<double>{1, 1}, std::vector<double>{0, 0}) ==
        doctest::Approx(2.0).epsilon(1e-10));
  CHECK(sd_value(std::vector<double>{2, 0}, std::vector<double>{1, 0}) ==
        doctest::Approx(0.25).epsilon(1e-10));
  CHECK_THROWS_AS(sd_value(std::vector<double>{1}, std::vector<double>{1, 2}), Error);
}

TEST_CASE("dual_threshold_satisfied examples") {
  CHECK(dual_threshold_satisfied(constant_env(100, 0.0, 1.0), 0.05, 0.5, 0.05));
  CHECK(dual_threshold_satisfied(constant_env(100, 0.04, 1.0), 0.05, 0.5, 0.05));

  auto e = constant_env(100, 0.04, 1.0);
  for (std::size_t i = 0; i < 4; ++i) e.mean[i * 25] = 0.4;
  CHECK(dual_threshold_satisfied(e, 0.05, 0.5, 0.05));
  CHECK_FALSE(dual_threshold_satisfied(e, 0.05, 0.5, 0.01));

  // A single sample above theta2 fails the whole test.
  e.mean[50] = 0.6;
  CHECK_FALSE(dual_threshold_satisfied(e, 0.05, 0.5, 0.5));

  // Samples with vanishing amplitude are excluded from both tests.
  auto z = constant_env(100, 0.0, 1.0);
  z.amplitude[10] = 0.0;
  z.mean[10] = 0.3;
  CHECK(dual_threshold_satisfied(z, 0.05, 0.5, 0.05));
}

TEST_CASE("extract_imf examples") {
  const auto x = oracle::sine(5, 200, 1024);
  auto r = extract_imf(x, StopCriterion::dual_threshold());
  CHECK(r.iterations <= 3);
  CHECK(r.iterations >= 1);
  CHECK(oracle::interior_corr(r.imf, x) > 0.999);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> noise(1000);
  for (auto& v : noise) v = g(rng);
  for (const auto* in : std::array<const std::vector<double>*, 2>{&x, &noise}) {
    auto f = extract_imf(*in, StopCriterion::fixed_exact(10));
    CHECK(f.iterations == 10);
  }

  const auto two = to_vec(default_corpus()[0].signal.samples());
  const auto tone40 = oracle::sine(40, 400, two.size());
  auto first = extract_imf(two, StopCriterion::dual_threshold());
  CHECK(oracle::interior_corr(first.imf, tone40) > 0.95);

  std::vector<double> ramp(100);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.5 * static_cast<double>(i);
  try {
    extract_imf(ramp, StopCriterion{});
    FAIL("expected too_few_extrema");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::too_few_extrema);
  }
}

TEST_CASE("fixed-check reading: at least n passes, consecutive holds") {
  const auto x = oracle::sine(5, 200, 1024);
  auto r = extract_imf(x, StopCriterion::fixed_with_imf_check(4));
  CHECK(r.iterations == 4);
  CHECK(r.stop_reason == StopReason::imf_check_satisfied);
  auto c = extract_imf(x, StopCriterion::fixed_with_imf_check(1, 3));
  CHECK(c.iterations == 3);
}

TEST_CASE("stop predicates hold when re-evaluated") {
  const auto corpus = default_corpus();
  for (const auto& s : corpus) {
    const auto x = to_vec(s.signal.samples());
    for (const auto& c : all_criteria()) {
      auto r = extract_imf(x, c);
      CHECK(r.iterations >= 1);
      CHECK(r.iterations <= c.max_iter);
      CHECK(r.imf.size() == x.size());
      if (r.stop_reason == StopReason::max_iter_reached) continue;
      if (std::holds_alternative<FixedWithImfCheck>(c.rule)) {
        CHECK(r.stop_reason == StopReason::imf_check_satisfied);
        CHECK(imf_condition_holds(r.imf));
      } else if (const auto* sd = std::get_if<StandardDeviation>(&c.rule)) {
        REQUIRE(r.stop_reason == StopReason::criterion_satisfied);
        const auto prev = r.iterations == 1
                              ? x
                              : extract_imf(x, StopCriterion::fixed_exact(r.iterations - 1)).imf;
        CHECK(sd_value(prev, r.imf) < sd->sd_threshold);
      } else if (const auto* d = std::get_if<DualThreshold>(&c.rule)) {
        REQUIRE(r.stop_reason == StopReason::criterion_satisfied);
        CHECK(extrema_crossing_balanced(r.imf));
        CHECK(dual_threshold_satisfied(local_mean(r.imf), d->theta1, d->theta2, d->alpha,
                                       oracle::max_abs(r.imf)));
      }
    }
  }
}

TEST_CASE("max_iter caps every criterion") {
  const auto x = to_vec(default_corpus()[8].signal.samples());
  for (auto c : {StopCriterion::dual_threshold(0.001, 0.002, 0.001, 3),
                 StopCriterion::standard_deviation(1e-12, 3),
                 StopCriterion::fixed_with_imf_check(50, 1, 3)}) {
    auto r = extract_imf(x, c);
    CHECK(r.iterations <= 3);
  }
  auto r = extract_imf(x, StopCriterion::dual_threshold(0.001, 0.002, 0.001, 3));
  CHECK(r.stop_reason == StopReason::max_iter_reached);
  CHECK(r.iterations == 3);
}

TEST_CASE("extract_imf is deterministic") {
  const auto x = to_vec(default_corpus()[5].signal.samples());
  for (const auto& c : all_criteria()) {
    auto a = extract_imf(x, c);
    auto b = extract_imf(x, c);
    CHECK(a.imf == b.imf);
    CHECK(a.iterations == b.iterations);
  }
}

TEST_CASE("envelope mean energy decreases on most passes") {
  std::size_t passes = 0, decreasing = 0;
  for (const auto& s : default_corpus()) {
    auto h = to_vec(s.signal.samples());
    double prev_energy = -1;
    for (int p = 0; p < 10; ++p) {
      auto [d, env] = sift_once(h);
      double e = 0;
      for (double m : env.mean) e += m * m;
      if (prev_energy >= 0) {
        ++passes;
        if (e <= prev_energy) ++decreasing;
      }
      prev_energy = e;
      h = std::move(d);
    }
  }
  const double frac = static_cast<double>(decreasing) / static_cast<double>(passes);
  MESSAGE("mean-energy decrease fraction: " << frac);
  CHECK(frac >= 0.9);
}

TEST_CASE("stop reason names") {
  CHECK(to_string(StopReason::criterion_satisfied) == "criterion-satisfied");
  CHECK(to_string(StopReason::max_iter_reached) == "max-iter-reached");
  CHECK(to_string(StopReason::imf_check_satisfied) == "imf-check-satisfied");
}
