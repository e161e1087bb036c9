#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "optinet/error.hpp"
#include "optinet/random.hpp"
#include "optinet/synth.hpp"

using namespace optinet;

namespace {

Point at_radius(std::size_t d, double r, Rng& rng) {
  Point x(d);
  double s = 0;
  for (auto& v : x) {
    v = rng.normal();
    s += v * v;
  }
  for (auto& v : x) v *= r / std::sqrt(s);
  return x;
}

double closed_form_d2(double t) {
  return t * t / 3.0 + (1.0 / (1.0 - t)) * ((1.0 - t * t) / 2.0 - (1.0 - t * t * t) / 3.0);
}

}  // namespace

TEST_CASE("default boundary radius") {
  for (int d = 1; d <= 6; ++d)
    CHECK(RadialSpec::default_t(d) == doctest::Approx(1.0 - 1.0 / (3.0 * std::pow(2.0, 1.0 / d))));
  CHECK(RadialSpec::default_t(2) == doctest::Approx(0.7642977396044841));
  const auto s = RadialSpec::with_default_t(2);
  CHECK(s.c1() == doctest::Approx(std::min(1.0 / s.t, 1.0 / (1.0 - s.t))));
  RadialSpec half{2, 0.5, {}};
  CHECK(half.c1() == 2.0);
  CHECK_THROWS_AS((RadialSpec{2, 0.0, {}}).validate(), InvalidArgument);
  CHECK_THROWS_AS((RadialSpec{2, 1.0, {}}).validate(), InvalidArgument);
  CHECK_THROWS_AS((RadialSpec{0, 0.5, {}}).validate(), InvalidArgument);
}

TEST_CASE("p1, eta, delta and the Bayes label at known points") {
  const auto s = RadialSpec::with_default_t(2);
  const Point origin{0, 0};
  CHECK(p1(s, origin) == 0.0);
  CHECK(eta(s, origin) == 1.0);
  CHECK(delta(s, origin) == doctest::Approx(s.t));
  CHECK(bayes_label(s, origin) == 0);
  const Point on_t{s.t, 0};
  CHECK(p1(s, on_t) == doctest::Approx(0.5));
  CHECK(eta(s, on_t) == doctest::Approx(0.0));
  CHECK(delta(s, on_t) == 0.0);
  CHECK(bayes_label(s, on_t) == 0);
  CHECK(p1(s, Point{0, 1}) == 1.0);
  CHECK(bayes_label(s, Point{0.99, 0}) == 1);
  CHECK_THROWS_AS(p1(s, Point{1.0, 0.1}), InvalidArgument);
  CHECK_THROWS_AS(p1(s, Point{0.1}), InvalidArgument);
}

TEST_CASE("margin is linear in the distance on each piece") {
  for (int d : {1, 2, 3, 5}) {
    const auto s = RadialSpec::with_default_t(d);
    Rng rng{static_cast<std::uint64_t>(d)};
    for (int i = 0; i < 10000; ++i) {
      const double r = rng.uniform();
      const auto x = at_radius(std::size_t(d), r, rng);
      const double slope = r <= s.t ? 1.0 / s.t : 1.0 / (1.0 - s.t);
      CHECK(eta(s, x) == doctest::Approx(slope * delta(s, x)).epsilon(1e-9));
      CHECK(eta(s, x) >= std::min(s.c1() * delta(s, x), 1.0) - 1e-12);
      const double q = p1(s, x);
      CHECK(eta(s, x) == doctest::Approx(std::abs(q - (1 - q))));
      CHECK(bayes_label(s, x) == (q > 1 - q ? 1 : 0));
    }
  }
}

TEST_CASE("Bayes error quadrature") {
  for (double t : {0.1, 0.3, 0.5, RadialSpec::default_t(2), 0.9}) {
    RadialSpec s{2, t, {}};
    CHECK(std::abs(bayes_error(s) - closed_form_d2(t)) < 1e-8);
  }
  for (int d = 1; d <= 8; ++d) {
    const double l = bayes_error(RadialSpec::with_default_t(d));
    CHECK(l > 0.0);
    CHECK(l < 0.5);
  }
  // Halving the tolerance moves the value by less than 1e-8.
  const auto s = RadialSpec::with_default_t(3);
  auto f = [&](double r) {
    const double p = p1_radial(s, r);
    return std::min(p, 1 - p) * 3 * r * r;
  };
  const double coarse = adaptive_simpson(f, 0, s.t, 5e-9) + adaptive_simpson(f, s.t, 1, 5e-9);
  const double fine = adaptive_simpson(f, 0, s.t, 2.5e-9) + adaptive_simpson(f, s.t, 1, 2.5e-9);
  CHECK(std::abs(coarse - fine) < 1e-8);
  CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0, M_PI, 1e-10) ==
        doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("Bayes error against a 10^7-sample Monte-Carlo estimate") {
  const auto s = RadialSpec::with_default_t(2);
  Rng rng(2024);
  const std::size_t n = 10000000;
  double sum = 0.0, sum2 = 0.0;
  Point x(2);
  for (std::size_t i = 0; i < n; ++i) {
    sample_unit_ball(rng, x);
    const double r = std::min(1.0, std::hypot(x[0], x[1]));
    const double q = p1_radial(s, r);
    const double v = std::min(q, 1 - q);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / double(n);
  const double se = std::sqrt((sum2 / double(n) - mean * mean) / double(n));
  CHECK(std::abs(mean - bayes_error(s)) <= 3 * se);
}

TEST_CASE("sampling") {
  const auto s = RadialSpec::with_default_t(3);
  const auto a = sample(s, 100000, 8);
  CHECK(a == sample(s, 100000, 8));
  CHECK_FALSE(a == sample(s, 1000, 9));
  CHECK(a.num_classes == 2);
  double p_sum = 0;
  std::size_t ones = 0, inner = 0, shell = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double r2 = 0;
    for (double v : a.points[i]) r2 += v * v;
    REQUIRE(r2 <= 1.0 + 1e-12);
    if (std::sqrt(r2) < s.t / 2) {
      ++inner;
      p_sum += p1(s, a.points[i]);
      ones += a.labels[i] == 1 ? 1 : 0;
    }
    if (r2 > 0.25) ++shell;
  }
  // Empirical P(Y = 1 | |x| < t/2) within 3 sigma of the mean of p1 there.
  const double p = p_sum / double(inner);
  const double sigma = std::sqrt(p * (1 - p) / double(inner));
  CHECK(std::abs(double(ones) / double(inner) - p) <= 3 * sigma);
  // Radial law: P(|x| > 1/2) = 1 - 2^-3.
  const double f = double(shell) / double(a.size());
  CHECK(std::abs(f - 0.875) <= 4 * std::sqrt(0.875 * 0.125 / double(a.size())));
  CHECK_THROWS_AS(sample(s, 0, 1), InvalidArgument);
}

TEST_CASE("condition checks") {
  for (int d = 1; d <= 5; ++d) {
    const auto r = check_conditions(RadialSpec::with_default_t(d), 2000, 1);
    CHECK(r.all_pass());
  }
  const auto half = check_conditions(RadialSpec{2, 0.5, {}}, 2000, 2);
  CHECK(half.all_pass());
  const auto again = check_conditions(RadialSpec{2, 0.5, {}}, 2000, 2);
  CHECK(condition_report_to_json(half) == condition_report_to_json(again));

  // A jump in P1 at r = 0.3 breaks the Hoelder probe.
  auto jump = RadialSpec::with_default_t(2);
  jump.radial_p1 = [](double r) { return r < 0.3 ? 0.1 : (r < 0.8 ? 0.4 : 0.9); };
  const auto bad = check_conditions(jump, 2000, 3);
  CHECK_FALSE(bad.holder_pass);
  CHECK_FALSE(bad.all_pass());
}
