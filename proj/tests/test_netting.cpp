#include <doctest.h>

#include <cmath>
#include <limits>

#include "optinet/error.hpp"
#include "optinet/netting.hpp"
#include "optinet/random.hpp"
#include "optinet/synth.hpp"

using namespace optinet;

namespace {

PointSet cube(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  PointSet ps(d);
  Point x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.uniform();
    ps.push_back(x);
  }
  return ps;
}

}  // namespace

TEST_CASE("greedy net on small pools") {
  const auto single = PointSet::from_rows({{0.3, 0.3}});
  CHECK(build_gamma_net(single, 5.0).member_indices == std::vector<std::size_t>{0});
  const auto three = PointSet::from_rows({{0, 0}, {0.5, 0}, {2, 0}});
  const auto net = build_gamma_net(three, 1.0);
  CHECK(net.member_indices == std::vector<std::size_t>{0, 2});
  CHECK(net.source_size == 3);
  CHECK(net.gamma == 1.0);
  // Distance exactly gamma is accepted.
  const auto edge = PointSet::from_rows({{0, 0}, {1, 0}});
  CHECK(build_gamma_net(edge, 1.0).size() == 2);
}

TEST_CASE("net argument errors") {
  const auto pool = PointSet::from_rows({{0, 0}});
  CHECK_THROWS_AS(build_gamma_net(PointSet(2), 0.1), InvalidArgument);
  CHECK_THROWS_AS(build_gamma_net(pool, 0.0), InvalidArgument);
  CHECK_THROWS_AS(build_gamma_net(pool, -1.0), InvalidArgument);
  CHECK_THROWS_AS(build_gamma_net(pool, std::numeric_limits<double>::infinity()), InvalidArgument);
  CHECK_THROWS_AS(build_gamma_net(pool, std::nan("")), InvalidArgument);
}

TEST_CASE("500 points in the unit square, gamma 0.1") {
  const auto pool = cube(500, 2, 17);
  const auto net = build_gamma_net(pool, 0.1);
  CHECK(verify_packing(net, pool));
  CHECK(verify_covering(net, pool));
  for (std::size_t i = 1; i < net.size(); ++i)
    CHECK(net.member_indices[i - 1] < net.member_indices[i]);
}

TEST_CASE("verify_packing and verify_covering detect violations") {
  const auto pool = PointSet::from_rows({{0, 0}, {0, 0}, {5, 0}});
  GammaNet dup{0.5, {0, 1, 2}, 3};
  CHECK_FALSE(verify_packing(dup, pool));
  GammaNet missing{0.5, {0}, 3};
  CHECK(verify_packing(missing, pool));
  CHECK_FALSE(verify_covering(missing, pool));
  const auto single = PointSet::from_rows({{1, 1}});
  CHECK(verify_covering(build_gamma_net(single, 0.1), single));
}

TEST_CASE("net_size_bound values") {
  CHECK(net_size_bound(1.0, 2.0, 3) == 1);
  CHECK(net_size_bound(1.0, 0.1, 2) == 400);
  CHECK(net_size_bound(2.0, 1.0, 1) == 4);
  CHECK_THROWS_AS(net_size_bound(1.0, 1e-30, 5), InvalidArgument);
  CHECK_THROWS_AS(net_size_bound(0.0, 0.1, 2), InvalidArgument);
  CHECK_THROWS_AS(net_size_bound(1.0, 0.1, 0), InvalidArgument);
}

TEST_CASE("nets on the unit disk respect the size bound") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto data = sample(RadialSpec::with_default_t(2), 800, s);
    for (double g : {0.05, 0.1, 0.3}) {
      const auto net = build_gamma_net(data.points, g);
      CHECK(net.size() <= net_size_bound(diameter(data.points), g, 2));
    }
  }
}

TEST_CASE("half-gamma ball lies inside the member's cell") {
  Rng rng(23);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto pool = cube(300, 3, 100 + s);
    const double g = 0.15;
    const auto members = net_points(build_gamma_net(pool, g), pool);
    Point x(3);
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (int k = 0; k < 100; ++k) {
        sample_unit_ball(rng, x);
        for (std::size_t j = 0; j < 3; ++j) x[j] = members[i][j] + 0.4999 * g * x[j];
        REQUIRE(nearest(x, members).index == i);
      }
    }
  }
}

TEST_CASE("monotone in gamma and idempotent") {
  const auto pool = cube(400, 2, 3);
  std::size_t prev = pool.size() + 1;
  for (double g : {0.02, 0.05, 0.1, 0.2, 0.4, 0.8}) {
    const auto net = build_gamma_net(pool, g);
    CHECK(net.size() <= prev);
    prev = net.size();
    const auto members = net_points(net, pool);
    CHECK(build_gamma_net(members, g).size() == members.size());
  }
}
