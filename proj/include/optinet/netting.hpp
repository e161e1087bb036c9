#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "optinet/core.hpp"

namespace optinet {

/// A maximal gamma-packing of a point pool, identified by indices into the pool.
struct GammaNet {
  double gamma = 0.0;
  std::vector<std::size_t> member_indices;  // strictly increasing
  std::size_t source_size = 0;

  std::size_t size() const { return member_indices.size(); }
};

/// Greedy pass in index order: point i joins iff its distance to every member
/// accepted so far is >= gamma. The result is maximal, hence a gamma-net.
GammaNet build_gamma_net(const PointSet& pool, double gamma);

/// The members as a point set, in member order.
PointSet net_points(const GammaNet& net, const PointSet& pool);

/// All member pairs at distance >= gamma.
bool verify_packing(const GammaNet& net, const PointSet& pool);

/// Every pool point strictly within gamma of some member.
bool verify_covering(const GammaNet& net, const PointSet& pool);

/// ceil((2 * diameter / gamma)^d): upper bound on the size of any gamma-net
/// of a set with the given diameter.
std::uint64_t net_size_bound(double diameter, double gamma, int d);

}  // namespace optinet
