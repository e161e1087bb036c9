#include "optinet/netting.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "optinet/error.hpp"

namespace optinet {

GammaNet build_gamma_net(const PointSet& pool, double gamma) {
  if (pool.empty()) throw InvalidArgument("build_gamma_net: empty pool");
  if (!std::isfinite(gamma) || gamma <= 0.0)
    throw InvalidArgument("build_gamma_net: gamma must be finite and positive");

  GammaNet net;
  net.gamma = gamma;
  net.source_size = pool.size();
  const double gamma_sq = gamma * gamma;
  const std::size_t d = pool.dim();
  // Member coordinates kept contiguous for the inner scan.
  std::vector<double> members;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double* p = pool[i].data();
    bool far = true;
    for (std::size_t off = 0; off < members.size(); off += d) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = p[k] - members[off + k];
        s += diff * diff;
      }
      if (s < gamma_sq) {
        far = false;
        break;
      }
    }
    if (far) {
      net.member_indices.push_back(i);
      members.insert(members.end(), p, p + d);
    }
  }
  return net;
}

PointSet net_points(const GammaNet& net, const PointSet& pool) {
  return pool.subset(net.member_indices);
}

bool verify_packing(const GammaNet& net, const PointSet& pool) {
  const double gamma_sq = net.gamma * net.gamma;
  const auto& idx = net.member_indices;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    if (idx[a] >= pool.size()) return false;
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      if (idx[b] >= pool.size()) return false;
      if (squared_distance(pool[idx[a]], pool[idx[b]]) < gamma_sq) return false;
    }
  }
  return true;
}

bool verify_covering(const GammaNet& net, const PointSet& pool) {
  if (net.member_indices.empty()) return pool.empty();
  const double gamma_sq = net.gamma * net.gamma;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    bool covered = false;
    for (auto m : net.member_indices) {
      if (m < pool.size() && squared_distance(pool[i], pool[m]) < gamma_sq) {
        covered = true;
        break;
      }
    }
    if (!covered) return false;
  }
  return true;
}

std::uint64_t net_size_bound(double diameter, double gamma, int d) {
  if (!(diameter > 0.0) || !(gamma > 0.0) || d < 1 || !std::isfinite(diameter) ||
      !std::isfinite(gamma))
    throw InvalidArgument("net_size_bound: arguments must be positive and finite");
  const double bound = std::ceil(std::pow(2.0 * diameter / gamma, d));
  // 2^63 is the first double that does not fit a signed 64-bit count.
  if (!std::isfinite(bound) || bound >= 9.2233720368547758e18)
    throw InvalidArgument("net_size_bound: bound overflows a 64-bit count (d=" +
                          std::to_string(d) + ")");
  return static_cast<std::uint64_t>(bound);
}

}  // namespace optinet
