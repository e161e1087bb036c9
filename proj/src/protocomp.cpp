#include "optinet/protocomp.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <thread>

#include "optinet/error.hpp"
#include "optinet/simplex.hpp"

namespace optinet {

std::string_view to_string(NeighborKind kind) {
  switch (kind) {
    case NeighborKind::exact: return "exact";
    case NeighborKind::approximate: return "approximate";
    case NeighborKind::oracle: return "oracle";
  }
  return "unknown";
}

bool NeighborGraph::has_edge(std::size_t i, std::size_t j) const {
  const auto& row = adjacency.at(i);
  return std::binary_search(row.begin(), row.end(), j);
}

std::size_t NeighborGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& row : adjacency) n += row.size();
  return n;
}

bool NeighborGraph::symmetric() const {
  for (std::size_t i = 0; i < adjacency.size(); ++i)
    for (auto j : adjacency[i])
      if (!has_edge(j, i)) return false;
  return true;
}

bool NeighborGraph::subset_of(const NeighborGraph& other) const {
  if (n_protos != other.n_protos) return false;
  for (std::size_t i = 0; i < adjacency.size(); ++i)
    for (auto j : adjacency[i])
      if (!other.has_edge(i, j)) return false;
  return true;
}

nlohmann::json graph_to_json(const NeighborGraph& graph) {
  return {{"kind", std::string(to_string(graph.kind))},
          {"n", graph.n_protos},
          {"adjacency", graph.adjacency}};
}

namespace {

NeighborGraph graph_from_pairs(std::size_t n, std::vector<std::uint64_t>& pairs,
                               NeighborKind kind) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  NeighborGraph g{n, std::vector<std::vector<std::size_t>>(n), kind};
  for (auto key : pairs) g.adjacency[key / n].push_back(key % n);
  return g;
}

void check_distinct(const PointSet& pts) {
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto lex_less = [&](std::size_t a, std::size_t b) {
    const auto pa = pts[a], pb = pts[b];
    return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
  };
  std::sort(order.begin(), order.end(), lex_less);
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto pa = pts[order[k - 1]], pb = pts[order[k]];
    if (std::equal(pa.begin(), pa.end(), pb.begin())) {
      const auto lo = std::min(order[k - 1], order[k]);
      const auto hi = std::max(order[k - 1], order[k]);
      throw GeometryError("duplicate prototypes at indices " + std::to_string(lo) +
                          " and " + std::to_string(hi));
    }
  }
}

// Centered at the centroid and scaled to unit diameter, so the slack
// tolerance means the same thing for every configuration.
PointSet normalized(const PointSet& pts) {
  const std::size_t d = pts.dim();
  std::vector<double> centroid(d, 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t k = 0; k < d; ++k) centroid[k] += pts[i][k];
  for (auto& c : centroid) c /= static_cast<double>(pts.size());
  const double diam = diameter(pts);
  const double scale = diam > 0.0 ? 1.0 / diam : 1.0;
  std::vector<double> coords(pts.coords().size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t k = 0; k < d; ++k)
      coords[i * d + k] = (pts[i][k] - centroid[k]) * scale;
  return PointSet(d, std::move(coords));
}

constexpr double kSlackCap = 1.0;

// Orthonormal basis of the hyperplane orthogonal to w, from a Householder
// reflection mapping w onto a coordinate axis. Returns (d-1) rows of length d.
std::vector<double> orthogonal_basis(std::span<const double> w) {
  const std::size_t d = w.size();
  double norm = 0.0;
  for (double v : w) norm += v * v;
  norm = std::sqrt(norm);
  std::size_t pivot = 0;
  for (std::size_t k = 1; k < d; ++k)
    if (std::abs(w[k]) > std::abs(w[pivot])) pivot = k;
  std::vector<double> v(d);
  for (std::size_t k = 0; k < d; ++k) v[k] = w[k] / norm;
  v[pivot] += v[pivot] >= 0.0 ? 1.0 : -1.0;
  double vv = 0.0;
  for (double x : v) vv += x * x;
  // H = I - 2 v v^T / (v.v); columns other than `pivot` span w's complement.
  std::vector<double> basis;
  basis.reserve((d - 1) * d);
  for (std::size_t col = 0; col < d; ++col) {
    if (col == pivot) continue;
    for (std::size_t k = 0; k < d; ++k)
      basis.push_back((k == col ? 1.0 : 0.0) - 2.0 * v[k] * v[col] / vv);
  }
  return basis;
}

// Slack LP on an already-normalized configuration. Parametrizing the
// bisector as x = mid + B u removes the equality constraint; u is split into
// nonnegative parts and the slack is shifted so that the origin is feasible.
class PairLp {
 public:
  PairLp(const PointSet& pts, std::size_t i, std::size_t j, const ExactNeighborOptions& opts)
      : pts_(pts), i_(i), j_(j), opts_(opts), d_(pts.dim()), mid_(d_) {
    const auto pi = pts[i], pj = pts[j];
    std::vector<double> w(d_);
    for (std::size_t k = 0; k < d_; ++k) {
      mid_[k] = 0.5 * (pi[k] + pj[k]);
      w[k] = pj[k] - pi[k];
      const double t = mid_[k] - pi[k];
      mid_to_i_ += t * t;
    }
    if (d_ > 1) basis_ = orthogonal_basis(w);
  }

  // Max-min slack using only the constraints of prototypes in `use` (which
  // must exclude i and j). With `witness_ok`, a positive midpoint slack is
  // returned straight away; that shortcut is only sound for the full set.
  double slack(std::span<const std::size_t> use, bool stop_above_tol, bool witness_ok) const {
    if (use.empty()) return kSlackCap;
    std::vector<double> b(use.size());
    double min_b = kSlackCap;
    for (std::size_t r = 0; r < use.size(); ++r) {
      const double* pl = pts_[use[r]].data();
      double s = 0.0;
      for (std::size_t k = 0; k < d_; ++k) s += (mid_[k] - pl[k]) * (mid_[k] - pl[k]);
      b[r] = s - mid_to_i_;
      min_b = std::min(min_b, b[r]);
    }
    if (witness_ok && stop_above_tol && min_b > opts_.tol) return min_b;
    if (d_ == 1) return min_b;

    const std::size_t free_dims = d_ - 1;
    const std::size_t cols = 2 * free_dims + 1;
    const std::size_t rows = use.size() + 1;
    const double shift = min_b;
    const auto pi = pts_[i_];
    std::vector<double> a(rows * cols, 0.0), rhs(rows), c(cols, 0.0);
    for (std::size_t r = 0; r < use.size(); ++r) {
      const auto pl = pts_[use[r]];
      double* row = &a[r * cols];
      for (std::size_t q = 0; q < free_dims; ++q) {
        double dot = 0.0;
        for (std::size_t k = 0; k < d_; ++k) dot += basis_[q * d_ + k] * (pl[k] - pi[k]);
        row[q] = 2.0 * dot;
        row[free_dims + q] = -2.0 * dot;
      }
      row[cols - 1] = 1.0;
      rhs[r] = std::max(0.0, b[r] - shift);
    }
    a[(rows - 1) * cols + cols - 1] = 1.0;
    rhs[rows - 1] = kSlackCap - shift;
    c[cols - 1] = 1.0;

    const std::size_t limit =
        opts_.max_lp_iterations ? opts_.max_lp_iterations : 50 * (rows + cols);
    SimplexSolver lp(rows, cols, a, rhs, c);
    const double target = stop_above_tol ? opts_.tol - shift
                                         : std::numeric_limits<double>::infinity();
    const auto res = lp.solve(limit, target);
    switch (res.status) {
      case LpStatus::optimal:
      case LpStatus::target_reached:
        return shift + res.objective;
      case LpStatus::unbounded:
        return kSlackCap;
      case LpStatus::iteration_limit:
        break;
    }
    throw GeometryError("LP iteration limit reached for prototype pair (" +
                        std::to_string(i_) + ", " + std::to_string(j_) + ")");
  }

 private:
  const PointSet& pts_;
  std::size_t i_, j_;
  const ExactNeighborOptions& opts_;
  std::size_t d_;
  std::vector<double> mid_;
  double mid_to_i_ = 0.0;
  std::vector<double> basis_;
};

std::size_t local_size(std::size_t d) { return std::max<std::size_t>(16, 6 * d); }

// K nearest other prototypes of every prototype.
std::vector<std::vector<std::size_t>> local_neighbors(const PointSet& pts) {
  const std::size_t k = std::min(local_size(pts.dim()) + 1, pts.size());
  std::vector<std::vector<std::size_t>> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out[i] = k_nearest(pts[i], pts, k);
    out[i].erase(std::remove(out[i].begin(), out[i].end(), i), out[i].end());
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

// Slack of pair (i, j). When `stop_above_tol` is set the value is only
// meaningful through the comparison with tol. Dropping constraints can only
// raise the optimum, so a small LP over the endpoints' local neighbors that
// already stays at or below tol settles non-adjacency on its own.
double pair_slack(const PointSet& pts, std::size_t i, std::size_t j,
                  const ExactNeighborOptions& opts, bool stop_above_tol,
                  std::span<const std::size_t> local_i = {},
                  std::span<const std::size_t> local_j = {}) {
  const PairLp lp(pts, i, j, opts);
  const std::size_t n = pts.size();
  if (stop_above_tol && (!local_i.empty() || !local_j.empty())) {
    std::vector<std::size_t> local;
    local.reserve(local_i.size() + local_j.size());
    std::set_union(local_i.begin(), local_i.end(), local_j.begin(), local_j.end(),
                   std::back_inserter(local));
    local.erase(std::remove_if(local.begin(), local.end(),
                               [&](std::size_t l) { return l == i || l == j; }),
                local.end());
    if (local.size() + 2 < n) {
      const double relaxed = lp.slack(local, true, false);
      if (relaxed <= opts.tol) return relaxed;
    }
  }
  std::vector<std::size_t> all;
  all.reserve(n);
  for (std::size_t l = 0; l < n; ++l)
    if (l != i && l != j) all.push_back(l);
  return lp.slack(all, stop_above_tol, true);
}

}  // namespace

double bisector_slack(const PointSet& prototypes, std::size_t i, std::size_t j,
                      const ExactNeighborOptions& opts) {
  if (i >= prototypes.size() || j >= prototypes.size() || i == j)
    throw InvalidArgument("bisector_slack: bad prototype pair");
  if (squared_distance(prototypes[i], prototypes[j]) == 0.0)
    throw GeometryError("duplicate prototypes at indices " + std::to_string(std::min(i, j)) +
                        " and " + std::to_string(std::max(i, j)));
  return pair_slack(normalized(prototypes), i, j, opts, false);
}

NeighborGraph neighbors_exact(const PointSet& prototypes, const ExactNeighborOptions& opts) {
  const std::size_t n = prototypes.size();
  if (n < 2) throw InvalidArgument("neighbors_exact: need at least two prototypes");
  check_distinct(prototypes);
  const auto pts = normalized(prototypes);

  // Row i holds the j > i adjacent to i; each worker owns a stripe of rows.
  const auto local = local_neighbors(pts);
  std::vector<std::vector<std::size_t>> upper(n);
  auto work = [&](std::size_t start, std::size_t stride) {
    for (std::size_t i = start; i < n; i += stride)
      for (std::size_t j = i + 1; j < n; ++j)
        if (pair_slack(pts, i, j, opts, true, local[i], local[j]) > opts.tol)
          upper[i].push_back(j);
  };
  const std::size_t workers = std::clamp<std::size_t>(opts.workers, 1, n);
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w)
      threads.emplace_back([&, w] {
        try {
          work(w, workers);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : threads) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  NeighborGraph g{n, std::vector<std::vector<std::size_t>>(n), NeighborKind::exact};
  for (std::size_t i = 0; i < n; ++i)
    for (auto j : upper[i]) {
      g.adjacency[i].push_back(j);
      g.adjacency[j].push_back(i);
    }
  for (auto& row : g.adjacency) std::sort(row.begin(), row.end());
  return g;
}

std::vector<std::size_t> exact_neighbors_of(const PointSet& prototypes, std::size_t index,
                                            const ExactNeighborOptions& opts) {
  if (index >= prototypes.size()) throw InvalidArgument("exact_neighbors_of: index out of range");
  if (prototypes.size() < 2) return {};
  check_distinct(prototypes);
  const auto pts = normalized(prototypes);
  auto local = k_nearest(pts[index], pts, std::min(local_size(pts.dim()) + 1, pts.size()));
  local.erase(std::remove(local.begin(), local.end(), index), local.end());
  std::sort(local.begin(), local.end());
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (j == index) continue;
    if (pair_slack(pts, std::min(index, j), std::max(index, j), opts, true, local) > opts.tol)
      out.push_back(j);
  }
  return out;
}

RegionSampler box_sampler(Point lo, Point hi) {
  if (lo.size() != hi.size() || lo.empty())
    throw InvalidArgument("box_sampler: bounds must share a positive dimension");
  return [lo = std::move(lo), hi = std::move(hi)](Rng& rng, std::span<double> out) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = rng.uniform(lo[k], hi[k]);
  };
}

RegionSampler ball_sampler(std::size_t d, double radius) {
  if (d == 0 || !(radius > 0.0)) throw InvalidArgument("ball_sampler: bad parameters");
  return [d, radius](Rng& rng, std::span<double> out) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        out[k] = rng.normal();
        norm += out[k] * out[k];
      }
    } while (norm == 0.0);
    const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    const double f = r / std::sqrt(norm);
    for (std::size_t k = 0; k < d; ++k) out[k] *= f;
  };
}

NeighborGraph neighbors_montecarlo(const PointSet& prototypes, const RegionSampler& sampler,
                                   std::size_t n_samples, std::uint64_t seed) {
  const std::size_t n = prototypes.size();
  if (n < 2) throw InvalidArgument("neighbors_montecarlo: need at least two prototypes");
  if (n_samples < 1) throw InvalidArgument("neighbors_montecarlo: n_samples must be >= 1");
  Rng rng(seed);
  std::vector<double> x(prototypes.dim());
  std::vector<std::uint64_t> pairs;
  std::vector<char> seen(n * n, 0);
  for (std::size_t s = 0; s < n_samples; ++s) {
    sampler(rng, x);
    const auto two = two_nearest(x, prototypes);
    if (two.sq_first == two.sq_second) continue;
    const auto key = two.first * n + two.second;
    if (!seen[key]) {
      seen[key] = 1;
      pairs.push_back(key);
    }
  }
  return graph_from_pairs(n, pairs, NeighborKind::oracle);
}

NeighborGraph neighbors_approx(const PointSet& prototypes, const PointSet& train_points) {
  const std::size_t n = prototypes.size();
  if (n < 2) throw InvalidArgument("neighbors_approx: need at least two prototypes");
  std::vector<std::uint64_t> pairs;
  pairs.reserve(train_points.size());
  for (std::size_t t = 0; t < train_points.size(); ++t) {
    const auto two = two_nearest(train_points[t], prototypes);
    pairs.push_back(two.first * n + two.second);
  }
  return graph_from_pairs(n, pairs, NeighborKind::approximate);
}

namespace {

bool distinct_labels_present(std::span<const Label> labels) {
  return std::any_of(labels.begin(), labels.end(),
                     [&](Label l) { return l != labels.front(); });
}

bool neighbors_share_label(std::span<const Label> labels, Label own,
                           std::span<const std::size_t> nbrs) {
  return std::all_of(nbrs.begin(), nbrs.end(), [&](std::size_t q) { return labels[q] == own; });
}

void require_compressible(const PrototypeRule& rule) {
  if (!rule.is_nearest_prototype())
    throw InvalidArgument("compression needs a nearest-prototype rule (knn requires k = 1)");
  if (rule.size() == 0) throw InvalidArgument("compression: empty rule");
}

}  // namespace

std::vector<std::size_t> simultaneous_keep(std::span<const Label> labels,
                                           const NeighborGraph& graph) {
  if (graph.n_protos != labels.size() || graph.adjacency.size() != labels.size())
    throw InvalidArgument("simultaneous_keep: graph has " + std::to_string(graph.n_protos) +
                          " nodes for " + std::to_string(labels.size()) + " prototypes");
  if (labels.empty()) throw InvalidArgument("simultaneous_keep: no prototypes");
  if (labels.size() == 1 || !distinct_labels_present(labels)) return {0};
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (!neighbors_share_label(labels, labels[i], graph.adjacency[i])) keep.push_back(i);
  return keep;
}

PrototypeRule compress_simultaneous(const PrototypeRule& rule, const NeighborGraph& graph) {
  require_compressible(rule);
  return rule.subset(simultaneous_keep(rule.labels, graph));
}

NeighborFn exact_neighbor_fn(ExactNeighborOptions opts) {
  return [opts](const PointSet& current, std::size_t index) {
    return exact_neighbors_of(current, index, opts);
  };
}

NeighborFn approx_neighbor_fn(PointSet train_points) {
  return [train = std::move(train_points)](const PointSet& current, std::size_t index) {
    std::vector<std::size_t> out;
    if (current.size() < 2) return out;
    for (std::size_t t = 0; t < train.size(); ++t) {
      const auto two = two_nearest(train[t], current);
      if (two.first == index) out.push_back(two.second);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
}

NeighborFn graph_neighbor_fn(std::function<NeighborGraph(const PointSet&)> builder) {
  struct Cache {
    PointSet key;
    NeighborGraph graph;
    bool valid = false;
  };
  auto cache = std::make_shared<Cache>();
  return [builder = std::move(builder), cache](const PointSet& current, std::size_t index) {
    if (current.size() < 2) return std::vector<std::size_t>{};
    if (!cache->valid || !(cache->key == current)) {
      cache->graph = builder(current);
      cache->key = current;
      cache->valid = true;
    }
    return cache->graph.adjacency.at(index);
  };
}

std::vector<std::size_t> iterative_keep(const PointSet& prototypes,
                                        std::span<const Label> labels,
                                        const NeighborFn& neighbor_fn) {
  if (prototypes.size() != labels.size())
    throw InvalidArgument("iterative_keep: prototype/label count mismatch");
  if (labels.empty()) throw InvalidArgument("iterative_keep: no prototypes");
  std::vector<std::size_t> alive = identity_permutation(labels.size());
  PointSet current = prototypes;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    if (alive.size() == 1) break;
    const auto pos = static_cast<std::size_t>(
        std::lower_bound(alive.begin(), alive.end(), p) - alive.begin());
    const auto nbrs = neighbor_fn(current, pos);
    bool uniform = true;
    for (auto q : nbrs) {
      if (q >= alive.size()) throw InvalidArgument("neighbor_fn returned an index out of range");
      if (labels[alive[q]] != labels[p]) {
        uniform = false;
        break;
      }
    }
    if (uniform) {
      alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(pos));
      current = prototypes.subset(alive);
    }
  }
  return alive;
}

PrototypeRule compress_iterative(const PrototypeRule& rule, const NeighborFn& neighbor_fn) {
  require_compressible(rule);
  return rule.subset(iterative_keep(rule.prototypes, rule.labels, neighbor_fn));
}

std::vector<std::size_t> iterative_keep_approx(const PointSet& prototypes,
                                               std::span<const Label> labels,
                                               const PointSet& train_points) {
  const std::size_t m = prototypes.size();
  if (m != labels.size()) throw InvalidArgument("iterative_keep_approx: size mismatch");
  if (m == 0) throw InvalidArgument("iterative_keep_approx: no prototypes");
  if (m == 1) return {0};
  if (train_points.size() && train_points.dim() != prototypes.dim())
    throw InvalidArgument("iterative_keep_approx: dimension mismatch");

  const std::size_t d = prototypes.dim();
  const std::size_t n = train_points.size();
  std::vector<char> alive(m, 1);
  std::size_t alive_count = m;
  std::vector<std::size_t> first(n), second(n);
  // Lists may hold stale entries; readers re-check first/second.
  std::vector<std::vector<std::size_t>> in_cell(m), as_second(m);

  // Scanning alive prototypes in index order with strict comparisons gives
  // the same (distance, index) ranking as two_nearest on the compacted set.
  auto rank = [&](std::size_t t) {
    const double* x = train_points[t].data();
    constexpr double inf = std::numeric_limits<double>::infinity();
    double s1 = inf, s2 = inf;
    std::size_t f = 0, s = 0;
    for (std::size_t p = 0; p < m; ++p) {
      if (!alive[p]) continue;
      const double* q = prototypes[p].data();
      double v = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = x[k] - q[k];
        v += diff * diff;
      }
      if (v < s1) {
        s2 = s1;
        s = f;
        s1 = v;
        f = p;
      } else if (v < s2) {
        s2 = v;
        s = p;
      }
    }
    first[t] = f;
    second[t] = s;
    in_cell[f].push_back(t);
    as_second[s].push_back(t);
  };
  for (std::size_t t = 0; t < n; ++t) rank(t);

  std::vector<std::size_t> affected;
  for (std::size_t p = 0; p < m; ++p) {
    if (alive_count == 1) break;
    bool uniform = true;
    for (auto t : in_cell[p]) {
      if (first[t] != p) continue;
      if (labels[second[t]] != labels[p]) {
        uniform = false;
        break;
      }
    }
    if (!uniform) continue;
    alive[p] = 0;
    --alive_count;
    if (alive_count == 1) break;
    affected.clear();
    for (auto t : in_cell[p])
      if (first[t] == p) affected.push_back(t);
    for (auto t : as_second[p])
      if (second[t] == p) affected.push_back(t);
    std::sort(affected.begin(), affected.end());
    affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
    in_cell[p].clear();
    as_second[p].clear();
    for (auto t : affected) rank(t);
  }

  std::vector<std::size_t> keep;
  for (std::size_t p = 0; p < m; ++p)
    if (alive[p]) keep.push_back(p);
  return keep;
}

PrototypeRule compress_iterative_approx(const PrototypeRule& rule, const PointSet& train_points) {
  require_compressible(rule);
  return rule.subset(iterative_keep_approx(rule.prototypes, rule.labels, train_points));
}

namespace {

struct Decision {
  Label label = 0;
  bool near_bisector = false;
};

Decision decide(const PrototypeRule& rule, PointView x, double margin) {
  if (!rule.is_nearest_prototype() || rule.size() < 2) return {classify(rule, x), false};
  const auto two = two_nearest(x, rule.prototypes);
  const double sep = distance(rule.prototypes[two.first], rule.prototypes[two.second]);
  // Distance from x to the bisector of its two nearest prototypes.
  const double gap = sep > 0.0 ? (two.sq_second - two.sq_first) / (2.0 * sep)
                               : std::numeric_limits<double>::infinity();
  return {rule.labels[two.first], gap < margin};
}

}  // namespace

Agreement agreement_rate(const PrototypeRule& a, const PrototypeRule& b,
                         const PointSet& queries, double bisector_margin) {
  if (a.dim() != b.dim() || (queries.size() && queries.dim() != a.dim()))
    throw InvalidArgument("agreement_rate: dimension mismatch");
  if (bisector_margin < 0.0) throw InvalidArgument("agreement_rate: negative margin");
  Agreement out;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto da = decide(a, queries[q], bisector_margin);
    const auto db = decide(b, queries[q], bisector_margin);
    if (da.near_bisector || db.near_bisector) {
      ++out.excluded;
      continue;
    }
    ++out.compared;
    if (da.label == db.label) ++out.agreed;
  }
  out.rate = out.compared ? static_cast<double>(out.agreed) / static_cast<double>(out.compared)
                          : 1.0;
  return out;
}

}  // namespace optinet
