#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "optinet/core.hpp"
#include "optinet/random.hpp"
#include "optinet/rules.hpp"

namespace optinet {

enum class NeighborKind { exact, approximate, oracle };

std::string_view to_string(NeighborKind kind);

/// Voronoi neighbor relation over prototype indices. adjacency[i] lists,
/// sorted and without duplicates, the prototypes recorded as neighbors of i.
/// Exact graphs are symmetric; approximate ones need not be.
struct NeighborGraph {
  std::size_t n_protos = 0;
  std::vector<std::vector<std::size_t>> adjacency;
  NeighborKind kind = NeighborKind::exact;

  bool has_edge(std::size_t i, std::size_t j) const;
  std::size_t edge_count() const;
  bool symmetric() const;
  /// Every directed edge of *this is also an edge of `other`.
  bool subset_of(const NeighborGraph& other) const;
};

nlohmann::json graph_to_json(const NeighborGraph& graph);

struct ExactNeighborOptions {
  /// Minimum slack, in squared units of the diameter-normalized configuration,
  /// for a bisector point to count as strictly closer to the pair.
  double tol = 1e-9;
  /// Per-LP pivot limit; 0 selects 50 * (constraints + variables).
  std::size_t max_lp_iterations = 0;
  unsigned workers = 1;
};

/// Largest slack eps such that some point x on the bisector of prototypes i
/// and j satisfies |x - p_i|^2 <= |x - p_l|^2 - eps for every other l,
/// computed on the diameter-normalized configuration and capped at 1.
double bisector_slack(const PointSet& prototypes, std::size_t i, std::size_t j,
                      const ExactNeighborOptions& opts = {});

/// Exact relation: i and j are neighbors iff their bisector holds a point
/// strictly closer to both than to any other prototype (slack > tol).
/// Throws GeometryError on duplicate prototypes or when an LP hits its
/// iteration limit; InvalidArgument for fewer than two prototypes.
NeighborGraph neighbors_exact(const PointSet& prototypes,
                              const ExactNeighborOptions& opts = {});

/// Exact neighbors of a single prototype.
std::vector<std::size_t> exact_neighbors_of(const PointSet& prototypes,
                                            std::size_t index,
                                            const ExactNeighborOptions& opts = {});

/// Writes one sample into the span.
using RegionSampler = std::function<void(Rng&, std::span<double>)>;

RegionSampler box_sampler(Point lo, Point hi);
RegionSampler ball_sampler(std::size_t d, double radius);

/// Dense-sampling oracle: records (first-NN, second-NN) for each sample.
/// Samples whose first and second squared distances are bit-equal are
/// discarded. For a fixed seed the sample stream is a prefix of any longer
/// run, so the graph grows monotonically with n_samples.
NeighborGraph neighbors_montecarlo(const PointSet& prototypes,
                                   const RegionSampler& sampler,
                                   std::size_t n_samples, std::uint64_t seed);

/// Training-sample relation: Q is a neighbor of X iff some training point
/// whose nearest prototype is X has Q as its second nearest.
NeighborGraph neighbors_approx(const PointSet& prototypes, const PointSet& train_points);

/// Indices kept by simultaneous removal: all of them minus every prototype
/// whose neighbors all share its label; {0} when fewer than two distinct
/// labels are present.
std::vector<std::size_t> simultaneous_keep(std::span<const Label> labels,
                                           const NeighborGraph& graph);

PrototypeRule compress_simultaneous(const PrototypeRule& rule, const NeighborGraph& graph);

/// Neighbors of `index` within `current`, as indices into `current`.
using NeighborFn =
    std::function<std::vector<std::size_t>(const PointSet& current, std::size_t index)>;

NeighborFn exact_neighbor_fn(ExactNeighborOptions opts = {});
NeighborFn approx_neighbor_fn(PointSet train_points);
/// Adapts a whole-graph builder; the graph is rebuilt whenever the current
/// set changes.
NeighborFn graph_neighbor_fn(std::function<NeighborGraph(const PointSet&)> builder);

/// Single pass in index order over the evolving set: stop once one prototype
/// remains, otherwise drop the current prototype when every neighbor in the
/// current set shares its label. Returns the kept original indices.
std::vector<std::size_t> iterative_keep(const PointSet& prototypes,
                                        std::span<const Label> labels,
                                        const NeighborFn& neighbor_fn);

PrototypeRule compress_iterative(const PrototypeRule& rule, const NeighborFn& neighbor_fn);

/// Same output as compress_iterative(rule, approx_neighbor_fn(train_points)),
/// but each removal only re-ranks the training points whose first or second
/// nearest prototype was removed.
PrototypeRule compress_iterative_approx(const PrototypeRule& rule,
                                        const PointSet& train_points);
std::vector<std::size_t> iterative_keep_approx(const PointSet& prototypes,
                                               std::span<const Label> labels,
                                               const PointSet& train_points);

struct Agreement {
  double rate = 1.0;        // agreed / compared; 1 when nothing was compared
  std::size_t agreed = 0;
  std::size_t compared = 0;
  std::size_t excluded = 0;
};

/// Fraction of queries classified identically by both rules. A query is
/// excluded when, for either nearest-prototype rule, it lies within
/// `bisector_margin` of the bisector between its two nearest prototypes.
Agreement agreement_rate(const PrototypeRule& a, const PrototypeRule& b,
                         const PointSet& queries, double bisector_margin);

}  // namespace optinet
