#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "optinet/core.hpp"

namespace optinet {

enum class RuleKind { optinet, protonn, protoknn, knn };

std::string_view to_string(RuleKind kind);
/// Throws InvalidArgument for an unknown name.
RuleKind parse_rule_kind(std::string_view name);

/// A fitted nearest-prototype classifier: prototypes, their labels, and the
/// per-class vote counts the labels were derived from.
///
/// For RuleKind::knn the prototypes are the whole training set and `k` is the
/// vote size; k = 1 makes it the plain 1-NN rule.
struct PrototypeRule {
  RuleKind kind = RuleKind::optinet;
  PointSet prototypes;
  std::vector<Label> labels;
  /// Row-major, size() x num_classes.
  std::vector<std::uint64_t> counts;
  int num_classes = 0;

  std::optional<double> gamma;     // optinet
  std::optional<std::size_t> k;    // protoknn, knn
  std::size_t m = 0;               // pool size (optinet), draw count, or n (knn)
  std::uint64_t seed = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return prototypes.dim(); }

  std::span<const std::uint64_t> votes(std::size_t i) const {
    return {counts.data() + i * static_cast<std::size_t>(num_classes),
            static_cast<std::size_t>(num_classes)};
  }

  /// Prototype i received no votes (its label is the class-0 fallback).
  bool empty_cell(std::size_t i) const;
  std::size_t empty_cell_count() const;

  /// True when classification is by the single nearest prototype.
  bool is_nearest_prototype() const { return kind != RuleKind::knn || k.value_or(1) == 1; }

  /// Throws DataError on inconsistent sizes, labels or counts.
  void validate() const;

  /// Rule restricted to the prototypes at `indices` (labels and counts kept).
  PrototypeRule subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const PrototypeRule&, const PrototypeRule&) = default;
};

struct Majority {
  Label label = 0;
  bool empty = false;  // all votes were zero
};

/// Smallest class index achieving the maximum count. All-zero votes give
/// class 0 with `empty` set.
Majority majority_label(std::span<const std::uint64_t> votes);

/// The training instances shuffled by `seed`, truncated to `pool_size`
/// (0 means all). Labels are ignored.
PointSet default_pool(const LabeledDataset& train, std::size_t pool_size,
                      std::uint64_t seed);

/// Prototypes are the greedy gamma-net of `pool`; each training sample votes
/// for its nearest prototype with its own label.
PrototypeRule fit_optinet(const LabeledDataset& train, const PointSet& pool,
                          double gamma, std::uint64_t seed = 0);

/// m training instances drawn without replacement; Voronoi-cell votes.
PrototypeRule fit_protonn(const LabeledDataset& train, std::size_t m,
                          std::uint64_t seed);

/// m training instances drawn without replacement; each labeled by the vote
/// of its k nearest training samples.
PrototypeRule fit_protoknn(const LabeledDataset& train, std::size_t m,
                           std::size_t k, std::uint64_t seed);

/// Stores the full training set; classifies by k-NN majority.
PrototypeRule fit_knn(const LabeledDataset& train, std::size_t k);

/// Proto-kNN's default draw count, max(1, floor(n / k)).
std::size_t protoknn_default_m(std::size_t n, std::size_t k);

Label classify(const PrototypeRule& rule, PointView x);

/// Classifies every point; `workers` > 1 splits the batch into contiguous
/// chunks on separate threads. Output order matches input order.
std::vector<Label> classify_batch(const PrototypeRule& rule, const PointSet& xs,
                                  unsigned workers = 1);

Label knn_classify(const LabeledDataset& train, std::size_t k, PointView x);

/// Smoothness, margin and dimension parameters driving the schedules.
struct Schedule {
  double beta = 1.0;   // Hoelder exponent, in (0, 1]
  double alpha = 1.0;  // Tsybakov exponent, > 0
  int d = 1;

  void validate() const;
};

/// n^(-1 / (2 beta + d)).
double gamma_schedule(std::size_t n, const Schedule& s);

/// ceil(log(gamma_n^(-beta (1 + alpha))) / gamma_n^d), clamped into [1, n].
std::size_t m_schedule(std::size_t n, const Schedule& s);

}  // namespace optinet
