#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace optinet {

/// Class label, zero-based: 0 <= label < num_classes.
using Label = std::int32_t;

/// Non-owning view of one point's coordinates.
using PointView = std::span<const double>;

/// Owning single point.
using Point = std::vector<double>;

/// Ordered set of points of a common dimension, stored row-major.
///
/// Index order is part of the contract: nearest-neighbor ties resolve to the
/// smaller index and greedy netting follows it.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim);
  /// Takes ownership of row-major coordinates; size must be a multiple of dim.
  PointSet(std::size_t dim, std::vector<double> coords);

  static PointSet from_rows(const std::vector<Point>& rows);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const { return coords_.empty(); }

  PointView operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }

  void push_back(PointView p);
  void reserve(std::size_t n) { coords_.reserve(n * dim_); }

  /// New set holding the points at `indices`, in that order.
  PointSet subset(std::span<const std::size_t> indices) const;

  const std::vector<double>& coords() const { return coords_; }

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

/// Points paired with labels. Sample i is (points[i], labels[i]).
struct LabeledDataset {
  PointSet points;
  std::vector<Label> labels;
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return points.dim(); }
  bool empty() const { return labels.empty(); }

  /// Throws DataError when sizes, dimensions or label ranges disagree.
  void validate() const;

  LabeledDataset subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

double squared_distance(PointView a, PointView b);

/// Euclidean distance. Throws InvalidArgument on a dimension mismatch.
double distance(PointView a, PointView b);

struct Neighbor {
  std::size_t index = 0;
  double dist = 0.0;
};

/// Nearest prototype under the (distance, index) order: among exact ties the
/// smallest index wins. Ties are exact comparisons of squared distances.
Neighbor nearest(PointView query, const PointSet& prototypes);

/// The first k indices of the (distance, index) order.
std::vector<std::size_t> k_nearest(PointView query, const PointSet& points,
                                   std::size_t k);

/// Index of the second element in the (distance, index) order.
std::size_t second_nearest(PointView query, const PointSet& prototypes);

/// First and second neighbors in one scan, with their squared distances.
struct TwoNearest {
  std::size_t first = 0;
  std::size_t second = 0;
  double sq_first = 0.0;
  double sq_second = 0.0;
};
TwoNearest two_nearest(PointView query, const PointSet& prototypes);

/// Largest pairwise distance, by exhaustive scan.
double diameter(const PointSet& points);

bool all_finite(PointView p);

}  // namespace optinet
