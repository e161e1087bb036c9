#include "optinet/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "optinet/error.hpp"

namespace optinet {

PointSet::PointSet(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw InvalidArgument("PointSet: dimension must be positive");
}

PointSet::PointSet(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim == 0) throw InvalidArgument("PointSet: dimension must be positive");
  if (coords_.size() % dim != 0)
    throw InvalidArgument("PointSet: coordinate count is not a multiple of dim");
  if (!all_finite(coords_))
    throw DataError("PointSet: non-finite coordinate");
}

PointSet PointSet::from_rows(const std::vector<Point>& rows) {
  if (rows.empty()) throw InvalidArgument("PointSet::from_rows: no rows");
  PointSet out(rows.front().size());
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r);
  return out;
}

void PointSet::push_back(PointView p) {
  if (p.size() != dim_)
    throw InvalidArgument("PointSet::push_back: expected dimension " +
                          std::to_string(dim_) + ", got " +
                          std::to_string(p.size()));
  if (!all_finite(p)) throw DataError("PointSet::push_back: non-finite coordinate");
  coords_.insert(coords_.end(), p.begin(), p.end());
}

PointSet PointSet::subset(std::span<const std::size_t> indices) const {
  PointSet out(dim_);
  out.coords_.reserve(indices.size() * dim_);
  for (auto i : indices) {
    if (i >= size()) throw InvalidArgument("PointSet::subset: index out of range");
    const auto row = (*this)[i];
    out.coords_.insert(out.coords_.end(), row.begin(), row.end());
  }
  return out;
}

void LabeledDataset::validate() const {
  if (points.size() != labels.size())
    throw DataError("dataset: " + std::to_string(points.size()) +
                    " points but " + std::to_string(labels.size()) + " labels");
  if (num_classes <= 0) throw DataError("dataset: class count must be positive");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw DataError("dataset: label " + std::to_string(labels[i]) +
                      " at index " + std::to_string(i) + " outside [0, " +
                      std::to_string(num_classes) + ")");
  }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.points = points.subset(indices);
  out.labels.reserve(indices.size());
  for (auto i : indices) out.labels.push_back(labels.at(i));
  out.num_classes = num_classes;
  return out;
}

bool all_finite(PointView p) {
  return std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); });
}

double squared_distance(PointView a, PointView b) {
  if (a.size() != b.size())
    throw InvalidArgument("distance: dimension mismatch (" +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

double distance(PointView a, PointView b) {
  return std::sqrt(squared_distance(a, b));
}

namespace {

void check_query(PointView query, const PointSet& points, const char* what) {
  if (points.empty()) throw InvalidArgument(std::string(what) + ": empty point set");
  if (query.size() != points.dim())
    throw InvalidArgument(std::string(what) + ": query dimension " +
                          std::to_string(query.size()) + " != " +
                          std::to_string(points.dim()));
}

// Unchecked hot loop; callers validate dimensions once.
inline double sq_dist_raw(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

}  // namespace

Neighbor nearest(PointView query, const PointSet& prototypes) {
  check_query(query, prototypes, "nearest");
  const std::size_t d = prototypes.dim();
  const double* base = prototypes.coords().data();
  std::size_t best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, n = prototypes.size(); i < n; ++i) {
    const double s = sq_dist_raw(query.data(), base + i * d, d);
    if (s < best_sq) {  // strict: keeps the smaller index on exact ties
      best_sq = s;
      best = i;
    }
  }
  return {best, std::sqrt(best_sq)};
}

TwoNearest two_nearest(PointView query, const PointSet& prototypes) {
  check_query(query, prototypes, "two_nearest");
  if (prototypes.size() < 2)
    throw InvalidArgument("two_nearest: need at least two points");
  const std::size_t d = prototypes.dim();
  const double* base = prototypes.coords().data();
  constexpr double inf = std::numeric_limits<double>::infinity();
  TwoNearest r{0, 0, inf, inf};
  for (std::size_t i = 0, n = prototypes.size(); i < n; ++i) {
    const double s = sq_dist_raw(query.data(), base + i * d, d);
    if (s < r.sq_first) {
      r.second = r.first;
      r.sq_second = r.sq_first;
      r.first = i;
      r.sq_first = s;
    } else if (s < r.sq_second) {
      r.second = i;
      r.sq_second = s;
    }
  }
  return r;
}

std::vector<std::size_t> k_nearest(PointView query, const PointSet& points,
                                   std::size_t k) {
  check_query(query, points, "k_nearest");
  if (k < 1 || k > points.size())
    throw InvalidArgument("k_nearest: k=" + std::to_string(k) +
                          " outside [1, " + std::to_string(points.size()) + "]");
  const std::size_t d = points.dim();
  const double* base = points.coords().data();
  std::vector<std::pair<double, std::size_t>> keyed(points.size());
  for (std::size_t i = 0; i < keyed.size(); ++i)
    keyed[i] = {sq_dist_raw(query.data(), base + i * d, d), i};
  // pair's lexicographic order is exactly the (distance, index) order
  if (k < keyed.size())
    std::nth_element(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     keyed.end());
  std::sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = keyed[i].second;
  return out;
}

std::size_t second_nearest(PointView query, const PointSet& prototypes) {
  return two_nearest(query, prototypes).second;
}

double diameter(const PointSet& points) {
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      best = std::max(best, squared_distance(points[i], points[j]));
  return std::sqrt(best);
}

}  // namespace optinet
