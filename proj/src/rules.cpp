#include "optinet/rules.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "optinet/error.hpp"
#include "optinet/netting.hpp"
#include "optinet/random.hpp"

namespace optinet {

std::string_view to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::optinet: return "optinet";
    case RuleKind::protonn: return "protonn";
    case RuleKind::protoknn: return "protoknn";
    case RuleKind::knn: return "knn";
  }
  return "unknown";
}

RuleKind parse_rule_kind(std::string_view name) {
  if (name == "optinet") return RuleKind::optinet;
  if (name == "protonn") return RuleKind::protonn;
  if (name == "protoknn") return RuleKind::protoknn;
  if (name == "knn") return RuleKind::knn;
  throw InvalidArgument("unknown rule kind '" + std::string(name) + "'");
}

bool PrototypeRule::empty_cell(std::size_t i) const {
  const auto v = votes(i);
  return std::all_of(v.begin(), v.end(), [](auto c) { return c == 0; });
}

std::size_t PrototypeRule::empty_cell_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < size(); ++i) n += empty_cell(i) ? 1 : 0;
  return n;
}

void PrototypeRule::validate() const {
  if (num_classes <= 0) throw DataError("rule: class count must be positive");
  if (labels.empty()) throw DataError("rule: no prototypes");
  if (prototypes.size() != labels.size())
    throw DataError("rule: prototype/label count mismatch");
  if (counts.size() != labels.size() * static_cast<std::size_t>(num_classes))
    throw DataError("rule: counts must be prototypes x classes");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw DataError("rule: label out of range at prototype " + std::to_string(i));
    const auto maj = majority_label(votes(i));
    if (!maj.empty && maj.label != labels[i])
      throw DataError("rule: label of prototype " + std::to_string(i) +
                      " is not the majority of its counts");
  }
  if (kind == RuleKind::knn || kind == RuleKind::protoknn) {
    if (!k || *k < 1) throw DataError("rule: k required for " + std::string(to_string(kind)));
  }
  if (kind == RuleKind::knn && *k > size())
    throw DataError("rule: k exceeds stored training set");
  if (kind == RuleKind::optinet && (!gamma || !(*gamma > 0.0)))
    throw DataError("rule: optinet needs a positive gamma");
}

PrototypeRule PrototypeRule::subset(std::span<const std::size_t> indices) const {
  PrototypeRule out = *this;
  out.prototypes = prototypes.subset(indices);
  out.labels.clear();
  out.counts.clear();
  for (auto i : indices) {
    out.labels.push_back(labels.at(i));
    const auto v = votes(i);
    out.counts.insert(out.counts.end(), v.begin(), v.end());
  }
  return out;
}

Majority majority_label(std::span<const std::uint64_t> votes) {
  if (votes.empty()) throw InvalidArgument("majority_label: zero classes");
  std::size_t best = 0;
  for (std::size_t j = 1; j < votes.size(); ++j)
    if (votes[j] > votes[best]) best = j;
  return {static_cast<Label>(best), votes[best] == 0};
}

namespace {

void require_train(const LabeledDataset& train, const char* what) {
  if (train.empty()) throw InvalidArgument(std::string(what) + ": empty training set");
  train.validate();
}

void label_from_counts(PrototypeRule& rule) {
  rule.labels.resize(rule.prototypes.size());
  for (std::size_t i = 0; i < rule.labels.size(); ++i)
    rule.labels[i] = majority_label(rule.votes(i)).label;
}

// Each training sample votes for the prototype whose Voronoi cell holds it.
void cell_votes(PrototypeRule& rule, const LabeledDataset& train) {
  const auto M = static_cast<std::size_t>(train.num_classes);
  rule.counts.assign(rule.prototypes.size() * M, 0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto cell = nearest(train.points[i], rule.prototypes).index;
    ++rule.counts[cell * M + static_cast<std::size_t>(train.labels[i])];
  }
  label_from_counts(rule);
}

}  // namespace

PointSet default_pool(const LabeledDataset& train, std::size_t pool_size,
                      std::uint64_t seed) {
  if (train.empty()) throw InvalidArgument("default_pool: empty training set");
  Rng rng(seed);
  auto order = random_permutation(train.size(), rng);
  if (pool_size != 0 && pool_size < order.size()) order.resize(pool_size);
  return train.points.subset(order);
}

PrototypeRule fit_optinet(const LabeledDataset& train, const PointSet& pool,
                          double gamma, std::uint64_t seed) {
  require_train(train, "fit_optinet");
  if (pool.empty()) throw InvalidArgument("fit_optinet: empty pool");
  if (pool.dim() != train.dim())
    throw InvalidArgument("fit_optinet: pool dimension differs from training data");
  const auto net = build_gamma_net(pool, gamma);

  PrototypeRule rule;
  rule.kind = RuleKind::optinet;
  rule.num_classes = train.num_classes;
  rule.prototypes = net_points(net, pool);
  rule.gamma = gamma;
  rule.m = pool.size();
  rule.seed = seed;
  cell_votes(rule, train);
  return rule;
}

PrototypeRule fit_protonn(const LabeledDataset& train, std::size_t m,
                          std::uint64_t seed) {
  require_train(train, "fit_protonn");
  if (m < 1 || m > train.size())
    throw InvalidArgument("fit_protonn: m=" + std::to_string(m) + " outside [1, " +
                          std::to_string(train.size()) + "]");
  Rng rng(seed);
  const auto drawn = sample_without_replacement(train.size(), m, rng);

  PrototypeRule rule;
  rule.kind = RuleKind::protonn;
  rule.num_classes = train.num_classes;
  rule.prototypes = train.points.subset(drawn);
  rule.m = m;
  rule.seed = seed;
  cell_votes(rule, train);
  return rule;
}

PrototypeRule fit_protoknn(const LabeledDataset& train, std::size_t m,
                           std::size_t k, std::uint64_t seed) {
  require_train(train, "fit_protoknn");
  if (m < 1 || m > train.size())
    throw InvalidArgument("fit_protoknn: m=" + std::to_string(m) + " outside [1, " +
                          std::to_string(train.size()) + "]");
  if (k < 1 || k > train.size())
    throw InvalidArgument("fit_protoknn: k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(train.size()) + "]");
  Rng rng(seed);
  const auto drawn = sample_without_replacement(train.size(), m, rng);

  PrototypeRule rule;
  rule.kind = RuleKind::protoknn;
  rule.num_classes = train.num_classes;
  rule.prototypes = train.points.subset(drawn);
  rule.k = k;
  rule.m = m;
  rule.seed = seed;
  const auto M = static_cast<std::size_t>(train.num_classes);
  rule.counts.assign(m * M, 0);
  for (std::size_t l = 0; l < m; ++l) {
    for (auto i : k_nearest(rule.prototypes[l], train.points, k))
      ++rule.counts[l * M + static_cast<std::size_t>(train.labels[i])];
  }
  label_from_counts(rule);
  return rule;
}

PrototypeRule fit_knn(const LabeledDataset& train, std::size_t k) {
  require_train(train, "fit_knn");
  if (k < 1 || k > train.size())
    throw InvalidArgument("fit_knn: k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(train.size()) + "]");
  PrototypeRule rule;
  rule.kind = RuleKind::knn;
  rule.num_classes = train.num_classes;
  rule.prototypes = train.points;
  rule.labels = train.labels;
  rule.k = k;
  rule.m = train.size();
  const auto M = static_cast<std::size_t>(train.num_classes);
  rule.counts.assign(train.size() * M, 0);
  for (std::size_t i = 0; i < train.size(); ++i)
    rule.counts[i * M + static_cast<std::size_t>(train.labels[i])] = 1;
  return rule;
}

std::size_t protoknn_default_m(std::size_t n, std::size_t k) {
  if (k == 0) throw InvalidArgument("protoknn_default_m: k must be positive");
  return std::max<std::size_t>(1, n / k);
}

Label classify(const PrototypeRule& rule, PointView x) {
  if (x.size() != rule.dim())
    throw InvalidArgument("classify: dimension " + std::to_string(x.size()) +
                          " != rule dimension " + std::to_string(rule.dim()));
  if (rule.is_nearest_prototype()) return rule.labels[nearest(x, rule.prototypes).index];
  std::vector<std::uint64_t> votes(static_cast<std::size_t>(rule.num_classes), 0);
  for (auto i : k_nearest(x, rule.prototypes, *rule.k))
    ++votes[static_cast<std::size_t>(rule.labels[i])];
  return majority_label(votes).label;
}

std::vector<Label> classify_batch(const PrototypeRule& rule, const PointSet& xs,
                                  unsigned workers) {
  std::vector<Label> out(xs.size());
  if (xs.empty()) return out;
  if (xs.dim() != rule.dim())
    throw InvalidArgument("classify_batch: dimension mismatch");
  const std::size_t chunks = std::clamp<std::size_t>(workers, 1, xs.size());
  auto run = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) out[i] = classify(rule, xs[i]);
  };
  if (chunks == 1) {
    run(0, xs.size());
    return out;
  }
  std::vector<std::thread> threads;
  const std::size_t step = (xs.size() + chunks - 1) / chunks;
  for (std::size_t lo = 0; lo < xs.size(); lo += step)
    threads.emplace_back(run, lo, std::min(xs.size(), lo + step));
  for (auto& t : threads) t.join();
  return out;
}

Label knn_classify(const LabeledDataset& train, std::size_t k, PointView x) {
  if (train.empty()) throw InvalidArgument("knn_classify: empty training set");
  if (k < 1 || k > train.size())
    throw InvalidArgument("knn_classify: k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(train.size()) + "]");
  std::vector<std::uint64_t> votes(static_cast<std::size_t>(train.num_classes), 0);
  for (auto i : k_nearest(x, train.points, k))
    ++votes[static_cast<std::size_t>(train.labels[i])];
  return majority_label(votes).label;
}

void Schedule::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("schedule: beta must be in (0, 1]");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw InvalidArgument("schedule: alpha must be positive");
  if (d < 1) throw InvalidArgument("schedule: d must be >= 1");
}

double gamma_schedule(std::size_t n, const Schedule& s) {
  s.validate();
  if (n < 1) throw InvalidArgument("gamma_schedule: n must be >= 1");
  return std::pow(static_cast<double>(n), -1.0 / (2.0 * s.beta + s.d));
}

std::size_t m_schedule(std::size_t n, const Schedule& s) {
  const double g = gamma_schedule(n, s);
  const double value = std::log(std::pow(g, -s.beta * (1.0 + s.alpha))) / std::pow(g, s.d);
  const double up = std::ceil(value);
  if (!(up >= 1.0)) return 1;
  if (up >= static_cast<double>(n)) return n;
  return static_cast<std::size_t>(up);
}

}  // namespace optinet
