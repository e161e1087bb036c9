#include "optinet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <numeric>
#include <thread>

#include "optinet/dataset_io.hpp"
#include "optinet/error.hpp"
#include "optinet/netting.hpp"
#include "optinet/protocomp.hpp"
#include "optinet/random.hpp"

namespace optinet {

std::string_view to_string(CompressionMode mode) {
  switch (mode) {
    case CompressionMode::none: return "none";
    case CompressionMode::simultaneous_exact: return "simultaneous-exact";
    case CompressionMode::simultaneous_approx: return "simultaneous-approx";
    case CompressionMode::iterative_approx: return "iterative-approx";
  }
  return "unknown";
}

CompressionMode parse_compression_mode(std::string_view name) {
  for (auto m : {CompressionMode::none, CompressionMode::simultaneous_exact,
                 CompressionMode::simultaneous_approx, CompressionMode::iterative_approx})
    if (to_string(m) == name) return m;
  throw InvalidArgument("unknown compression mode '" + std::string(name) + "'");
}

PrototypeRule apply_compression(const PrototypeRule& rule, CompressionMode mode,
                                const PointSet& train_points) {
  if (mode == CompressionMode::none) return rule;
  if (rule.size() < 2) return rule;
  switch (mode) {
    case CompressionMode::simultaneous_exact:
      return compress_simultaneous(rule, neighbors_exact(rule.prototypes));
    case CompressionMode::simultaneous_approx:
      return compress_simultaneous(rule, neighbors_approx(rule.prototypes, train_points));
    case CompressionMode::iterative_approx:
      return compress_iterative_approx(rule, train_points);
    case CompressionMode::none:
      break;
  }
  return rule;
}

void ExperimentConfig::validate() const {
  if (rules.empty()) throw InvalidArgument("config: at least one rule kind required");
  schedule.validate();
  if (trials < 1) throw InvalidArgument("config: trials must be >= 1");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1]) throw InvalidArgument("config: n_grid must be strictly increasing");
  if (synthetic()) {
    if (n_grid.empty()) throw InvalidArgument("config: n_grid required for synthetic runs");
    if (test_size < 1) throw InvalidArgument("config: test_size must be >= 1");
    if (t && !(*t > 0.0 && *t < 1.0)) throw InvalidArgument("config: t must lie in (0, 1)");
  } else if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidArgument("config: test_fraction must lie in (0, 1)");
  }
  if (!n_grid.empty() && n_grid.front() < 1) throw InvalidArgument("config: n must be >= 1");
  if (k < 1) throw InvalidArgument("config: k must be >= 1");
  if (gamma && !(*gamma > 0.0)) throw InvalidArgument("config: gamma must be positive");
  if (workers < 1) throw InvalidArgument("config: workers must be >= 1");
  if (!(envelope_factor >= 0.0)) throw InvalidArgument("config: envelope_factor must be >= 0");
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json doc;
  auto rules = nlohmann::json::array();
  for (auto r : c.rules) rules.push_back(std::string(to_string(r)));
  doc["rules"] = rules;
  doc["schedule"] = {{"beta", c.schedule.beta}, {"alpha", c.schedule.alpha}, {"d", c.schedule.d}};
  doc["t"] = c.t ? nlohmann::json(*c.t) : nlohmann::json(nullptr);
  doc["n_grid"] = c.n_grid;
  doc["trials"] = c.trials;
  doc["test_size"] = c.test_size;
  doc["compression"] = std::string(to_string(c.compression));
  doc["master_seed"] = c.master_seed;
  doc["k"] = c.k;
  doc["gamma"] = c.gamma ? nlohmann::json(*c.gamma) : nlohmann::json(nullptr);
  doc["pool_size"] = c.pool_size ? nlohmann::json(*c.pool_size) : nlohmann::json(nullptr);
  doc["burn_in"] = c.burn_in;
  doc["envelope_factor"] = c.envelope_factor;
  doc["data_csv"] = c.data_csv ? nlohmann::json(*c.data_csv) : nlohmann::json(nullptr);
  doc["test_fraction"] = c.test_fraction;
  // workers is deliberately absent: it cannot change any result.
  return doc;
}

ExperimentConfig config_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw InvalidArgument("config: top level must be an object");
    static const char* known[] = {"rules", "schedule", "t", "n_grid", "trials", "test_size",
                                  "compression", "master_seed", "k", "gamma", "pool_size",
                                  "burn_in", "workers", "envelope_factor", "data_csv",
                                  "test_fraction"};
    for (const auto& [key, _] : doc.items())
      if (std::find(std::begin(known), std::end(known), key) == std::end(known))
        throw InvalidArgument("config: unknown key '" + key + "'");

    ExperimentConfig c;
    auto opt = [&](const char* key) -> const nlohmann::json* {
      const auto it = doc.find(key);
      return (it == doc.end() || it->is_null()) ? nullptr : &*it;
    };
    if (auto v = opt("rules")) {
      c.rules.clear();
      for (const auto& r : *v) c.rules.push_back(parse_rule_kind(r.get<std::string>()));
    }
    if (auto v = opt("schedule")) {
      c.schedule.beta = v->value("beta", 1.0);
      c.schedule.alpha = v->value("alpha", 1.0);
      c.schedule.d = v->value("d", 2);
    }
    if (auto v = opt("t")) c.t = v->get<double>();
    if (auto v = opt("n_grid")) c.n_grid = v->get<std::vector<std::size_t>>();
    if (auto v = opt("trials")) c.trials = v->get<std::size_t>();
    if (auto v = opt("test_size")) c.test_size = v->get<std::size_t>();
    if (auto v = opt("compression")) c.compression = parse_compression_mode(v->get<std::string>());
    if (auto v = opt("master_seed")) c.master_seed = v->get<std::uint64_t>();
    if (auto v = opt("k")) c.k = v->get<std::size_t>();
    if (auto v = opt("gamma")) c.gamma = v->get<double>();
    if (auto v = opt("pool_size")) c.pool_size = v->get<std::size_t>();
    if (auto v = opt("burn_in")) c.burn_in = v->get<std::size_t>();
    if (auto v = opt("workers")) c.workers = v->get<unsigned>();
    if (auto v = opt("envelope_factor")) c.envelope_factor = v->get<double>();
    if (auto v = opt("data_csv")) c.data_csv = v->get<std::string>();
    if (auto v = opt("test_fraction")) c.test_fraction = v->get<double>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

std::string config_hash(const ExperimentConfig& config) {
  const auto text = config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t trial_seed(const ExperimentConfig& config, std::size_t n, std::size_t trial) {
  return derive_seed(config.master_seed, {n, trial});
}

RadialSpec spec_for(const ExperimentConfig& config) {
  auto spec = RadialSpec::with_default_t(config.schedule.d);
  if (config.t) spec.t = *config.t;
  return spec;
}

double boundary_concentration(const PrototypeRule& rule, const RadialSpec& spec,
                              double envelope) {
  if (rule.size() == 0) throw InvalidArgument("boundary_concentration: empty rule");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    inside += delta(spec, rule.prototypes[i]) <= envelope ? 1 : 0;
  return static_cast<double>(inside) / static_cast<double>(rule.size());
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& data,
                                                double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InvalidArgument("split: test_fraction must lie in (0, 1)");
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(data.size())));
  if (n_test == 0 || n_test >= data.size())
    throw InvalidArgument("split: " + std::to_string(data.size()) +
                          " samples cannot be split with test fraction " +
                          std::to_string(test_fraction));
  Rng rng(seed);
  const auto order = random_permutation(data.size(), rng);
  const std::span<const std::size_t> all(order);
  auto test = data.subset(all.first(n_test));
  auto train = data.subset(all.subspan(n_test));
  return {std::move(train), std::move(test)};
}

SlopeFit fit_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InvalidArgument("fit_slope: xs and ys differ in length");
  if (xs.size() < 3) throw InvalidArgument("fit_slope: need at least three points");
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw InvalidArgument("fit_slope: values must be positive");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_slope: xs must not all be equal");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (intercept + slope * lx[i]);
    ssr += r * r;
  }
  return {slope, std::sqrt(ssr / static_cast<double>(n - 2) / sxx)};
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ns(Clock::time_point start) {
  const auto ns = std::chrono::duration<double, std::nano>(Clock::now() - start).count();
  return std::max(ns, 1.0);
}

struct TrialData {
  LabeledDataset train;
  LabeledDataset test;
};

TrialData make_data(const ExperimentConfig& config, const LabeledDataset* real,
                    std::size_t n, std::uint64_t seed) {
  if (config.synthetic()) {
    const auto spec = spec_for(config);
    return {sample(spec, n, derive_seed(seed, {1})),
            sample(spec, config.test_size, derive_seed(seed, {2}))};
  }
  auto [train, test] = split(*real, config.test_fraction, derive_seed(seed, {5}));
  if (n < train.size()) {
    const auto keep = identity_permutation(n);
    train = train.subset(keep);
  }
  return {std::move(train), std::move(test)};
}

std::size_t effective_n(const ExperimentConfig& config, const LabeledDataset* real,
                        std::size_t n) {
  if (config.synthetic() || n != 0) return n;
  const auto n_test = static_cast<std::size_t>(
      std::llround(config.test_fraction * static_cast<double>(real->size())));
  return real->size() - n_test;
}

TrialRecord run_trial_on(const ExperimentConfig& config, const LabeledDataset* real,
                         RuleKind kind, std::size_t n, std::size_t trial) {
  TrialRecord rec;
  rec.rule = kind;
  rec.trial = trial;
  rec.seed = trial_seed(config, n, trial);
  const auto data = make_data(config, real, effective_n(config, real, n), rec.seed);
  const auto& train = data.train;
  const auto& test = data.test;
  rec.n = train.size();
  rec.test_size = test.size();

  Schedule sched = config.schedule;
  if (!config.synthetic()) sched.d = static_cast<int>(train.dim());
  const double gamma = config.gamma ? *config.gamma : gamma_schedule(rec.n, sched);
  const std::size_t k = std::min(config.k, rec.n);

  auto start = Clock::now();
  PrototypeRule rule;
  switch (kind) {
    case RuleKind::optinet: {
      std::size_t pool = config.pool_size ? *config.pool_size : m_schedule(rec.n, sched);
      if (pool == 0 || pool > rec.n) pool = rec.n;
      rule = fit_optinet(train, default_pool(train, pool, derive_seed(rec.seed, {3})), gamma,
                         rec.seed);
      rec.gamma = gamma;
      rec.pool_size = pool;
      break;
    }
    case RuleKind::protonn:
      rule = fit_protonn(train, m_schedule(rec.n, sched), derive_seed(rec.seed, {4}));
      rec.pool_size = rule.m;
      break;
    case RuleKind::protoknn:
      rule = fit_protoknn(train, protoknn_default_m(rec.n, k), k, derive_seed(rec.seed, {4}));
      rec.pool_size = rule.m;
      break;
    case RuleKind::knn:
      rule = fit_knn(train, k);
      rec.pool_size = rec.n;
      break;
  }
  rec.fit_ms = elapsed_ns(start) / 1e6;
  rec.proto_count_before = rule.size();
  rec.empty_cell_count = rule.empty_cell_count();

  start = Clock::now();
  std::optional<PrototypeRule> compressed;
  if (config.compression != CompressionMode::none && rule.is_nearest_prototype())
    compressed = apply_compression(rule, config.compression, train.points);
  rec.compress_ms = compressed ? elapsed_ns(start) / 1e6 : 0.0;
  const PrototypeRule& final_rule = compressed ? *compressed : rule;
  rec.proto_count_after = final_rule.size();
  rec.compression_before = static_cast<double>(rec.proto_count_before) / static_cast<double>(rec.n);
  rec.compression_after = static_cast<double>(rec.proto_count_after) / static_cast<double>(rec.n);

  start = Clock::now();
  const auto predictions = classify_batch(final_rule, test.points);
  rec.query_ns_per_point = elapsed_ns(start) / static_cast<double>(test.size());

  std::size_t wrong = 0;
  for (std::size_t i = 0; i < test.size(); ++i) wrong += predictions[i] != test.labels[i] ? 1 : 0;
  rec.test_error = static_cast<double>(wrong) / static_cast<double>(test.size());

  if (compressed) {
    const auto agree = agreement_rate(rule, *compressed, test.points, 1e-9);
    rec.excluded_query_count = agree.excluded;
    rec.changed_predictions = agree.compared - agree.agreed;
  }

  if (config.synthetic()) {
    const auto spec = spec_for(config);
    const double bayes = bayes_error(spec);
    double excess = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto x = test.points[i];
      if (predictions[i] != bayes_label(spec, x)) excess += eta(spec, x);
    }
    const auto nt = static_cast<double>(test.size());
    rec.excess_error = excess / nt;
    rec.excess_error_raw = rec.test_error - bayes;
    rec.excess_error_raw_se = std::sqrt(rec.test_error * (1.0 - rec.test_error) / nt);
    if (final_rule.is_nearest_prototype() && kind != RuleKind::knn) {
      const double env = config.envelope_factor * gamma;
      rec.boundary_concentration_before = boundary_concentration(rule, spec, env);
      rec.boundary_concentration_after = boundary_concentration(final_rule, spec, env);
    }
  }
  return rec;
}

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

std::optional<SlopeFit> try_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  try {
    return fit_slope(xs, ys);
  } catch (const InvalidArgument&) {
    return std::nullopt;
  }
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& config, RuleKind rule, std::size_t n,
                      std::size_t trial) {
  config.validate();
  std::optional<LabeledDataset> real;
  if (!config.synthetic()) real = load_csv(*config.data_csv);
  return run_trial_on(config, real ? &*real : nullptr, rule, n, trial);
}

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  SweepResult result;
  result.config = config;
  result.config_hash = config_hash(config);
  std::optional<LabeledDataset> real;
  if (config.synthetic()) {
    result.bayes_error = bayes_error(spec_for(config));
  } else {
    real = load_csv(*config.data_csv);
  }

  struct Task {
    RuleKind rule;
    std::size_t n;
    std::size_t trial;
  };
  std::vector<Task> tasks;
  const std::vector<std::size_t> grid = config.n_grid.empty() ? std::vector<std::size_t>{0}
                                                              : config.n_grid;
  for (auto rule : config.rules)
    for (auto n : grid)
      for (std::size_t t = 0; t < config.trials; ++t) tasks.push_back({rule, n, t});

  result.records.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(config.workers);
  auto worker = [&](std::size_t w) {
    try {
      for (std::size_t i = next++; i < tasks.size(); i = next++)
        result.records[i] = run_trial_on(config, real ? &*real : nullptr, tasks[i].rule,
                                         tasks[i].n, tasks[i].trial);
    } catch (...) {
      errors[w] = std::current_exception();
      next = tasks.size();
    }
  };
  if (config.workers == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < config.workers; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  summarize(result);
  return result;
}

void summarize(SweepResult& result) {
  const auto& config = result.config;
  result.grid.clear();
  result.slopes.clear();

  // Records are grouped by rule, then n, then trial.
  std::map<std::pair<int, std::size_t>, std::vector<const TrialRecord*>> groups;
  for (const auto& r : result.records)
    groups[{static_cast<int>(r.rule), r.n}].push_back(&r);

  for (auto rule : config.rules) {
    std::vector<double> ns, excess, comp_before, comp_after, count_after, fit;
    bool excess_ok = true;
    std::map<std::size_t, std::vector<std::pair<double, const TrialRecord*>>> by_trial;
    for (const auto& [key, recs] : groups) {
      if (key.first != static_cast<int>(rule)) continue;
      GridSummary g;
      g.rule = rule;
      g.n = key.second;
      g.gamma = recs.front()->gamma;
      auto collect = [&](auto field) {
        std::vector<double> v;
        for (auto* r : recs) v.push_back(field(*r));
        return mean_std(v);
      };
      g.test_error = collect([](const TrialRecord& r) { return r.test_error; });
      if (recs.front()->excess_error)
        g.excess_error = collect([](const TrialRecord& r) { return r.excess_error.value_or(0.0); });
      g.compression_before = collect([](const TrialRecord& r) { return r.compression_before; });
      g.compression_after = collect([](const TrialRecord& r) { return r.compression_after; });
      g.count_before = collect([](const TrialRecord& r) { return double(r.proto_count_before); });
      g.count_after = collect([](const TrialRecord& r) { return double(r.proto_count_after); });
      if (recs.front()->boundary_concentration_before) {
        g.boundary_concentration_before = collect(
            [](const TrialRecord& r) { return r.boundary_concentration_before.value_or(0.0); });
        g.boundary_concentration_after = collect(
            [](const TrialRecord& r) { return r.boundary_concentration_after.value_or(0.0); });
      }
      g.fit_ms = collect([](const TrialRecord& r) { return r.fit_ms; });
      result.grid.push_back(g);
      for (auto* r : recs) by_trial[r->trial].push_back({double(key.second), r});
    }

    // Burn-in: drop the smallest grid points before fitting.
    std::vector<const GridSummary*> fit_points;
    for (const auto& g : result.grid)
      if (g.rule == rule) fit_points.push_back(&g);
    const std::size_t skip = std::min(config.burn_in, fit_points.size());
    for (std::size_t i = skip; i < fit_points.size(); ++i) {
      const auto& g = *fit_points[i];
      ns.push_back(static_cast<double>(g.n));
      if (g.excess_error) excess.push_back(g.excess_error->mean);
      else excess_ok = false;
      comp_before.push_back(g.compression_before.mean);
      comp_after.push_back(g.compression_after.mean);
      count_after.push_back(g.count_after.mean);
      fit.push_back(g.fit_ms.mean);
    }
    RuleSlopes s;
    s.rule = rule;
    if (excess_ok) s.excess_error = try_fit(ns, excess);
    s.compression_before = try_fit(ns, comp_before);
    s.compression_after = try_fit(ns, comp_after);
    s.count_after = try_fit(ns, count_after);
    s.fit_ms = try_fit(ns, fit);
    for (auto& [trial, pts] : by_trial) {
      std::sort(pts.begin(), pts.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<double> tx, tb, ta;
      for (std::size_t i = std::min(config.burn_in, pts.size()); i < pts.size(); ++i) {
        tx.push_back(static_cast<double>(pts[i].second->n));
        tb.push_back(pts[i].second->compression_before);
        ta.push_back(pts[i].second->compression_after);
      }
      if (auto f = try_fit(tx, tb)) s.per_trial_compression_before.push_back(*f);
      if (auto f = try_fit(tx, ta)) s.per_trial_compression_after.push_back(*f);
    }
    result.slopes.push_back(std::move(s));
  }
}

}  // namespace optinet
