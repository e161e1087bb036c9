// Acceptance suite: one PASS/FAIL line per criterion. Exit status is 1 when
// the failing criteria differ from --known-failures (empty by default).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cli.hpp"
#include "optinet/dataset_io.hpp"
#include "optinet/harness.hpp"
#include "optinet/netting.hpp"
#include "optinet/protocomp.hpp"
#include "optinet/random.hpp"
#include "optinet/rule_io.hpp"
#include "optinet/rules.hpp"
#include "optinet/synth.hpp"

using namespace optinet;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::set<int> g_failed;

void report(int id, const std::string& name, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << o.detail
            << std::endl;
  if (!o.pass) g_failed.insert(id);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PointSet uniform_cube(std::size_t n, std::size_t d, double lo, double hi, Rng& rng) {
  PointSet ps(d);
  Point x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.uniform(lo, hi);
    ps.push_back(x);
  }
  return ps;
}

// ---------------------------------------------------------------- 1, 2

Outcome net_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  const int dims[] = {1, 2, 3, 5};
  std::size_t bad = 0, members = 0;
  for (std::uint64_t p = 0; p < 200; ++p) {
    Rng rng(derive_seed(kSeed, {1, p}));
    const int d = dims[rng.below(4)];
    const double gamma = 0.05 * double(1 + rng.below(10));
    const auto n = std::size_t(1 + rng.below(2000));
    const auto pool = uniform_cube(n, std::size_t(d), 0.0, 1.0, rng);
    const auto net = build_gamma_net(pool, gamma);
    members += net.size();
    if (!verify_packing(net, pool) || !verify_covering(net, pool)) ++bad;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 30.0,
          fmt("200 pools, %zu net members, %zu violating nets, %.2f s (limit 30 s)", members,
              bad, secs)};
}

Outcome ball_in_cell() {
  const int dims[] = {1, 2, 3, 5};
  std::size_t checked = 0, wrong = 0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    Rng rng(derive_seed(kSeed, {2, k}));
    const int d = dims[k % 4];
    const double gamma = 0.05 * double(1 + rng.below(10));
    const auto pool = uniform_cube(1000, std::size_t(d), 0.0, 1.0, rng);
    const auto net = build_gamma_net(pool, gamma);
    const auto members = net_points(net, pool);
    Point u(static_cast<std::size_t>(d)), x(static_cast<std::size_t>(d));
    for (std::size_t m = 0; m < members.size(); ++m) {
      const auto c = members[m];
      for (int s = 0; s < 100; ++s) {
        do {
          sample_unit_ball(rng, u);
          for (int j = 0; j < d; ++j) x[j] = c[j] + 0.5 * gamma * u[j];
        } while (!(distance(x, c) < 0.5 * gamma));
        ++checked;
        if (nearest(x, members).index != m) ++wrong;
      }
    }
  }
  return {wrong == 0, fmt("%zu points in 50 nets, %zu with a different nearest member",
                          checked, wrong)};
}

// ---------------------------------------------------------------- 3, 4, 9

struct Config {
  int d = 2;
  PrototypeRule rule;
  LabeledDataset train;
  PointSet queries;
  NeighborGraph exact;
};

std::vector<Config> make_configs() {
  std::vector<Config> out;
  for (std::uint64_t c = 0; c < 20; ++c) {
    Config cfg;
    cfg.d = c % 2 == 0 ? 2 : 3;
    const auto m = std::size_t(50 + std::lround(250.0 * double(c) / 19.0));
    const auto spec = RadialSpec::with_default_t(cfg.d);
    cfg.train = sample(spec, 10 * m, derive_seed(kSeed, {3, c, 1}));
    cfg.rule = fit_protonn(cfg.train, m, derive_seed(kSeed, {3, c, 2}));
    Rng rng(derive_seed(kSeed, {3, c, 3}));
    cfg.queries = uniform_cube(100000, std::size_t(cfg.d), -1.5, 1.5, rng);
    cfg.exact = neighbors_exact(cfg.rule.prototypes);
    out.push_back(std::move(cfg));
  }
  return out;
}

Outcome simultaneous_lossless(const std::vector<Config>& configs, double build_secs) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t excluded = 0, disagreed = 0, before = 0, after = 0;
  double worst = 1.0;
  for (const auto& cfg : configs) {
    const auto comp = compress_simultaneous(cfg.rule, cfg.exact);
    const auto a = agreement_rate(cfg.rule, comp, cfg.queries, 1e-9);
    excluded += a.excluded;
    disagreed += a.compared - a.agreed;
    worst = std::min(worst, a.rate);
    before += cfg.rule.size();
    after += comp.size();
  }
  const double secs = build_secs + seconds_since(t0);
  return {worst == 1.0 && secs < 300.0,
          fmt("20 configs, %zu -> %zu prototypes, min agreement %.6f, %zu disagreements, "
              "%zu excluded queries, %.1f s (limit 300 s)",
              before, after, worst, disagreed, excluded, secs)};
}

Outcome iterative_lossless(const std::vector<Config>& configs) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t excluded = 0, disagreed = 0, before = 0, after = 0;
  for (const auto& cfg : configs) {
    const auto comp = compress_iterative(cfg.rule, exact_neighbor_fn());
    const auto a = agreement_rate(cfg.rule, comp, cfg.queries, 0.0);
    excluded += a.excluded;
    disagreed += a.compared - a.agreed;
    before += cfg.rule.size();
    after += comp.size();
  }
  return {disagreed == 0 && excluded == 0,
          fmt("20 configs, exact neighbor fn, %zu -> %zu prototypes, %zu disagreements, "
              "%zu excluded queries, %.1f s",
              before, after, disagreed, excluded, seconds_since(t0))};
}

bool characterization_holds(const PrototypeRule& rule, const NeighborGraph& graph) {
  const auto& labels = rule.labels;
  const bool mixed = std::any_of(labels.begin(), labels.end(),
                                 [&](Label l) { return l != labels.front(); });
  std::vector<std::size_t> expected;
  if (!mixed) {
    expected = {0};
  } else {
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const auto& nb = graph.adjacency[i];
      const bool uniform =
          std::all_of(nb.begin(), nb.end(), [&](std::size_t q) { return labels[q] == labels[i]; });
      if (!uniform) expected.push_back(i);
    }
  }
  return simultaneous_keep(labels, graph) == expected &&
         compress_simultaneous(rule, graph) == rule.subset(expected);
}

Outcome removal_invariant(const std::vector<Config>& configs) {
  std::size_t outputs = 0, broken = 0;
  for (const auto& cfg : configs) {
    for (const auto& g : {cfg.exact, neighbors_approx(cfg.rule.prototypes, cfg.train.points)}) {
      ++outputs;
      if (!characterization_holds(cfg.rule, g)) ++broken;
    }
    // Same geometry with every label set to one class.
    auto flat = cfg.rule;
    std::fill(flat.labels.begin(), flat.labels.end(), flat.labels.front());
    ++outputs;
    if (!characterization_holds(flat, cfg.exact)) ++broken;
  }
  return {broken == 0, fmt("%zu simultaneous outputs (exact, approximate and single-label "
                           "graphs), %zu mismatches",
                           outputs, broken)};
}

// ---------------------------------------------------------------- 5

// Half the samples uniform on the unit square, half at a log-uniform radius
// in [0.5, 1e6] around its center, so unbounded cells are reached too.
RegionSampler plane_sampler() {
  return [](Rng& rng, std::span<double> x) {
    if (rng.uniform() < 0.5) {
      x[0] = rng.uniform();
      x[1] = rng.uniform();
      return;
    }
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    const double r = 0.5 * std::exp(rng.uniform() * std::log(2e6));
    x[0] = 0.5 + r * std::cos(theta);
    x[1] = 0.5 + r * std::sin(theta);
  };
}

Outcome oracle_consistency(const std::vector<Config>& configs) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t subset_fail = 0, tested = 0;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const auto& cfg = configs[c];
    const double r = 1.5;
    const auto mc = neighbors_montecarlo(
        cfg.rule.prototypes,
        box_sampler(Point(std::size_t(cfg.d), -r), Point(std::size_t(cfg.d), r)), 200000,
        derive_seed(kSeed, {5, c}));
    ++tested;
    if (!mc.subset_of(cfg.exact)) ++subset_fail;
  }
  const std::size_t n_cfg = 40;
  std::size_t equal = 0, missing = 0;
  for (std::uint64_t c = 0; c < n_cfg; ++c) {
    Rng rng(derive_seed(kSeed, {5, 1000 + c}));
    const auto ps = uniform_cube(30, 2, 0.0, 1.0, rng);
    const auto exact = neighbors_exact(ps);
    const auto mc = neighbors_montecarlo(ps, plane_sampler(), 1000000, derive_seed(kSeed, {5, 2000 + c}));
    ++tested;
    if (!mc.subset_of(exact)) ++subset_fail;
    if (mc.adjacency == exact.adjacency) ++equal;
    missing += exact.edge_count() - mc.edge_count();
  }
  const double rate = double(equal) / double(n_cfg);
  return {subset_fail == 0 && rate >= 0.95,
          fmt("subset holds on %zu/%zu configs; 30-point d=2 at 1e6 samples: equal on %zu/%zu "
              "(%.0f%%, need 95%%), %zu exact edges never sampled, %.1f s",
              tested - subset_fail, tested, equal, n_cfg, 100.0 * rate, missing,
              seconds_since(t0))};
}

// ---------------------------------------------------------------- 6

Outcome disconnected_support() {
  PrototypeRule rule;
  rule.kind = RuleKind::protonn;
  rule.prototypes = PointSet(1);
  rule.prototypes.push_back(Point{-2.5});
  rule.prototypes.push_back(Point{-1.5});
  rule.prototypes.push_back(Point{2.5});
  rule.labels = {0, 0, 1};
  rule.counts = {1, 0, 1, 0, 0, 1};
  rule.num_classes = 2;
  rule.m = 3;

  Rng rng(derive_seed(kSeed, {6}));
  auto support = [&rng](std::size_t n) {
    PointSet ps(1);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.uniform(1.0, 3.0);
      ps.push_back(Point{rng.uniform() < 0.5 ? -u : u});
    }
    return ps;
  };
  const auto train = support(10000);
  const auto queries = support(10000);
  PointSet left(1);
  for (std::size_t i = 0; i < queries.size(); ++i)
    if (queries[i][0] < -1.0) left.push_back(Point{queries[i][0]});

  const auto graph = neighbors_approx(rule.prototypes, train);
  const auto kept = simultaneous_keep(rule.labels, graph);
  const auto simul = compress_simultaneous(rule, graph);
  const auto on_left = agreement_rate(rule, simul, left, 0.0);
  const auto iter = compress_iterative(rule, approx_neighbor_fn(train));
  const auto on_support = agreement_rate(rule, iter, queries, 0.0);

  const bool pass = kept == std::vector<std::size_t>{2} && on_left.agreed == 0 &&
                    on_left.compared == left.size() && on_support.rate == 1.0 &&
                    on_support.compared == queries.size();
  return {pass, fmt("simultaneous keeps %zu prototype(s) and agrees on %zu/%zu queries in "
                    "(-3,-1); iterative keeps %zu and agrees on %zu/%zu support queries",
                    kept.size(), on_left.agreed, left.size(), iter.size(), on_support.agreed,
                    queries.size())};
}

// ---------------------------------------------------------------- 7, 8

SweepResult rate_sweep(double& secs) {
  ExperimentConfig config;
  config.rules = {RuleKind::optinet};
  config.schedule = Schedule{1.0, 1.0, 2};
  config.n_grid = {1000, 2000, 4000, 8000, 16000, 32000};
  config.trials = 10;
  config.test_size = 10000;
  config.compression = CompressionMode::simultaneous_exact;
  config.master_seed = kSeed;
  config.workers = std::max(1u, std::thread::hardware_concurrency());
  const auto t0 = std::chrono::steady_clock::now();
  auto result = run_sweep(config);
  secs = seconds_since(t0);
  return result;
}

Outcome rate_slopes(const SweepResult& sweep, double secs) {
  const auto& s = sweep.slopes.front();
  const double excess = s.excess_error->slope;
  const double ratio = s.compression_before->slope;
  const bool pass = excess >= -0.8 && excess <= -0.3 && ratio >= -0.65 && ratio <= -0.35;
  return {pass, fmt("excess-error slope %.3f (+-%.3f) in [-0.8,-0.3]; compression-ratio slope "
                    "%.3f (+-%.3f) in [-0.65,-0.35]; sweep %.1f s on %u worker(s)",
                    excess, s.excess_error->stderr_, ratio, s.compression_before->stderr_, secs,
                    sweep.config.workers)};
}

Outcome compression_gain(const SweepResult& sweep) {
  const auto& s = sweep.slopes.front();
  const double count = s.count_after->slope;
  std::size_t steeper = 0;
  const auto runs = s.per_trial_compression_after.size();
  double gap_min = 1e9;
  for (std::size_t t = 0; t < runs; ++t) {
    const double gap =
        s.per_trial_compression_before[t].slope - s.per_trial_compression_after[t].slope;
    gap_min = std::min(gap_min, gap);
    if (gap > 0.0) ++steeper;
  }
  const auto& last = sweep.grid.back();
  const double conc = last.boundary_concentration_after->mean;
  const bool pass = count >= 0.05 && count <= 0.45 && steeper == runs && runs > 0 &&
                    s.compression_after->slope < s.compression_before->slope && conc >= 0.9;
  return {pass, fmt("post-compression count slope %.3f in [0.05,0.45]; ratio slope %.3f after "
                    "vs %.3f before, steeper in %zu/%zu runs (smallest gap %.3f); boundary "
                    "concentration at n=%zu: %.3f (need 0.9)",
                    count, s.compression_after->slope, s.compression_before->slope, steeper, runs,
                    gap_min, last.n, conc)};
}

// ---------------------------------------------------------------- 10

// Ten Gaussian blobs in 3-d with 5% of points placed in a random blob, which
// is roughly what a 2-layer embedding of a 10-class image set looks like.
LabeledDataset embedding_like(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point> centers;
  while (centers.size() < 10) {
    Point c{rng.uniform(0, 12), rng.uniform(0, 12), rng.uniform(0, 12)};
    bool apart = true;
    for (const auto& o : centers) apart = apart && distance(c, o) > 3.5;
    if (apart) centers.push_back(c);
  }
  LabeledDataset ds{PointSet(3), {}, 10};
  Point x(3);
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = Label(rng.below(10));
    const auto where = rng.uniform() < 0.05 ? rng.below(10) : std::uint64_t(label);
    for (int j = 0; j < 3; ++j) x[j] = centers[where][j] + (0.4 + 0.1 * j) * rng.normal();
    ds.points.push_back(x);
    ds.labels.push_back(label);
  }
  return ds;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

Outcome real_data_pipeline() {
  const fs::path dir = fs::temp_directory_path() / "optinet_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto [train, test] = split(embedding_like(18000, kSeed), 0.2, derive_seed(kSeed, {10}));
  save_csv(dir / "train.csv", train);
  save_csv(dir / "test.csv", test);

  auto cli = [&](std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (code != 0) std::cerr << err.str();
    return code == 0;
  };
  auto p = [&](const char* f) { return (dir / f).string(); };
  const bool ran =
      cli({"fit", "--rule", "optinet", "--gamma", "0.11", "--train", p("train.csv"), "--out",
           p("rule.json")}) &&
      cli({"compress", "--rule-file", p("rule.json"), "--mode", "iterative-approx", "--train",
           p("train.csv"), "--out", p("compressed.json")}) &&
      cli({"predict", "--rule-file", p("rule.json"), "--data", p("test.csv"), "--out",
           p("before.csv")}) &&
      cli({"predict", "--rule-file", p("compressed.json"), "--data", p("test.csv"), "--out",
           p("after.csv")});
  if (!ran) {
    fs::remove_all(dir);
    return {false, "CLI chain did not complete"};
  }

  const auto rule = load_rule(dir / "rule.json");
  const auto comp = load_rule(dir / "compressed.json");
  const auto before = read_lines(dir / "before.csv");
  const auto after = read_lines(dir / "after.csv");
  std::size_t changed = 0;
  for (std::size_t i = 1; i < std::min(before.size(), after.size()); ++i)
    changed += before[i] != after[i];
  if (before.size() != after.size()) changed += std::max(before.size(), after.size());

  // Decrease is owed when labels are mixed and some prototype starts with a
  // single-label neighborhood under the training-sample relation.
  const auto graph = neighbors_approx(rule.prototypes, train.points);
  bool mixed = false, removable = false;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    mixed = mixed || rule.labels[i] != rule.labels.front();
    const auto& nb = graph.adjacency[i];
    removable = removable || std::all_of(nb.begin(), nb.end(), [&](std::size_t q) {
                  return rule.labels[q] == rule.labels[i];
                });
  }
  const bool decrease_ok = !(mixed && removable) || comp.size() < rule.size();
  fs::remove_all(dir);
  return {changed == 0 && decrease_ok,
          fmt("18000-point 3-feature/10-class CSV, %zu train / %zu test; %zu -> %zu prototypes; "
              "%zu of %zu test predictions changed after compression",
              train.size(), test.size(), rule.size(), comp.size(), changed, test.size())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optinet acceptance suite"};
  std::vector<int> known;
  app.add_option("--known-failures", known,
                 "Criteria expected to fail; any other outcome is an error")
      ->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  std::cout << "optinet acceptance suite (seed " << kSeed << ")\n";
  report(1, "gamma-net packing and covering", net_correctness());
  report(2, "ball of radius gamma/2 stays in its cell", ball_in_cell());

  const auto t0 = std::chrono::steady_clock::now();
  const auto configs = make_configs();
  const double build_secs = seconds_since(t0);
  report(3, "simultaneous compression with exact neighbors is lossless",
         simultaneous_lossless(configs, build_secs));
  report(4, "iterative compression is lossless", iterative_lossless(configs));
  report(5, "Monte-Carlo neighbors agree with exact neighbors", oracle_consistency(configs));
  report(6, "disconnected-support regression", disconnected_support());

  double sweep_secs = 0.0;
  const auto sweep = rate_sweep(sweep_secs);
  report(7, "excess-error and compression-ratio rates", rate_slopes(sweep, sweep_secs));
  report(8, "compression gain on the boundary", compression_gain(sweep));
  report(9, "simultaneous removal characterization", removal_invariant(configs));
  report(10, "embedded-data pipeline keeps predictions", real_data_pipeline());

  const std::set<int> expected(known.begin(), known.end());
  std::cout << 10 - g_failed.size() << "/10 criteria passed";
  if (!g_failed.empty()) {
    std::cout << "; failed:";
    for (int id : g_failed) std::cout << ' ' << id;
  }
  std::cout << "\n";
  if (g_failed != expected) {
    std::cout << "failing set differs from --known-failures\n";
    return 1;
  }
  return 0;
}
