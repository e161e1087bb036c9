#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <deque>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "optinet/dataset_io.hpp"
#include "optinet/error.hpp"
#include "optinet/harness.hpp"
#include "optinet/netting.hpp"
#include "optinet/protocomp.hpp"
#include "optinet/random.hpp"
#include "optinet/rule_io.hpp"
#include "optinet/rules.hpp"
#include "optinet/synth.hpp"

namespace fs = std::filesystem;

namespace optinet::cli {

namespace {

// Thrown when a property check fails; maps to exit code 4.
struct VerificationFailed : Error {
  using Error::Error;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

fs::path sidecar_path(const fs::path& csv) {
  auto p = csv;
  p.replace_extension(".meta.json");
  return p;
}

// --- synth-gen ------------------------------------------------------------

struct SynthGenArgs {
  int d = 2;
  std::optional<double> t;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
};

void synth_gen(const SynthGenArgs& a, std::ostream& out) {
  if (a.d < 1) throw InvalidArgument("--d must be >= 1");
  if (a.n < 1) throw InvalidArgument("--n must be >= 1");
  auto spec = RadialSpec::with_default_t(a.d);
  if (a.t) spec.t = *a.t;
  spec.validate();
  const auto data = sample(spec, a.n, a.seed);
  save_csv(a.out, data);
  nlohmann::json meta = {{"family", "radial"}, {"d", a.d},     {"t", spec.t},
                         {"n", a.n},           {"seed", a.seed}, {"rng", "mt19937_64+splitmix64"},
                         {"bayes_error", bayes_error(spec)}};
  const auto side = sidecar_path(a.out);
  write_text(side, meta.dump(2) + "\n");
  out << "wrote " << a.n << " samples to " << a.out << " (spec in " << side.string() << ")\n";
}

// --- fit -------------------------------------------------------------------

struct FitArgs {
  std::string rule;
  std::string train;
  double gamma = 0.11;
  std::size_t k = 10;
  std::optional<std::size_t> m;
  std::uint64_t seed = 0;
  std::string out;
};

void fit(const FitArgs& a, std::ostream& out) {
  const auto kind = parse_rule_kind(a.rule);
  const auto train = load_csv(a.train);
  if (train.empty()) throw DataError(a.train + ": no samples");
  PrototypeRule rule;
  switch (kind) {
    case RuleKind::optinet: {
      const std::size_t pool = a.m.value_or(0);
      if (pool > train.size())
        throw InvalidArgument("--m exceeds the number of training samples");
      rule = fit_optinet(train, default_pool(train, pool, a.seed), a.gamma, a.seed);
      break;
    }
    case RuleKind::protonn:
      if (!a.m) throw InvalidArgument("--rule protonn requires --m");
      rule = fit_protonn(train, *a.m, a.seed);
      break;
    case RuleKind::protoknn:
      rule = fit_protoknn(train, a.m.value_or(protoknn_default_m(train.size(), a.k)), a.k, a.seed);
      break;
    case RuleKind::knn:
      rule = fit_knn(train, a.k);
      break;
  }
  save_rule(a.out, rule);
  out << to_string(kind) << ": " << rule.size() << " prototypes from " << train.size()
      << " samples (" << rule.empty_cell_count() << " empty cells)\n";
}

// --- predict ---------------------------------------------------------------

struct PredictArgs {
  std::string rule_file;
  std::string data;
  std::string out;
};

void predict(const PredictArgs& a, std::ostream& out) {
  const auto rule = load_rule(a.rule_file);
  const auto data = load_csv(a.data);
  if (data.dim() != rule.dim())
    throw DataError(a.data + ": dimension " + std::to_string(data.dim()) +
                    " does not match the rule's " + std::to_string(rule.dim()));
  const auto pred = classify_batch(rule, data.points);
  std::ostringstream text;
  text << "prediction\n";
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    text << pred[i] << '\n';
    wrong += pred[i] != data.labels[i] ? 1 : 0;
  }
  write_text(a.out, text.str());
  out << "predicted " << pred.size() << " points; error " << format_double(
      pred.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(pred.size()))
      << '\n';
}

// --- compress --------------------------------------------------------------

struct CompressArgs {
  std::string rule_file;
  std::string mode;
  std::optional<std::string> train;
  std::string out;
  std::optional<std::string> report;
};

void compress(const CompressArgs& a, std::ostream& out) {
  const auto mode = parse_compression_mode(a.mode);
  if (mode == CompressionMode::none) throw InvalidArgument("--mode none is not a compression");
  const bool approx = mode != CompressionMode::simultaneous_exact;
  if (approx && !a.train) throw InvalidArgument("--mode " + a.mode + " requires --train");
  const auto rule = load_rule(a.rule_file);
  if (!rule.is_nearest_prototype())
    throw InvalidArgument("only nearest-prototype rules can be compressed (knn needs k = 1)");
  PointSet train_points(rule.dim());
  if (a.train) {
    train_points = load_csv(*a.train).points;
    if (train_points.dim() != rule.dim())
      throw DataError(*a.train + ": dimension does not match the rule");
  }
  const auto result = apply_compression(rule, mode, train_points);
  save_rule(a.out, result);
  nlohmann::json report = {
      {"before", rule.size()}, {"after", result.size()}, {"mode", std::string(to_string(mode))}};
  fs::path report_path = a.report ? fs::path(*a.report) : fs::path(a.out);
  if (!a.report) report_path.replace_extension(".report.json");
  write_text(report_path, report.dump(2) + "\n");
  out << to_string(mode) << ": " << rule.size() << " -> " << result.size() << " prototypes\n";
}

// --- sweep -----------------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::string out_dir = "results";
  unsigned workers = 1;
  bool plot_data = false;
  bool no_timings = false;
};

void sweep(const SweepArgs& a, std::ostream& out) {
  auto config = load_config(a.config);
  config.workers = std::max(1u, a.workers);
  const auto result = run_sweep(config);
  const auto paths = save_results(result, a.out_dir, a.plot_data, !a.no_timings);
  out << "config " << result.config_hash << ": " << result.records.size() << " trials, "
      << result.grid.size() << " summary rows\n";
  for (const auto& s : result.slopes) {
    out << "  " << to_string(s.rule);
    auto show = [&](const char* name, const std::optional<SlopeFit>& f) {
      if (f) out << "  " << name << " slope " << std::setprecision(4) << f->slope << " +- "
                 << f->stderr_;
    };
    show("excess", s.excess_error);
    show("ratio", s.compression_before);
    show("ratio-after", s.compression_after);
    out << '\n';
  }
  out << "wrote " << paths.records.string() << " and " << paths.summary.string() << '\n';
}

// --- verify ----------------------------------------------------------------

struct Check {
  std::string suite;
  std::string property;
  std::size_t cases = 0;
  std::size_t failures = 0;
};

class Table {
 public:
  Check& add(std::string suite, std::string property) {
    rows_.push_back({std::move(suite), std::move(property)});
    return rows_.back();
  }
  void record(Check& c, bool ok) {
    ++c.cases;
    if (!ok) ++c.failures;
  }
  bool passed() const {
    return std::all_of(rows_.begin(), rows_.end(),
                       [](const Check& c) { return c.failures == 0 && c.cases > 0; });
  }
  void print(std::ostream& out) const {
    out << std::left << std::setw(10) << "suite" << std::setw(44) << "property" << std::right
        << std::setw(8) << "cases" << std::setw(10) << "failures" << "  status\n";
    for (const auto& c : rows_)
      out << std::left << std::setw(10) << c.suite << std::setw(44) << c.property << std::right
          << std::setw(8) << c.cases << std::setw(10) << c.failures << "  "
          << (c.failures == 0 && c.cases > 0 ? "PASS" : "FAIL") << '\n';
  }

 private:
  std::deque<Check> rows_;
};

PointSet uniform_cube(std::size_t n, std::size_t d, Rng& rng) {
  PointSet ps(d);
  ps.reserve(n);
  Point x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.uniform();
    ps.push_back(x);
  }
  return ps;
}

void verify_net(Table& table, std::uint64_t seed) {
  auto& packing = table.add("net", "packing: members pairwise >= gamma");
  auto& covering = table.add("net", "covering: every point < gamma from net");
  auto& bound = table.add("net", "size <= ceil((2 diam / gamma)^d)");
  auto& ball = table.add("net", "ball of radius gamma/2 inside own cell");
  const std::size_t dims[] = {1, 2, 3, 5};
  for (std::size_t c = 0; c < 40; ++c) {
    Rng rng(derive_seed(seed, {1, c}));
    const std::size_t d = dims[c % 4];
    const std::size_t n = 50 + static_cast<std::size_t>(rng.below(451));
    const double gamma = 0.05 * static_cast<double>(1 + rng.below(10));
    const auto pool = uniform_cube(n, d, rng);
    const auto net = build_gamma_net(pool, gamma);
    table.record(packing, verify_packing(net, pool));
    table.record(covering, verify_covering(net, pool));
    const double diam = diameter(pool);
    table.record(bound, diam == 0.0 || net.size() <= net_size_bound(diam, gamma, int(d)));
    const auto members = net_points(net, pool);
    bool inside = true;
    Point x(d);
    for (std::size_t i = 0; i < members.size() && inside; ++i) {
      for (int s = 0; s < 20; ++s) {
        sample_unit_ball(rng, x);
        // Strictly inside the half-radius ball.
        for (std::size_t j = 0; j < d; ++j) x[j] = members[i][j] + 0.499 * gamma * x[j];
        if (nearest(x, members).index != i) {
          inside = false;
          break;
        }
      }
    }
    table.record(ball, inside);
  }
}

bool structural_invariant(const PrototypeRule& rule, const NeighborGraph& g,
                          const std::vector<std::size_t>& keep) {
  const auto& labels = rule.labels;
  const bool mixed = std::any_of(labels.begin(), labels.end(),
                                 [&](Label l) { return l != labels.front(); });
  if (!mixed || rule.size() == 1) return keep == std::vector<std::size_t>{0};
  std::vector<std::size_t> expect;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto& nb = g.adjacency[i];
    const bool uniform =
        std::all_of(nb.begin(), nb.end(), [&](std::size_t q) { return labels[q] == labels[i]; });
    if (!uniform) expect.push_back(i);
  }
  return keep == expect;
}

PrototypeRule synth_rule(std::size_t m, int d, std::uint64_t seed) {
  const auto spec = RadialSpec::with_default_t(d);
  const auto data = sample(spec, m, seed);
  PrototypeRule rule;
  rule.kind = RuleKind::protonn;
  rule.prototypes = data.points;
  rule.labels = data.labels;
  rule.num_classes = 2;
  rule.counts.assign(m * 2, 0);
  for (std::size_t i = 0; i < m; ++i) rule.counts[i * 2 + std::size_t(data.labels[i])] = 1;
  rule.m = m;
  rule.seed = seed;
  return rule;
}

void verify_compress(Table& table, std::uint64_t seed) {
  auto& invariant = table.add("compress", "removed iff all exact neighbors agree");
  auto& lossless = table.add("compress", "simultaneous-exact agrees on queries");
  auto& iter_lossless = table.add("compress", "iterative-exact agrees on queries");
  auto& approx_same = table.add("compress", "fast iterative-approx == generic");
  auto& monotone = table.add("compress", "count never increases");
  auto& counter = table.add("compress", "disconnected-support regression");
  for (std::size_t c = 0; c < 8; ++c) {
    const int d = 2 + int(c % 2);
    const auto rule = synth_rule(40 + 10 * c, d, derive_seed(seed, {2, c}));
    const auto graph = neighbors_exact(rule.prototypes);
    const auto keep = simultaneous_keep(rule.labels, graph);
    table.record(invariant, structural_invariant(rule, graph, keep));
    const auto sim = rule.subset(keep);
    Rng rng(derive_seed(seed, {3, c}));
    PointSet queries(static_cast<std::size_t>(d));
    Point q(static_cast<std::size_t>(d));
    for (int i = 0; i < 2000; ++i) {
      for (auto& v : q) v = rng.uniform(-1.5, 1.5);
      queries.push_back(q);
    }
    table.record(lossless, agreement_rate(rule, sim, queries, 1e-9).rate == 1.0);
    const auto it = compress_iterative(rule, exact_neighbor_fn());
    table.record(iter_lossless, agreement_rate(rule, it, queries, 1e-9).rate == 1.0);
    const auto train = sample(RadialSpec::with_default_t(d), 400, derive_seed(seed, {4, c}));
    const auto fast = compress_iterative_approx(rule, train.points);
    const auto slow = compress_iterative(rule, approx_neighbor_fn(train.points));
    table.record(approx_same, fast == slow);
    table.record(monotone, sim.size() <= rule.size() && it.size() <= rule.size() &&
                               fast.size() <= rule.size());
  }

  // Three prototypes on a line with support (-3,-1) u (1,3).
  PrototypeRule rule;
  rule.kind = RuleKind::protonn;
  rule.prototypes = PointSet(1, {-2.5, -1.5, 2.5});
  rule.labels = {0, 0, 1};
  rule.num_classes = 2;
  rule.counts = {1, 0, 1, 0, 0, 1};
  rule.m = 3;
  Rng rng(derive_seed(seed, {5}));
  PointSet support(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform(1.0, 3.0);
    support.push_back(Point{rng.uniform() < 0.5 ? -u : u});
  }
  const auto sim = compress_simultaneous(rule, neighbors_approx(rule.prototypes, support));
  bool ok = sim.size() == 1 && sim.prototypes[0][0] == 2.5;
  for (std::size_t i = 0; ok && i < support.size(); ++i)
    if (support[i][0] < 0) ok = classify(sim, support[i]) != classify(rule, support[i]);
  const auto it = compress_iterative(rule, approx_neighbor_fn(support));
  ok = ok && agreement_rate(rule, it, support, 0.0).rate == 1.0;
  table.record(counter, ok);
}

void verify_synth(Table& table, std::uint64_t seed) {
  auto& conditions = table.add("synth", "SDC, Tsybakov, Hoelder, margin hold");
  auto& analytic = table.add("synth", "L* quadrature matches closed form (d=2)");
  auto& in_ball = table.add("synth", "samples lie in the unit ball");
  auto& empirical = table.add("synth", "Bayes rule error within 4 SE of L*");
  for (int d = 1; d <= 5; ++d) {
    const auto spec = RadialSpec::with_default_t(d);
    table.record(conditions, check_conditions(spec, 2000, derive_seed(seed, {6, std::uint64_t(d)})).all_pass());
    const auto data = sample(spec, 20000, derive_seed(seed, {7, std::uint64_t(d)}));
    bool inside = true;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      double r2 = 0.0;
      for (double v : data.points[i]) r2 += v * v;
      inside = inside && r2 <= 1.0;
      wrong += bayes_label(spec, data.points[i]) != data.labels[i] ? 1 : 0;
    }
    table.record(in_ball, inside);
    const double lstar = bayes_error(spec);
    const double se = std::sqrt(lstar * (1 - lstar) / double(data.size()));
    table.record(empirical, std::abs(double(wrong) / double(data.size()) - lstar) <= 4 * se);
  }
  for (double t : {0.2, 0.5, RadialSpec::default_t(2), 0.8}) {
    RadialSpec spec;
    spec.d = 2;
    spec.t = t;
    const double closed =
        t * t / 3.0 + (1.0 / (1.0 - t)) * ((1.0 - t * t) / 2.0 - (1.0 - t * t * t) / 3.0);
    table.record(analytic, std::abs(bayes_error(spec) - closed) < 1e-8);
  }
}

void verify(const std::string& suite, std::uint64_t seed, std::ostream& out) {
  Table table;
  const bool all = suite == "all";
  if (all || suite == "net") verify_net(table, seed);
  if (all || suite == "compress") verify_compress(table, seed);
  if (all || suite == "synth") verify_synth(table, seed);
  table.print(out);
  if (!table.passed()) throw VerificationFailed("verification failed");
}

int run_app(CLI::App& app, const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  std::vector<std::string> argv_store{"optinet"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prototype nearest-neighbor rules, compression and rate experiments"};
  app.name("optinet");
  app.require_subcommand(1);

  std::function<void()> action;

  SynthGenArgs sg;
  auto* c_sg = app.add_subcommand("synth-gen", "Sample the radial synthetic family to CSV");
  c_sg->add_option("--d", sg.d, "Dimension")->required();
  c_sg->add_option("--t", sg.t, "Boundary radius (default 1 - 1/(3 * 2^(1/d)))");
  c_sg->add_option("--n", sg.n, "Number of samples")->required();
  c_sg->add_option("--seed", sg.seed, "Seed");
  c_sg->add_option("--out", sg.out, "Output CSV")->required();
  c_sg->callback([&] { action = [&] { synth_gen(sg, out); }; });

  FitArgs fa;
  auto* c_fit = app.add_subcommand("fit", "Fit a prototype rule");
  c_fit->add_option("--rule", fa.rule, "optinet | protonn | protoknn | knn")
      ->required()
      ->check(CLI::IsMember({"optinet", "protonn", "protoknn", "knn"}));
  c_fit->add_option("--train", fa.train, "Training CSV")->required()->check(CLI::ExistingFile);
  c_fit->add_option("--gamma", fa.gamma, "Net scale for optinet")->capture_default_str();
  c_fit->add_option("--k", fa.k, "Neighbors for knn / protoknn")->capture_default_str();
  c_fit->add_option("--m", fa.m,
                    "optinet: pool size (default all); protonn: draws (required); "
                    "protoknn: draws (default floor(n/k))");
  c_fit->add_option("--seed", fa.seed, "Seed");
  c_fit->add_option("--out", fa.out, "Output rule JSON")->required();
  c_fit->callback([&] { action = [&] { fit(fa, out); }; });

  PredictArgs pa;
  auto* c_pred = app.add_subcommand("predict", "Classify a labeled CSV with a rule");
  c_pred->add_option("--rule-file", pa.rule_file, "Rule JSON")->required()->check(CLI::ExistingFile);
  c_pred->add_option("--data", pa.data, "Query CSV")->required()->check(CLI::ExistingFile);
  c_pred->add_option("--out", pa.out, "Output predictions CSV")->required();
  c_pred->callback([&] { action = [&] { predict(pa, out); }; });

  CompressArgs ca;
  auto* c_comp = app.add_subcommand("compress", "Remove prototypes whose neighbors all share their label");
  c_comp->add_option("--rule-file", ca.rule_file, "Rule JSON")->required()->check(CLI::ExistingFile);
  c_comp->add_option("--mode", ca.mode, "Compression mode")
      ->required()
      ->check(CLI::IsMember({"simultaneous-exact", "simultaneous-approx", "iterative-approx"}));
  c_comp->add_option("--train", ca.train, "Training CSV (approximate modes)")
      ->check(CLI::ExistingFile);
  c_comp->add_option("--out", ca.out, "Output rule JSON")->required();
  c_comp->add_option("--report", ca.report, "Report JSON (default <out>.report.json)");
  c_comp->callback([&] { action = [&] { compress(ca, out); }; });

  SweepArgs sw;
  auto* c_sweep = app.add_subcommand("sweep", "Run an experiment sweep from a JSON config");
  c_sweep->add_option("--config", sw.config, "Config JSON")->required()->check(CLI::ExistingFile);
  c_sweep->add_option("--out-dir", sw.out_dir, "Output directory")->capture_default_str();
  c_sweep->add_option("--workers", sw.workers, "Parallel trials")->capture_default_str();
  c_sweep->add_flag("--emit-plot-data", sw.plot_data, "Also write plot_data.csv");
  c_sweep->add_flag("--no-timings", sw.no_timings, "Omit wall-clock fields from the outputs");
  c_sweep->callback([&] { action = [&] { sweep(sw, out); }; });

  std::string suite = "all";
  std::uint64_t vseed = 0;
  auto* c_ver = app.add_subcommand("verify", "Run the property suites");
  c_ver->add_option("--suite", suite, "net | compress | synth | all")
      ->capture_default_str()
      ->check(CLI::IsMember({"net", "compress", "synth", "all"}));
  c_ver->add_option("--seed", vseed, "Seed for the randomized fixtures");
  c_ver->callback([&] { action = [&] { verify(suite, vseed, out); }; });

  if (const int code = run_app(app, args, out, err); code != ok || !action) return code;

  try {
    action();
  } catch (const VerificationFailed& e) {
    err << "error: " << e.what() << '\n';
    return verification;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return data;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return data;
  }
  return ok;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace optinet::cli
