#include <fstream>

#include "optinet/dataset_io.hpp"
#include "optinet/error.hpp"
#include "optinet/harness.hpp"

namespace optinet {

namespace {

template <class T>
nlohmann::json opt_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

nlohmann::json opt_mean_std(const std::optional<MeanStd>& m) {
  return m ? mean_std_json(*m) : nlohmann::json(nullptr);
}

nlohmann::json slope_json(const std::optional<SlopeFit>& s) {
  if (!s) return nullptr;
  return {{"slope", s->slope}, {"stderr", s->stderr_}};
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

}  // namespace

nlohmann::json record_to_json(const TrialRecord& r, bool with_timings) {
  nlohmann::json j;
  j["rule"] = std::string(to_string(r.rule));
  j["n"] = r.n;
  j["trial"] = r.trial;
  j["seed"] = r.seed;
  j["gamma"] = opt_json(r.gamma);
  j["pool_size"] = r.pool_size;
  j["test_size"] = r.test_size;
  j["test_error"] = r.test_error;
  j["excess_error"] = opt_json(r.excess_error);
  j["excess_error_raw"] = opt_json(r.excess_error_raw);
  j["excess_error_raw_se"] = opt_json(r.excess_error_raw_se);
  j["proto_count_before"] = r.proto_count_before;
  j["proto_count_after"] = r.proto_count_after;
  j["compression_before"] = r.compression_before;
  j["compression_after"] = r.compression_after;
  j["empty_cell_count"] = r.empty_cell_count;
  j["excluded_query_count"] = r.excluded_query_count;
  j["changed_predictions"] = r.changed_predictions;
  j["boundary_concentration_before"] = opt_json(r.boundary_concentration_before);
  j["boundary_concentration_after"] = opt_json(r.boundary_concentration_after);
  if (with_timings) {
    j["fit_ms"] = r.fit_ms;
    j["compress_ms"] = r.compress_ms;
    j["query_ns_per_point"] = r.query_ns_per_point;
  }
  return j;
}

nlohmann::json summary_to_json(const SweepResult& result) {
  nlohmann::json doc;
  doc["config"] = config_to_json(result.config);
  doc["config_hash"] = result.config_hash;
  doc["bayes_error"] = opt_json(result.bayes_error);
  auto grid = nlohmann::json::array();
  for (const auto& g : result.grid) {
    grid.push_back({{"rule", std::string(to_string(g.rule))},
                    {"n", g.n},
                    {"gamma", opt_json(g.gamma)},
                    {"test_error", mean_std_json(g.test_error)},
                    {"excess_error", opt_mean_std(g.excess_error)},
                    {"compression_before", mean_std_json(g.compression_before)},
                    {"compression_after", mean_std_json(g.compression_after)},
                    {"count_before", mean_std_json(g.count_before)},
                    {"count_after", mean_std_json(g.count_after)},
                    {"boundary_concentration_before", opt_mean_std(g.boundary_concentration_before)},
                    {"boundary_concentration_after", opt_mean_std(g.boundary_concentration_after)}});
  }
  doc["grid"] = grid;
  auto slopes = nlohmann::json::array();
  for (const auto& s : result.slopes) {
    auto per_trial = [](const std::vector<SlopeFit>& fits) {
      auto arr = nlohmann::json::array();
      for (const auto& f : fits) arr.push_back(slope_json(f));
      return arr;
    };
    slopes.push_back({{"rule", std::string(to_string(s.rule))},
                      {"excess_error", slope_json(s.excess_error)},
                      {"compression_before", slope_json(s.compression_before)},
                      {"compression_after", slope_json(s.compression_after)},
                      {"count_after", slope_json(s.count_after)},
                      {"per_trial_compression_before", per_trial(s.per_trial_compression_before)},
                      {"per_trial_compression_after", per_trial(s.per_trial_compression_after)}});
  }
  doc["slopes"] = slopes;
  return doc;
}

ResultPaths save_results(const SweepResult& result, const std::filesystem::path& dir,
                         bool emit_plot_data, bool with_timings) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());

  ResultPaths paths{dir / "records.jsonl", dir / "summary.json", std::nullopt};
  {
    auto out = open_out(paths.records);
    for (const auto& r : result.records) out << record_to_json(r, with_timings).dump() << '\n';
  }
  {
    auto doc = summary_to_json(result);
    if (with_timings) {
      for (std::size_t i = 0; i < result.grid.size(); ++i)
        doc["grid"][i]["fit_ms"] = mean_std_json(result.grid[i].fit_ms);
      for (std::size_t i = 0; i < result.slopes.size(); ++i)
        doc["slopes"][i]["fit_ms"] = slope_json(result.slopes[i].fit_ms);
    }
    auto out = open_out(paths.summary);
    out << doc.dump(2) << '\n';
  }
  if (emit_plot_data) {
    paths.plot_data = dir / "plot_data.csv";
    auto out = open_out(*paths.plot_data);
    out << "rule,n,metric,mean,std\n";
    for (const auto& g : result.grid) {
      auto row = [&](std::string_view metric, const MeanStd& m) {
        out << to_string(g.rule) << ',' << g.n << ',' << metric << ',' << format_double(m.mean)
            << ',' << format_double(m.std) << '\n';
      };
      row("test_error", g.test_error);
      if (g.excess_error) row("excess_error", *g.excess_error);
      row("compression_before", g.compression_before);
      row("compression_after", g.compression_after);
      row("count_before", g.count_before);
      row("count_after", g.count_after);
      if (g.boundary_concentration_before)
        row("boundary_concentration_before", *g.boundary_concentration_before);
      if (g.boundary_concentration_after)
        row("boundary_concentration_after", *g.boundary_concentration_after);
      if (with_timings) row("fit_ms", g.fit_ms);
    }
  }
  return paths;
}

}  // namespace optinet
