#include "optinet/rule_io.hpp"

#include <fstream>

#include "optinet/error.hpp"

namespace optinet {

nlohmann::json rule_to_json(const PrototypeRule& rule) {
  nlohmann::json doc;
  doc["kind"] = std::string(to_string(rule.kind));
  doc["d"] = rule.dim();
  doc["M"] = rule.num_classes;
  if (rule.gamma) doc["gamma"] = *rule.gamma;
  if (rule.k) doc["k"] = *rule.k;
  doc["m"] = rule.m;
  doc["seed"] = rule.seed;
  auto protos = nlohmann::json::array();
  auto counts = nlohmann::json::array();
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto p = rule.prototypes[i];
    protos.push_back(std::vector<double>(p.begin(), p.end()));
    const auto v = rule.votes(i);
    counts.push_back(std::vector<std::uint64_t>(v.begin(), v.end()));
  }
  doc["prototypes"] = std::move(protos);
  doc["labels"] = rule.labels;
  doc["counts"] = std::move(counts);
  return doc;
}

PrototypeRule rule_from_json(const nlohmann::json& doc) {
  try {
    PrototypeRule rule;
    rule.kind = parse_rule_kind(doc.at("kind").get<std::string>());
    const auto d = doc.at("d").get<std::size_t>();
    rule.num_classes = doc.at("M").get<int>();
    if (doc.contains("gamma")) rule.gamma = doc["gamma"].get<double>();
    if (doc.contains("k")) rule.k = doc["k"].get<std::size_t>();
    rule.m = doc.at("m").get<std::size_t>();
    rule.seed = doc.value("seed", std::uint64_t{0});
    rule.prototypes = PointSet(d);
    for (const auto& row : doc.at("prototypes")) {
      const auto p = row.get<std::vector<double>>();
      rule.prototypes.push_back(p);
    }
    rule.labels = doc.at("labels").get<std::vector<Label>>();
    for (const auto& row : doc.at("counts")) {
      const auto c = row.get<std::vector<std::uint64_t>>();
      if (c.size() != static_cast<std::size_t>(rule.num_classes))
        throw DataError("rule json: counts row length differs from M");
      rule.counts.insert(rule.counts.end(), c.begin(), c.end());
    }
    rule.validate();
    return rule;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("rule json: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("rule json: ") + e.what());
  }
}

void save_rule(const std::filesystem::path& path, const PrototypeRule& rule) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << rule_to_json(rule).dump() << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

PrototypeRule load_rule(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("rule json " + path.string() + ": " + e.what());
  }
  return rule_from_json(doc);
}

}  // namespace optinet
