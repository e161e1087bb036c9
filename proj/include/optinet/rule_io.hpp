#pragma once

#include <filesystem>

#include <json.hpp>

#include "optinet/rules.hpp"

namespace optinet {

// Rule document:
//   {"kind": "optinet", "d": 2, "M": 2, "gamma": 0.1, "k": 10, "m": 500,
//    "seed": 7, "prototypes": [[...], ...], "labels": [...],
//    "counts": [[...], ...]}
// gamma appears for optinet, k for protoknn and knn. Doubles are written in
// shortest round-trip form, so save followed by load is exact.

nlohmann::json rule_to_json(const PrototypeRule& rule);

/// Throws DataError on missing fields or inconsistent contents.
PrototypeRule rule_from_json(const nlohmann::json& doc);

void save_rule(const std::filesystem::path& path, const PrototypeRule& rule);
PrototypeRule load_rule(const std::filesystem::path& path);

}  // namespace optinet
