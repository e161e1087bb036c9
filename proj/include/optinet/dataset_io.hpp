#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "optinet/core.hpp"

namespace optinet {

// CSV layout shared by every tool: a header row `x0,x1,...,x{d-1},label`,
// then one sample per line with features as decimal floats and the label as
// a nonnegative integer. LF line endings; a trailing CR is tolerated on read.

/// Parses the shared CSV format. The class count is max(label) + 1.
/// Malformed input throws DataError naming the offending line.
LabeledDataset read_csv(std::istream& in);
LabeledDataset load_csv(const std::filesystem::path& path);

/// Writes with shortest round-trip float formatting, so reading the output
/// back yields bit-identical coordinates.
void write_csv(std::ostream& out, const LabeledDataset& data);
void save_csv(const std::filesystem::path& path, const LabeledDataset& data);

/// Shortest decimal representation that round-trips exactly.
std::string format_double(double v);

}  // namespace optinet
