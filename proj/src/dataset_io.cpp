#include "optinet/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

#include "optinet/error.hpp"

namespace optinet {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& msg) {
  throw DataError("csv line " + std::to_string(line_no) + ": " + msg);
}

}  // namespace

LabeledDataset read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("csv: empty input (missing header)");
  ++line_no;
  const auto header = split_commas(trim(line));
  if (header.size() < 2) fail(line_no, "header needs at least one feature and a label");
  const std::size_t dim = header.size() - 1;
  for (std::size_t i = 0; i < dim; ++i) {
    if (trim(header[i]) != "x" + std::to_string(i))
      fail(line_no, "expected header column 'x" + std::to_string(i) + "'");
  }
  if (trim(header.back()) != "label") fail(line_no, "last header column must be 'label'");

  LabeledDataset data;
  data.points = PointSet(dim);
  std::vector<double> row(dim);
  Label max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto fields = split_commas(body);
    if (fields.size() != dim + 1)
      fail(line_no, "expected " + std::to_string(dim + 1) + " columns, got " +
                        std::to_string(fields.size()));
    for (std::size_t i = 0; i < dim; ++i) {
      const auto f = trim(fields[i]);
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[i]);
      if (ec != std::errc{} || ptr != f.data() + f.size())
        fail(line_no, "bad number '" + std::string(f) + "' in column " + std::to_string(i));
      if (!std::isfinite(row[i])) fail(line_no, "non-finite feature");
    }
    const auto lf = trim(fields.back());
    Label label = 0;
    const auto [ptr, ec] = std::from_chars(lf.data(), lf.data() + lf.size(), label);
    if (ec != std::errc{} || ptr != lf.data() + lf.size() || label < 0)
      fail(line_no, "bad label '" + std::string(lf) + "'");
    data.points.push_back(row);
    data.labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  if (data.labels.empty()) throw DataError("csv: no data rows");
  data.num_classes = max_label + 1;
  return data;
}

LabeledDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_csv(in);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw DataError("format_double failed");
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const LabeledDataset& data) {
  data.validate();
  const std::size_t d = data.dim();
  for (std::size_t i = 0; i < d; ++i) out << 'x' << i << ',';
  out << "label\n";
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto p = data.points[r];
    for (std::size_t i = 0; i < d; ++i) out << format_double(p[i]) << ',';
    out << data.labels[r] << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const LabeledDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_csv(out, data);
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace optinet
