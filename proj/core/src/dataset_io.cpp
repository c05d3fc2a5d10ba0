#include "factorial/dataset_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "factorial/errors.hpp"

namespace factorial {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

std::string trimmed(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_outcome(const std::string& raw, std::size_t line) {
  const std::string s = trimmed(raw);
  if (s.empty()) throw ParseError("line " + std::to_string(line) + ": empty y value", line);
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw ParseError("line " + std::to_string(line) + ": cannot parse y value \"" + s + "\"",
                     line);
  if (!std::isfinite(value))
    throw ParseError("line " + std::to_string(line) + ": non-finite y value \"" + s + "\"",
                     line);
  return value;
}

int parse_level(const std::string& raw, int column, std::size_t line) {
  const std::string s = trimmed(raw);
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw ParseError("line " + std::to_string(line) + ": z" + std::to_string(column) +
                       " must be 0 or 1, got \"" + s + "\"",
                   line);
}

}  // namespace

FactorialDataset parse_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;

  // Header: y,z1,...,zK.
  if (!std::getline(in, line)) throw ParseError("empty input: missing header", 0);
  ++line_no;
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || trimmed(header[0]) != "y")
    throw ParseError("header must be y,z1,...,zK", line_no);
  const int K = static_cast<int>(header.size()) - 1;
  if (K > kMaxFactors)
    throw ParseError("too many factors: " + std::to_string(K) + " > " +
                         std::to_string(kMaxFactors),
                     line_no);
  for (int k = 1; k <= K; ++k)
    if (trimmed(header[static_cast<std::size_t>(k)]) != "z" + std::to_string(k))
      throw ParseError("header column " + std::to_string(k + 1) + " must be z" +
                           std::to_string(k),
                       line_no);

  FactorialDataset data;
  data.K = K;
  while (std::getline(in, line)) {
    ++line_no;
    if (trimmed(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    data.y.push_back(parse_outcome(fields[0], line_no));
    TreatmentLevel z;
    for (int k = 1; k <= K; ++k)
      if (parse_level(fields[static_cast<std::size_t>(k)], k, line_no))
        z.bits |= std::uint32_t{1} << (k - 1);
    data.z.push_back(z);
  }
  return data;
}

FactorialDataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path, 0);
  return parse_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const FactorialDataset& dataset) {
  out << "y";
  for (int k = 1; k <= dataset.K; ++k) out << ",z" << k;
  out << "\n";
  char buf[40];
  for (std::size_t i = 0; i < dataset.unit_count(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", dataset.y[i]);
    out << buf;
    for (int k = 1; k <= dataset.K; ++k) out << ',' << dataset.z[i].factor_level(k);
    out << "\n";
  }
}

void write_dataset_csv(const std::string& path, const FactorialDataset& dataset) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file: " + path);
  write_dataset_csv(out, dataset);
}

}  // namespace factorial
