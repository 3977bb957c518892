#include "mcrd/sample.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include "mcrd/error.hpp"

namespace mcrd {

void Sample::check() const {
  if (x.empty()) throw Error(ErrorCode::InvalidInput, "sample is empty");
  if (y.size() != x.size())
    throw Error(ErrorCode::InvalidInput, "y and x have different lengths");
  if (!d.empty() && d.size() != x.size())
    throw Error(ErrorCode::InvalidInput, "d and x have different lengths");
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "non-finite x value");
  }
}

namespace {

double parse_double(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::InvalidInput,
                "malformed numeric field '" + std::string(field) + "' on line " +
                    std::to_string(line_no));
  }
  return value;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

Sample Sample::from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::InvalidInput, "empty CSV input");

  auto header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  bool has_d = false;
  if (header.size() == 3 && header[0] == "y" && header[1] == "x" && header[2] == "d") {
    has_d = true;
  } else if (header.size() == 2 && header[0] == "y" && header[1] == "x") {
    has_d = false;
  } else {
    throw Error(ErrorCode::InvalidInput, "CSV header must be 'y,x' or 'y,x,d'");
  }

  Sample s;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    auto fields = split_csv_line(sv);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::InvalidInput,
                  "wrong field count on line " + std::to_string(line_no));
    }
    s.y.push_back(parse_double(trim(fields[0]), line_no));
    s.x.push_back(parse_double(trim(fields[1]), line_no));
    if (has_d) s.d.push_back(parse_double(trim(fields[2]), line_no));
  }
  s.check();
  return s;
}

Sample Sample::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open data file: " + path);
  return from_csv(in);
}

std::size_t SortedSample::lower_bound(double value) const {
  return static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), value) - x.begin());
}

SortedSample sort_sample(const Sample& s) {
  s.check();
  const std::size_t n = s.size();
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return s.x[a] < s.x[b]; });

  SortedSample out;
  out.x.resize(n);
  out.y.resize(n);
  if (s.has_dose()) out.d.resize(n);
  out.orig_index = std::move(idx);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t j = out.orig_index[i];
    out.x[i] = s.x[j];
    out.y[i] = s.y[j];
    if (s.has_dose()) out.d[i] = s.d[j];
  }
  return out;
}

}  // namespace mcrd
