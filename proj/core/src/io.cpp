#include "mocrisk/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mocrisk {
namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << source << ":" << line << ": " << what;
  throw DataFormatError(msg.str());
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> to_int(const std::string& s) {
  std::int64_t v = 0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return v;
}

bool is_blank(const std::string& line) { return trim(line).empty(); }

}  // namespace

RawDataset parse_raw_csv(std::istream& in, const std::string& source) {
  RawDataset out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line) || trim(line).front() == '#') continue;
    const auto fields = split(line);
    if (!header_seen) {
      if (fields.size() != 2 || lower(fields[0]) != "time" || lower(fields[1]) != "cause") {
        fail(source, lineno, "expected header `time,cause`");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 2) fail(source, lineno, "expected two fields `time,cause`");
    const auto time = to_double(fields[0]);
    if (!time || !std::isfinite(*time)) fail(source, lineno, "time `" + fields[0] + "` is not a number");
    if (!(*time > 0.0)) fail(source, lineno, "failure time must be positive");
    const std::string code = lower(fields[1]);
    if (code == "c" || code == "censored" || code == "-1") {
      out.records.push_back({*time, std::nullopt});
      continue;
    }
    const auto cause = to_int(code);
    if (!cause || *cause < 0 || *cause > 2) {
      fail(source, lineno, "unknown cause code `" + fields[1] + "` (expected 0, 1, 2 or c)");
    }
    out.records.push_back({*time, static_cast<int>(*cause)});
  }
  if (!header_seen) out.warnings.push_back(source + ": empty file, no records read");
  return out;
}

RawDataset read_raw_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open " + path);
  return parse_raw_csv(in, path);
}

IngestResult ingest(const RawDataset& data, const InspectionGrid& grid, double divisor) {
  if (!(divisor > 0.0) || !std::isfinite(divisor)) throw std::invalid_argument("time divisor must be positive");
  std::vector<std::int64_t> counts(grid.cell_count(), 0);
  const auto& times = grid.times();
  for (std::size_t r = 0; r < data.records.size(); ++r) {
    const RawRecord& rec = data.records[r];
    const double t = rec.time / divisor;
    if (t > grid.horizon()) {
      ++counts[survivor_index(grid)];
      continue;
    }
    if (!rec.cause) {
      std::ostringstream msg;
      msg << "record " << r + 1 << " is censored at " << t << ", inside the monitoring window";
      throw DataFormatError(msg.str());
    }
    const auto interval = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t) - times.begin()) + 1;
    static constexpr Cause kCauseOfCode[3] = {Cause::kBoth, Cause::kOne, Cause::kTwo};
    ++counts[cell_index(interval, kCauseOfCode[*rec.cause])];
  }
  IngestResult result{CountData(std::move(counts)), data.warnings};
  if (data.records.empty() && result.warnings.empty()) result.warnings.push_back("dataset has no records");
  return result;
}

IngestResult ingest(const std::string& csv_path, const InspectionGrid& grid, double divisor) {
  return ingest(read_raw_csv(csv_path), grid, divisor);
}

void write_counts_csv(std::ostream& out, const CountData& data, const InspectionGrid& grid) {
  if (data.size() != grid.cell_count()) throw std::invalid_argument("count vector does not match the grid");
  out << "cell,count\n";
  for (std::size_t l = 0; l < data.size(); ++l) out << cell_label(grid, l) << ',' << data[l] << '\n';
}

CountData parse_counts_csv(std::istream& in, const InspectionGrid& grid, const std::string& source) {
  std::vector<std::int64_t> counts;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    const auto fields = split(line);
    if (!header_seen) {
      if (fields.size() != 2 || fields[0] != "cell" || fields[1] != "count") {
        fail(source, lineno, "expected header `cell,count`");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 2) fail(source, lineno, "expected two fields `cell,count`");
    if (counts.size() >= grid.cell_count()) fail(source, lineno, "more rows than cells in the grid");
    const std::string expected = cell_label(grid, counts.size());
    if (fields[0] != expected) fail(source, lineno, "expected cell " + expected + ", got " + fields[0]);
    const auto value = to_int(fields[1]);
    if (!value || *value < 0) fail(source, lineno, "count must be a non-negative integer");
    counts.push_back(*value);
  }
  if (counts.size() != grid.cell_count()) fail(source, lineno, "table is missing cells");
  return CountData(std::move(counts));
}

RawDataset to_records(const CountData& data, const InspectionGrid& grid) {
  if (data.size() != grid.cell_count()) throw std::invalid_argument("count vector does not match the grid");
  static constexpr int kCodeOfCause[3] = {1, 2, 0};
  RawDataset out;
  for (std::size_t l = 0; l + 1 < data.size(); ++l) {
    for (std::int64_t u = 0; u < data[l]; ++u) out.records.push_back({grid.tau(l / 3 + 1), kCodeOfCause[l % 3]});
  }
  for (std::int64_t u = 0; u < data[survivor_index(grid)]; ++u) {
    out.records.push_back({2.0 * grid.horizon(), std::nullopt});
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& field : split(text)) {
    const auto v = to_double(field);
    if (!v) throw std::invalid_argument("`" + field + "` is not a number in list `" + text + "`");
    out.push_back(*v);
  }
  if (out.empty()) throw std::invalid_argument("empty number list");
  return out;
}

}  // namespace mocrisk
