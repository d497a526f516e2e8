#pragma once

// Dataset ingestion: raw `time,cause` records and binned count tables.

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mocrisk/estimation.hpp"
#include "mocrisk/model.hpp"

namespace mocrisk {

/// Malformed input file; the message carries the source and line number.
class DataFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RawRecord {
  double time;
  /// 1, 2 or 0 (both causes); empty for a censored unit.
  std::optional<int> cause;
};

struct RawDataset {
  std::vector<RawRecord> records;
  std::vector<std::string> warnings;
};

/// Parses CSV with header `time,cause`. Cause is 0, 1 or 2; `c`, `censored`
/// or `-1` mark a unit still running at `time`.
RawDataset parse_raw_csv(std::istream& in, const std::string& source = "<stream>");
RawDataset read_raw_csv(const std::string& path);

struct IngestResult {
  CountData counts;
  std::vector<std::string> warnings;
};

/// Divides every time by `divisor` and bins by interval and cause. Times past
/// tau_K count as survivors whatever their cause; a censored unit inside the
/// monitoring window cannot be binned and is rejected.
IngestResult ingest(const RawDataset& data, const InspectionGrid& grid, double divisor = 1.0);
IngestResult ingest(const std::string& csv_path, const InspectionGrid& grid, double divisor = 1.0);

/// Counts as `cell,count` rows labelled N11, N12, N10, ..., Ns.
void write_counts_csv(std::ostream& out, const CountData& data, const InspectionGrid& grid);
CountData parse_counts_csv(std::istream& in, const InspectionGrid& grid, const std::string& source = "<stream>");

/// Synthetic records that bin back to `data`: failures at their interval's
/// right end point, survivors censored at twice the horizon.
RawDataset to_records(const CountData& data, const InspectionGrid& grid);

/// Comma separated doubles, e.g. "0.2,0.3,0.4".
std::vector<double> parse_double_list(const std::string& text);

}  // namespace mocrisk
