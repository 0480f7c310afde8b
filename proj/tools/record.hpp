#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace critlab::cli {

// Reals are rounded to 12 significant digits when they enter a record, so a
// record and its serialized form compare equal. NaN is written as null.
double round12(double v);

struct Series {
  std::vector<std::string> columns;  // x, y, yErr first; further columns optional
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
};

struct FitSummary {
  double slope = 0.0;
  double intercept = 0.0;
  double slopeStdErr = 0.0;
};

struct ResultRecord {
  std::string engine;
  std::string version;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> parameters;
  std::map<std::string, double> estimates;
  Series series;
  std::optional<FitSummary> fit;
  std::vector<std::string> notes;
  double wallClock = 0.0;  // seconds; the only field that differs between identical runs

  void estimate(const std::string& name, double v) { estimates[name] = round12(v); }
};

// NaN compares equal to NaN here
bool same_record(const ResultRecord& a, const ResultRecord& b);

inline const std::vector<std::string> kRecordFields{"engine", "version",  "seed", "parameters", "estimates",
                                                     "series", "fit", "notes", "wallClock"};

nlohmann::json to_json(const ResultRecord& r);
ResultRecord record_from_json(const nlohmann::json& j);  // throws PreconditionError on schema mismatch

enum class Format { json, csv, plotdata };

std::string to_string(Format f);
Format parse_format(const std::string& text);
std::string file_extension(Format f);

// json: one record per line. csv: the series of every record under one header
// "record,<columns>"; all records must share their columns. plotdata: one block
// per record of "x y yErr" rows with x, y > 0, blocks separated by two blank lines.
void emit_report(const std::vector<ResultRecord>& records, Format format, std::ostream& out);

std::vector<ResultRecord> read_records(std::istream& in, const std::string& source);

}  // namespace critlab::cli
