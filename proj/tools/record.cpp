#include "record.hpp"

#include <cmath>
#include <limits>

#include "config.hpp"
#include "critlab/errors.hpp"

namespace critlab::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json real(double v) { return std::isfinite(v) ? json(round12(v)) : json(nullptr); }

double real_of(const json& j, const std::string& what) {
  if (j.is_null()) return kNaN;
  if (!j.is_number()) throw PreconditionError("record field '" + what + "' is not a number");
  return j.get<double>();
}

bool same_real(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

void expect_keys(const json& j, const std::vector<std::string>& keys, const std::string& what) {
  if (!j.is_object()) throw PreconditionError(what + " is not an object");
  for (const auto& k : keys)
    if (!j.contains(k)) throw PreconditionError(what + " lacks field '" + k + "'");
  if (j.size() != keys.size()) throw PreconditionError(what + " has undocumented fields");
}

}  // namespace

double round12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  return std::stod(format_real(v));
}

void Series::add(std::vector<double> row) {
  for (double& v : row) v = round12(v);
  rows.push_back(std::move(row));
}

bool same_record(const ResultRecord& a, const ResultRecord& b) {
  auto same_rows = [](const Series& x, const Series& y) {
    if (x.columns != y.columns || x.rows.size() != y.rows.size()) return false;
    for (std::size_t i = 0; i < x.rows.size(); ++i) {
      if (x.rows[i].size() != y.rows[i].size()) return false;
      for (std::size_t k = 0; k < x.rows[i].size(); ++k)
        if (!same_real(x.rows[i][k], y.rows[i][k])) return false;
    }
    return true;
  };
  if (a.estimates.size() != b.estimates.size()) return false;
  for (const auto& [k, v] : a.estimates) {
    const auto it = b.estimates.find(k);
    if (it == b.estimates.end() || !same_real(v, it->second)) return false;
  }
  const bool fits = a.fit.has_value() == b.fit.has_value() &&
                    (!a.fit || (same_real(a.fit->slope, b.fit->slope) && same_real(a.fit->intercept, b.fit->intercept) &&
                                same_real(a.fit->slopeStdErr, b.fit->slopeStdErr)));
  return a.engine == b.engine && a.version == b.version && a.seed == b.seed && a.parameters == b.parameters &&
         same_rows(a.series, b.series) && fits && a.notes == b.notes && same_real(a.wallClock, b.wallClock);
}

json to_json(const ResultRecord& r) {
  json estimates = json::object();
  for (const auto& [k, v] : r.estimates) estimates[k] = real(v);
  json rows = json::array();
  for (const auto& row : r.series.rows) {
    json jr = json::array();
    for (double v : row) jr.push_back(real(v));
    rows.push_back(std::move(jr));
  }
  json fit = nullptr;
  if (r.fit) fit = {{"slope", real(r.fit->slope)}, {"intercept", real(r.fit->intercept)}, {"slopeStdErr", real(r.fit->slopeStdErr)}};
  return {{"engine", r.engine},
          {"version", r.version},
          {"seed", r.seed},
          {"parameters", r.parameters},
          {"estimates", std::move(estimates)},
          {"series", {{"columns", r.series.columns}, {"rows", std::move(rows)}}},
          {"fit", std::move(fit)},
          {"notes", r.notes},
          {"wallClock", real(r.wallClock)}};
}

ResultRecord record_from_json(const json& j) {
  expect_keys(j, kRecordFields, "record");
  ResultRecord r;
  try {
    r.engine = j.at("engine").get<std::string>();
    r.version = j.at("version").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.parameters = j.at("parameters").get<std::map<std::string, std::string>>();
    for (const auto& [k, v] : j.at("estimates").items()) r.estimates[k] = real_of(v, "estimates." + k);
    const json& s = j.at("series");
    expect_keys(s, {"columns", "rows"}, "series");
    r.series.columns = s.at("columns").get<std::vector<std::string>>();
    for (const auto& row : s.at("rows")) {
      std::vector<double> values;
      for (const auto& v : row) values.push_back(real_of(v, "series.rows"));
      if (values.size() != r.series.columns.size()) throw PreconditionError("series row width differs from its columns");
      r.series.rows.push_back(std::move(values));
    }
    if (const json& f = j.at("fit"); !f.is_null()) {
      expect_keys(f, {"slope", "intercept", "slopeStdErr"}, "fit");
      r.fit = FitSummary{real_of(f.at("slope"), "fit.slope"), real_of(f.at("intercept"), "fit.intercept"),
                         real_of(f.at("slopeStdErr"), "fit.slopeStdErr")};
    }
    r.notes = j.at("notes").get<std::vector<std::string>>();
    r.wallClock = real_of(j.at("wallClock"), "wallClock");
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("malformed record: ") + e.what());
  }
  return r;
}

std::string to_string(Format f) {
  switch (f) {
    case Format::json: return "json";
    case Format::csv: return "csv";
    case Format::plotdata: return "plotdata";
  }
  return "?";
}

Format parse_format(const std::string& text) {
  for (Format f : {Format::json, Format::csv, Format::plotdata})
    if (to_string(f) == text) return f;
  throw PreconditionError("unknown format '" + text + "' (json, csv, plotdata)");
}

std::string file_extension(Format f) {
  switch (f) {
    case Format::json: return ".jsonl";
    case Format::csv: return ".csv";
    case Format::plotdata: return ".dat";
  }
  return "";
}

void emit_report(const std::vector<ResultRecord>& records, Format format, std::ostream& out) {
  require(!records.empty(), "no records to report");
  auto cell = [](double v) { return std::isfinite(v) ? format_real(v) : std::string(std::isnan(v) ? "nan" : v > 0 ? "inf" : "-inf"); };
  switch (format) {
    case Format::json:
      for (const auto& r : records) out << to_json(r).dump() << '\n';
      break;
    case Format::csv: {
      const auto& columns = records.front().series.columns;
      for (const auto& r : records)
        require(r.series.columns == columns, "csv needs records with identical series columns");
      out << "record";
      for (const auto& c : columns) out << ',' << c;
      out << '\n';
      for (std::size_t i = 0; i < records.size(); ++i)
        for (const auto& row : records[i].series.rows) {
          out << i;
          for (double v : row) out << ',' << cell(v);
          out << '\n';
        }
      break;
    }
    case Format::plotdata:
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (i) out << "\n\n";
        out << "# record " << i << " engine=" << r.engine << " seed=" << r.seed << '\n';
        const auto& c = r.series.columns;
        out << "# " << (c.size() > 0 ? c[0] : "x") << ' ' << (c.size() > 1 ? c[1] : "y") << ' '
            << (c.size() > 2 ? c[2] : "yErr") << '\n';
        long skipped = 0;
        for (const auto& row : r.series.rows) {
          const double x = row.size() > 0 ? row[0] : kNaN, y = row.size() > 1 ? row[1] : kNaN;
          const double e = row.size() > 2 ? row[2] : 0.0;
          if (!(x > 0 && y > 0)) {
            ++skipped;
            continue;
          }
          out << cell(x) << ' ' << cell(y) << ' ' << cell(e) << '\n';
        }
        if (skipped) out << "# " << skipped << " rows without a positive (x, y) omitted\n";
      }
      break;
  }
}

std::vector<ResultRecord> read_records(std::istream& in, const std::string& source) {
  std::vector<ResultRecord> records;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw PreconditionError(source + ":" + std::to_string(lineNo) + ": not json (" + e.what() + ")");
    }
    try {
      records.push_back(record_from_json(j));
    } catch (const PreconditionError& e) {
      throw PreconditionError(source + ":" + std::to_string(lineNo) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace critlab::cli
