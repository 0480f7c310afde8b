#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "experiment.hpp"

namespace fs = std::filesystem;
using namespace critlab;
using namespace critlab::cli;

namespace {

enum Status { kOk = 0, kPrecondition = 1, kNumerical = 2 };

int fail(Status status, const std::string& kind, const std::string& message, const ResultRecord* partial = nullptr) {
  nlohmann::json err = {{"status", int(status)}, {"kind", kind}, {"message", message}};
  if (partial) err["record"] = to_json(*partial);
  std::cerr << nlohmann::json{{"error", err}}.dump() << '\n';
  return status;
}

std::string output_path(const std::string& prefix, Format format) { return prefix + file_extension(format); }

void check_writable(const std::string& path) {
  const fs::path p(path);
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  std::error_code ec;
  require(fs::is_directory(dir, ec), "output directory '" + dir.string() + "' does not exist");
  require(!fs::is_directory(p, ec), "output path '" + path + "' is a directory");
  const auto perms = fs::status(dir, ec).permissions();
  require(!ec && (perms & fs::perms::owner_write) != fs::perms::none, "output directory '" + dir.string() + "' is not writable");
}

// the whole report is rendered first, so a failed run leaves nothing behind
void write_report(const std::vector<ResultRecord>& records, Format format, const std::string& prefix) {
  std::ostringstream text;
  emit_report(records, format, text);
  if (prefix.empty()) {
    std::cout << text.str() << std::flush;
    return;
  }
  const std::string path = output_path(prefix, format);
  std::ofstream out(path, std::ios::binary);
  require(bool(out), "cannot open '" + path + "' for writing");
  out << text.str();
  out.close();
  require(!out.fail(), "failed writing '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critical percolation, SLE and backbone numerics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", artifact_version());

  std::string configPath, prefix, formatText = "json";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::vector<std::string> inputs;

  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--out", prefix, "output file prefix (stdout when absent)");
    sub->add_option("--format", formatText, "json, csv or plotdata")->check(CLI::IsMember({"json", "csv", "plotdata"}));
  };
  for (const auto& engine : kEngines) {
    auto* sub = app.add_subcommand(engine, "run the " + engine + " engine");
    sub->add_option("--config", configPath, "key=value configuration file");
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--workers", workers, "worker threads (results do not depend on it)");
    add_output(sub);
  }
  auto* report = app.add_subcommand("report", "re-emit json-lines records in another format");
  report->add_option("inputs", inputs, "json-lines files")->required()->check(CLI::ExistingFile);
  add_output(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kPrecondition;
  }

  try {
    const Format format = parse_format(formatText);
    if (!prefix.empty()) check_writable(output_path(prefix, format));

    std::vector<ResultRecord> records;
    if (report->parsed()) {
      for (const auto& path : inputs) {
        std::ifstream in(path);
        require(bool(in), "cannot read '" + path + "'");
        auto more = read_records(in, path);
        records.insert(records.end(), more.begin(), more.end());
      }
    } else {
      const std::string engine = app.get_subcommands().front()->get_name();
      KeyValues values = configPath.empty() ? KeyValues{} : KeyValues::load(configPath);
      const auto config = make_config(engine, std::move(values), seed, workers);
      records.push_back(run_experiment(config));
    }
    write_report(records, format, prefix);
  } catch (const ConfigError& e) {
    return fail(kPrecondition, "config", e.what());
  } catch (const PreconditionError& e) {
    return fail(kPrecondition, "precondition", e.what());
  } catch (const RunFailure& e) {
    return fail(kNumerical, "numerical", e.what(), &e.partial());
  } catch (const NumericalError& e) {
    return fail(kNumerical, "numerical", e.what());
  } catch (const std::exception& e) {
    return fail(kNumerical, "internal", e.what());
  }
  return kOk;
}
