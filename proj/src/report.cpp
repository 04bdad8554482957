#include "stabcap/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "stabcap/errors.hpp"

namespace stabcap {

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write to '" + tmp.string() + "'");
    out << content;
  }
  fs::rename(tmp, target);
}

nlohmann::json make_report(const std::string& verb, std::uint64_t seed, const nlohmann::json& config,
                           const nlohmann::json& results) {
  nlohmann::json report;
  report["schema_version"] = kReportSchemaVersion;
  report["verb"] = verb;
  report["seed"] = seed;
  report["config"] = config;
  report["results"] = results;
  return report;
}

void write_report(const std::string& directory, const std::string& verb, std::uint64_t seed,
                  const nlohmann::json& config, const nlohmann::json& results) {
  const nlohmann::json report = make_report(verb, seed, config, results);
  write_file_atomic(directory + "/" + verb + "_report.json", report.dump(2) + "\n");
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) body_ += ',';
    body_ += header[i];
  }
  body_ += '\n';
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw InputError("csv row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) body_ += ',';
    body_ += cells[i];
  }
  body_ += '\n';
}

void CsvWriter::add_row(const std::vector<double>& cells) {
  std::vector<std::string> text;
  text.reserve(cells.size());
  for (double v : cells) text.push_back(format_number(v));
  add_row(text);
}

std::string CsvWriter::format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace stabcap
