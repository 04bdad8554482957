#ifndef STABCAP_REPORT_HPP
#define STABCAP_REPORT_HPP

#include <json.hpp>
#include <string>
#include <vector>

namespace stabcap {

// Reports carry a schema version and the fully resolved config, so re-running
// the embedded config reproduces the report byte-for-byte.
inline constexpr int kReportSchemaVersion = 1;

// Writes content to path via a temp file + rename, creating directories.
void write_file_atomic(const std::string& path, const std::string& content);

// JSON report with schema_version, verb, seed and the resolved config.
void write_report(const std::string& directory, const std::string& verb, std::uint64_t seed,
                  const nlohmann::json& config, const nlohmann::json& results);
nlohmann::json make_report(const std::string& verb, std::uint64_t seed, const nlohmann::json& config,
                           const nlohmann::json& results);

// Plain UTF-8 CSV with a header row.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(const std::vector<std::string>& cells);
  void add_row(const std::vector<double>& cells);
  std::string str() const { return body_; }
  void write(const std::string& path) const { write_file_atomic(path, body_); }

  static std::string format_number(double v);

 private:
  std::size_t columns_;
  std::string body_;
};

}  // namespace stabcap

#endif
