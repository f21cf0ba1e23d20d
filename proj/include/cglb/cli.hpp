#pragma once

// Command-line front end: INI configuration, experiment commands and
// reproducible CSV/JSON output.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cglb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitCheckFailed = 2;

inline constexpr const char* kSchemaVersion = "1";

// Flat "section.key" -> value store. Every key must be read by the command
// that runs; anything left unread is reported as unknown.
class Config {
public:
  static Config from_file(const std::filesystem::path& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  // CGLB__SECTION__KEY=value overrides section.key (names lowercased).
  void apply_environment(char** envp);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::optional<double> get_optional(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated numbers.
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  // Throws ConfigError naming every key that was never read.
  void reject_unread() const;

private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> read_;
};

struct RunOptions {
  std::string command;
  std::filesystem::path config_path;
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;
};

// Resolves CGLB_SEED, CGLB_THREADS and CGLB_OUT when the flags were not given.
void apply_environment_defaults(RunOptions& opts, char** envp, bool seed_set, bool threads_set,
                                bool out_set);

const std::vector<std::string>& commands();

// Runs one command. Errors become a JSON diagnostic on `err` and exit code 1;
// failed checks give exit code 2.
int run(const RunOptions& opts, const Config& config, std::ostream& out, std::ostream& err);

// ---- output ----

// "{:.17g}" formatting so CSV values round-trip.
std::string format_number(double v);

class CsvTable {
public:
  CsvTable(std::string schema, std::vector<std::string> columns);
  void add_row(const std::vector<double>& row);
  void add_row(const std::vector<std::string>& row);
  std::size_t rows() const noexcept { return rows_.size(); }
  // First line: "# schema=<schema> version=<v>", second: the header.
  std::string str() const;
  void write(const std::filesystem::path& path) const;

private:
  std::string schema_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace cglb::cli
