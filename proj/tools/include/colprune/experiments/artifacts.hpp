#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace colprune::experiments {

/// Column-oriented numeric table, the interchange format between experiment
/// runs and plots.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column; throws InvalidArgument when absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

/// Writes with 17 significant digits; NaN is written as "nan".
void write_csv(const CsvTable& table, const std::filesystem::path& path);
/// Reads a table written by write_csv (or any numeric CSV with one header line).
CsvTable read_csv(const std::filesystem::path& path);

/// Output directory of one command invocation.
class ArtifactDir {
 public:
  explicit ArtifactDir(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path(const std::string& name) const { return root_ / name; }

  void write_text(const std::string& name, const std::string& text) const;
  void write_json(const std::string& name, const nlohmann::json& j) const;
  void write_table(const std::string& name, const CsvTable& table) const;
  /// Files written so far, in order.
  const std::vector<std::string>& written() const { return written_; }

 private:
  std::filesystem::path root_;
  mutable std::vector<std::string> written_;
};

/// Everything needed to rerun a command: its name, the effective
/// configuration, the seeds used, the library version and the wall clock.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& effective_config,
                             const std::vector<std::uint64_t>& seeds, double wall_seconds,
                             const std::vector<std::string>& files);

}  // namespace colprune::experiments
