#include "colprune/experiments/artifacts.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <colprune/errors.hpp>
#include <colprune/report_io.hpp>

namespace colprune::experiments {

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw InvalidArgument("CSV has no column '" + name + "'");
}

std::vector<double> CsvTable::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.at(c));
  return out;
}

void write_csv(const CsvTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n' << std::setprecision(17);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw DimensionError("CSV row width " + std::to_string(row.size()) + " != header width " +
                           std::to_string(table.header.size()));
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      if (std::isnan(row[i])) {
        out << "nan";
      } else {
        out << row[i];
      }
    }
    out << '\n';
  }
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read '" + path.string() + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("'" + path.string() + "' is empty");
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.header.push_back(cell);
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream rs(line);
    std::string cell;
    while (std::getline(rs, cell, ',')) {
      try {
        row.push_back(cell == "nan" ? std::nan("") : std::stod(cell));
      } catch (const std::exception&) {
        throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": non-numeric cell '" + cell + "'");
      }
    }
    if (row.size() != t.header.size()) {
      throw DimensionError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                           std::to_string(t.header.size()) + " cells");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

ArtifactDir::ArtifactDir(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

void ArtifactDir::write_text(const std::string& name, const std::string& text) const {
  std::ofstream out(path(name));
  if (!out) throw InvalidArgument("cannot write '" + path(name).string() + "'");
  out << text;
  written_.push_back(name);
}

void ArtifactDir::write_json(const std::string& name, const nlohmann::json& j) const {
  write_text(name, j.dump(2) + "\n");
}

void ArtifactDir::write_table(const std::string& name, const CsvTable& table) const {
  write_csv(table, path(name));
  written_.push_back(name);
}

nlohmann::json make_manifest(const std::string& command, const nlohmann::json& effective_config,
                             const std::vector<std::uint64_t>& seeds, double wall_seconds,
                             const std::vector<std::string>& files) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream stamp;
  stamp << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return {{"command", command},
          {"version", version()},
          {"schema_version", kReportSchemaVersion},
          {"config", effective_config},
          {"seeds", seeds},
          {"wall_seconds", wall_seconds},
          {"finished_at", stamp.str()},
          {"files", files}};
}

}  // namespace colprune::experiments
