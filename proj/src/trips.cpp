#include "krp/trips.hpp"

#include <fstream>
#include <sstream>

namespace krp {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

DemandDistribution ingest_trips(std::istream& input, std::int64_t zone_count,
                                const TripIngestOptions& options) {
  if (zone_count < 1) fail(Errc::invalid_argument, "zone_count must be >= 1");
  std::string line;
  if (!std::getline(input, line)) fail(Errc::empty_file, "trip file has no header");

  const auto header = split_csv_line(line);
  std::size_t column = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (trim(header[i]) == options.zone_column) {
      column = i;
      break;
    }
  if (column == header.size())
    fail(Errc::parse_error, "column '" + options.zone_column + "' not found in header");

  std::vector<std::int64_t> counts(static_cast<std::size_t>(zone_count), 0);
  std::int64_t total = 0;
  std::int64_t line_no = 1;
  while (std::getline(input, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (column >= cells.size())
      fail(Errc::parse_error, "line " + std::to_string(line_no) + " has too few columns");
    const std::string raw = trim(cells[column]);

    std::int64_t zone = -1;
    if (options.zone_map) {
      const auto it = options.zone_map->find(raw);
      if (it == options.zone_map->end())
        fail(Errc::unknown_zone,
             "unknown zone '" + raw + "' at line " + std::to_string(line_no));
      zone = it->second;
    } else {
      try {
        std::size_t used = 0;
        zone = std::stoll(raw, &used);
        if (used != raw.size()) zone = -1;
      } catch (const std::exception&) {
        zone = -1;
      }
    }
    if (zone < 0 || zone >= zone_count)
      fail(Errc::unknown_zone, "zone '" + raw + "' out of range at line " + std::to_string(line_no));
    ++counts[static_cast<std::size_t>(zone)];
    ++total;
  }
  if (total == 0) fail(Errc::empty_file, "trip file has no data rows");

  std::vector<double> probs(counts.size());
  for (std::size_t z = 0; z < counts.size(); ++z)
    probs[z] = static_cast<double>(counts[z]) / static_cast<double>(total);
  return DemandDistribution::validated(std::move(probs));
}

DemandDistribution ingest_trips_file(const std::filesystem::path& path, std::int64_t zone_count,
                                     const TripIngestOptions& options) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path.string());
  return ingest_trips(in, zone_count, options);
}

}  // namespace krp
