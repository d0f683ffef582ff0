#ifndef KRP_TRIPS_HPP
#define KRP_TRIPS_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "krp/core.hpp"

namespace krp {

struct TripIngestOptions {
  std::string zone_column = "PULocationID";
  // Maps raw zone ids (as they appear in the CSV) to dense indices in
  // [0, zone_count); absent means ids are already dense integers.
  std::optional<std::map<std::string, std::int64_t>> zone_map;
};

// Empirical pickup distribution from a headered trip CSV:
// probs[z] = count(z) / total trips.
DemandDistribution ingest_trips(std::istream& input, std::int64_t zone_count,
                                const TripIngestOptions& options = {});

DemandDistribution ingest_trips_file(const std::filesystem::path& path, std::int64_t zone_count,
                                     const TripIngestOptions& options = {});

}  // namespace krp

#endif
