#include <doctest.h>

#include <sstream>

#include "krp/trips.hpp"

using namespace krp;

TEST_SUITE("trips") {

TEST_CASE("counts pickups per zone") {
  std::istringstream csv("PULocationID,fare\n0,10\n0,11\n1,12\n2,13\n");
  const DemandDistribution d = ingest_trips(csv, 3);
  CHECK(d.probs == std::vector<double>{0.5, 0.25, 0.25});
}

TEST_CASE("single hot zone becomes a point mass") {
  std::istringstream csv("PULocationID\n1\n1\n1\n");
  const DemandDistribution d = ingest_trips(csv, 4);
  CHECK(d.probs == std::vector<double>{0, 1, 0, 0});
}

TEST_CASE("zones outside the range are rejected with the line number") {
  std::istringstream csv("PULocationID\n0\n7\n");
  try {
    ingest_trips(csv, 3);
    FAIL("expected unknown_zone");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_zone);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("zone column is configurable and quoted cells parse") {
  std::istringstream csv("fare,\"pickup\"\n1.5,\"2\"\n2.5,0\n");
  TripIngestOptions opt;
  opt.zone_column = "pickup";
  const DemandDistribution d = ingest_trips(csv, 3, opt);
  CHECK(d.probs == std::vector<double>{0.5, 0, 0.5});
}

TEST_CASE("missing column and empty files are errors") {
  std::istringstream missing("foo,bar\n1,2\n");
  CHECK_THROWS_AS(ingest_trips(missing, 3), Error);
  std::istringstream header_only("PULocationID\n");
  CHECK_THROWS_AS(ingest_trips(header_only, 3), Error);
  std::istringstream blank("");
  CHECK_THROWS_AS(ingest_trips(blank, 3), Error);
}

TEST_CASE("sparse raw ids remap through the zone map") {
  std::istringstream csv("PULocationID\n132\n132\n7\n");
  TripIngestOptions opt;
  opt.zone_map = std::map<std::string, std::int64_t>{{"132", 0}, {"7", 1}};
  const DemandDistribution d = ingest_trips(csv, 2, opt);
  CHECK(d.probs[0] == doctest::Approx(2.0 / 3.0));
  CHECK(d.probs[1] == doctest::Approx(1.0 / 3.0));

  std::istringstream unknown("PULocationID\n33\n");
  CHECK_THROWS_AS(ingest_trips(unknown, 2, opt), Error);
}

}  // TEST_SUITE
