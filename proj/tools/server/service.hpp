#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <vector>

#include "coveropt/coveropt.hpp"

namespace httplib {
class Server;
}

namespace coveropt::server {

// Everything the endpoints read. Built once, never mutated.
struct Snapshot {
  double radius_miles = kDefaultRadiusMiles;
  std::vector<DemandPoint> demand;
  std::vector<FacilitySite> facilities;
  SpatialIndex demand_index;
  CoverageMatrix matrix;  // candidates: demand centroids
  CoverageField field;
  CoveredMask baseline;
  CoverageSplit split;
  std::vector<QuantilePoint> quantiles;  // 99-point grid, empty without distances
};

std::shared_ptr<const Snapshot> make_snapshot(std::vector<DemandPoint> demand,
                                              std::vector<FacilitySite> facilities,
                                              double radius_miles);

struct ServiceOptions {
  Persons capacity = kDefaultCapacity;
  int max_in_flight = 2;           // concurrent optimizer requests
  std::size_t max_whatif_sites = 50;
  std::size_t max_samples = 50000;
  std::size_t max_patience = 100000;
  int max_k = 100;
  std::string cors_origin;         // empty: no CORS headers
};

struct Response {
  int status = 200;
  std::string body;
};

/// Endpoint logic, independent of the HTTP transport.
class Service {
 public:
  Service(std::shared_ptr<const Snapshot> snapshot, ServiceOptions options);

  Response health() const;
  Response coverage() const;
  Response whatif(const std::string& body) const;
  Response greedy(const std::string& body);
  Response rearrange(const std::string& body);

  const ServiceOptions& options() const { return options_; }

 private:
  std::shared_ptr<const Snapshot> snapshot_;
  ServiceOptions options_;
  std::atomic<int> in_flight_{0};
};

// Registers the /v1 routes on an httplib server.
void mount(httplib::Server& http, Service& service);

}  // namespace coveropt::server
