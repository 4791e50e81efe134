#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>

#include "coveropt/coveropt.hpp"
#include "service.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Read-only HTTP API over a loaded coverage snapshot", "coveropt-server"};
  std::string facilities, demand, host = "127.0.0.1", cors;
  double radius = coveropt::kDefaultRadiusMiles;
  int port = 8080;
  coveropt::server::ServiceOptions options;
  app.add_option("--in-facilities", facilities)->required();
  app.add_option("--in-demand", demand)->required();
  app.add_option("--radius", radius);
  app.add_option("--capacity", options.capacity);
  app.add_option("--host", host);
  app.add_option("--port", port);
  app.add_option("--max-in-flight", options.max_in_flight);
  app.add_option("--cors-origin", options.cors_origin);
  CLI11_PARSE(app, argc, argv);

  try {
    auto snapshot = coveropt::server::make_snapshot(coveropt::read_demand_file(demand),
                                                    coveropt::read_facilities_file(facilities),
                                                    radius);
    coveropt::server::Service service(std::move(snapshot), options);
    httplib::Server http;
    coveropt::server::mount(http, service);
    std::cerr << "listening on " << host << ':' << port << '\n';
    if (!http.listen(host, port)) {
      std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
