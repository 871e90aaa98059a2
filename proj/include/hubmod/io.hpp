#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hubmod/evalsim.hpp"
#include "hubmod/model.hpp"
#include "hubmod/robust.hpp"

namespace hubmod::io {

struct Config {
  std::string hub_id;
  std::optional<std::pair<double, double>> hub_coords;
  double lambda = 1.3;
  double sigma_seconds = 500.0;
  double c_o = 50.0;
  double c_w = 0.5;
  double c_l = 5.0;
  int capacity = 20;    // C
  int fleet = 200;      // B
  int h_min = 3;
  int h_max = 30;
  int k_routes = 5;
  std::string mode = "exact";  // exact | heuristic
  bool connect = false;
  std::string combine_rule = "time";  // time | distance
  std::vector<int> gamma{0};
  double ccg_tol = 1e-4;
  int iteration_limit = 50;
  unsigned long long seed = 0;
  int n_eval_scenarios = 100;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Config read_config(const std::string& path);

// Reads stops.csv and travel_times.csv from the network directory and
// returns the validated network.
StopNetwork load_network(const std::string& network_dir, const Config& config,
                         bool repair_triangle = false);

// Reads transit_stations.csv, transit_times.csv and access.csv when
// present; nullopt when the directory carries no overlay.
std::optional<TransitOverlay> load_overlay(const std::string& network_dir, const Config& config,
                                           const StopNetwork& network);

// 12-significant-digit rendering used for every float that reaches disk.
std::string format_double(double v);

void write_routes_geojson(const std::string& path, const StopNetwork& network,
                          const std::vector<Route>& routes);
std::vector<Route> read_routes_geojson(const std::string& path, const StopNetwork& network);

void write_roundtrips_json(const std::string& path, const StopNetwork& network,
                           const std::vector<RoundTrip>& trips);
std::vector<RoundTrip> read_roundtrips_json(const std::string& path, const StopNetwork& network);

struct ScheduleRecord {
  int gamma = 0;
  std::string status;
  Schedule schedule;
  std::vector<robust::CcgIteration> history;
};

void write_schedule_json(const std::string& path, const ScheduleRecord& record);
ScheduleRecord read_schedule_json(const std::string& path);

void write_ccg_history_csv(const std::string& path,
                           const std::vector<std::pair<int, std::vector<robust::CcgIteration>>>& runs);

void write_eval_report_csv(const std::string& path, const evalsim::GapReport& report);

}  // namespace hubmod::io
