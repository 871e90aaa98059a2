#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hubmod/time_units.hpp"

namespace hubmod {

enum class Direction { FromHub, ToHub };

inline const char* direction_name(Direction d) {
  return d == Direction::FromHub ? "from_hub" : "to_hub";
}

struct Stop {
  std::string id;
  std::optional<std::pair<double, double>> coords;  // (lat, lon), output only
  double demand_from_hub = 0.0;  // q^F, passengers/minute
  double demand_to_hub = 0.0;    // q^T
  Seconds alt_time_from_hub = 0;  // t^{m,F}, fastest alternative mode
  Seconds alt_time_to_hub = 0;    // t^{m,T}
  double alt_dist_from_hub = 0.0;  // d^F, miles
  double alt_dist_to_hub = 0.0;    // d^T
  double max_dev_from_hub = 0.0;  // Z^F, passengers/minute
  double max_dev_to_hub = 0.0;    // Z^T
};

// Stops are indexed 0..n-1; the hub is node index n.
class StopNetwork {
 public:
  std::string hub_id;
  std::optional<std::pair<double, double>> hub_coords;
  std::vector<Stop> stops;

  // lambda is kept as an exact rational so deviation tests are integer
  // comparisons; decimal inputs like 1.3 convert without rounding.
  double lambda = 1.3;
  std::int64_t lambda_num = 13;
  std::int64_t lambda_den = 10;

  void set_lambda(double value);

  // The reach test of the generation algorithms: candidate travel time
  // strictly below lambda times the alternative-mode time.
  bool within_deviation(Seconds candidate, Seconds alt) const {
    return candidate * lambda_den < lambda_num * alt;
  }

  std::size_t stop_count() const { return stops.size(); }
  std::size_t hub_index() const { return stops.size(); }
  std::size_t node_count() const { return stops.size() + 1; }

  Seconds travel(std::size_t from, std::size_t to) const {
    return travel_time_[from * node_count() + to];
  }
  // Travel time oriented along the given direction: for ToHub routes the
  // route is built outward from the hub over the transposed matrix.
  Seconds travel_dir(std::size_t from, std::size_t to, Direction d) const {
    return d == Direction::FromHub ? travel(from, to) : travel(to, from);
  }

  double demand(std::size_t stop, Direction d) const {
    return d == Direction::FromHub ? stops[stop].demand_from_hub : stops[stop].demand_to_hub;
  }
  Seconds alt_time(std::size_t stop, Direction d) const {
    return d == Direction::FromHub ? stops[stop].alt_time_from_hub : stops[stop].alt_time_to_hub;
  }
  double alt_dist(std::size_t stop, Direction d) const {
    return d == Direction::FromHub ? stops[stop].alt_dist_from_hub : stops[stop].alt_dist_to_hub;
  }
  double max_dev(std::size_t stop, Direction d) const {
    return d == Direction::FromHub ? stops[stop].max_dev_from_hub : stops[stop].max_dev_to_hub;
  }

  std::optional<std::size_t> stop_index(const std::string& id) const {
    for (std::size_t i = 0; i < stops.size(); ++i)
      if (stops[i].id == id) return i;
    return std::nullopt;
  }

  void set_travel_matrix(std::vector<Seconds> m) { travel_time_ = std::move(m); }
  const std::vector<Seconds>& travel_matrix() const { return travel_time_; }

 private:
  std::vector<Seconds> travel_time_;  // (n+1) x (n+1), row major
};

struct TransitOverlay {
  std::vector<std::string> stations;
  std::vector<Seconds> station_time;  // |S| x |S|, diagonal 0
  // access_time[stop-or-hub node][station]; negative = unreachable.
  std::vector<std::vector<Seconds>> access_time;
  Seconds sigma = 0;  // per-transfer inconvenience

  std::size_t station_count() const { return stations.size(); }
  Seconds station_travel(std::size_t a, std::size_t b) const {
    return station_time[a * stations.size() + b];
  }
  bool has_access(std::size_t node, std::size_t station) const {
    return access_time[node][station] >= 0;
  }
};

struct Route {
  Direction direction = Direction::FromHub;
  // Stop indices ordered hub-outward (increasing cum_time). For ToHub
  // routes the vehicle drives the reverse order, ending at the hub.
  std::vector<std::size_t> stops;
  std::vector<Seconds> cum_time;  // time between each stop and the hub
  std::vector<std::size_t> transfer_covered;  // sorted; empty without overlay
  Seconds trip_time = 0;
  double coverage = 0.0;  // passengers/minute at generation time

  bool empty() const { return stops.empty(); }
  std::size_t terminal() const { return stops.back(); }  // endpoint away from hub
};

struct RoundTrip {
  Route out;   // FromHub leg; may be empty for a return-only trip
  Route back;  // ToHub leg; may be empty for a hub-return loop
  Seconds connect_time = 0;
  Seconds total_time = 0;  // T_s
  // Stops served per direction (physical + transfer covered), sorted.
  std::vector<std::size_t> serves_from;
  std::vector<std::size_t> serves_to;
};

struct ScheduleProblem {
  std::vector<RoundTrip> roundtrips;
  int fleet_size = 0;    // B
  int capacity = 0;      // C, seats per vehicle
  int headway_min = 1;   // minutes
  int headway_max = 1;   // minutes
  double cost_vehicle = 0.0;  // c_o, $/vehicle
  double cost_wait = 0.0;     // c_w, $/minute
  double cost_loss = 0.0;     // c_l, $/mile
  std::vector<double> mean_from, mean_to;      // D-bar per stop
  std::vector<double> dev_from, dev_to;        // Z per stop
  std::vector<double> loss_dist_from, loss_dist_to;  // d per stop, miles
  int gamma = 0;  // uncertainty budget, in [0, 2N]

  std::size_t route_count() const { return roundtrips.size(); }
  std::size_t stop_count() const { return mean_from.size(); }
};

struct RouteSchedule {
  int vehicles = 0;  // y_s
  int headway = 0;   // h_s, minutes; 0 when not operated
  bool operated = false;  // kappa_s
};

struct ObjectiveBreakdown {
  double operation = 0.0;
  double waiting = 0.0;
  double loss = 0.0;
  double total = 0.0;
};

struct Schedule {
  std::vector<RouteSchedule> routes;
  ObjectiveBreakdown objective;
};

// Binary in the budget set; evaluation additionally permits fractional
// entries (worst-case stress profiles).
struct DemandScenario {
  std::vector<double> p_from, p_to;

  bool operator==(const DemandScenario& o) const {
    return p_from == o.p_from && p_to == o.p_to;
  }
};

struct ValidationIssue {
  enum class Kind {
    MissingHub,
    DuplicateStop,
    NegativeValue,
    NonFiniteValue,
    TriangleInequality,
    MissingEntry,
  };
  Kind kind;
  std::string detail;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);
  const std::vector<ValidationIssue>& issues() const { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

// Raw, unvalidated network description as parsed from input tables.
struct NetworkInput {
  std::string hub_id;
  std::optional<std::pair<double, double>> hub_coords;
  std::vector<Stop> stops;
  // Dense (n+1)x(n+1) matrix in stop order with the hub last; negative
  // entries mark missing values.
  std::vector<Seconds> travel_time;
  double lambda = 1.3;
};

// Checks the modelling assumptions (nonnegative finite inputs, triangle
// inequality, hub not among stops) and returns the validated network.
// Throws ValidationError listing every violation. With repair_triangle,
// triangle-inequality violations are fixed by a shortest-path closure
// instead of reported.
StopNetwork validate_network(const NetworkInput& input, bool repair_triangle = false);

// Re-checks a constructed route against its defining inequalities,
// independently of the search that produced it: recomputes cum_time from
// the travel matrix, verifies strictly increasing times, no repeated
// stops, the deviation constraint at every visited stop and the transfer
// inequality at every transfer-covered stop.
void check_route(const StopNetwork& network, const Route& route,
                 const TransitOverlay* overlay = nullptr);

// T_s and the served-stop sets from the two legs.
RoundTrip make_round_trip(const StopNetwork& network, Route out, Route back);

// Cheapest one-transfer path between node a (stop or hub) and node b:
// min over station pairs (k,k') of access(a,k) + station(k,k') +
// access(k',b). Negative when no station pair is accessible.
Seconds min_transfer_cost(const TransitOverlay& overlay, std::size_t a, std::size_t b);

}  // namespace hubmod
