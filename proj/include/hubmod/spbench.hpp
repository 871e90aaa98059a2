#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "hubmod/model.hpp"

namespace hubmod::spbench {

// Benchmark routes are node paths between the hub and a terminal stop,
// kept as full node sequences so link segments are recoverable.
struct PathRoute {
  std::vector<std::size_t> nodes;  // includes the hub endpoint
  Seconds travel_time = 0;
  double weight = 0.0;  // W^r
};

struct WeightedRouteSet {
  std::vector<PathRoute> routes;
  std::vector<double> stop_weight;  // W_i
  // Per stop: (route index, P_i^r) over routes passing the stop. Only
  // filled by assign_demand; expansion and pruning leave it empty.
  std::vector<std::vector<std::pair<int, double>>> assignment;
};

// Up to k loopless shortest paths between the hub and every stop, by
// travel time (Yen). FromHub orients paths hub->stop.
std::vector<PathRoute> k_shortest_routes(const StopNetwork& network, int k, Direction dir);

// Softmax split of each stop's demand over the routes that pass it, with
// the travel-time exponent measured in `softmax_unit_minutes`; stop and
// route weights aggregate the assigned demand.
WeightedRouteSet assign_demand(std::vector<PathRoute> routes, const StopNetwork& network,
                               Direction dir, double softmax_unit_minutes = 10.0);

// Crossover expansion at shared link segments: a sub-route splices once,
// an incomparable pair splices both ways; duplicates and routes with a
// repeated link are dropped.
WeightedRouteSet expand_routes(const WeightedRouteSet& set, const StopNetwork& network);

struct PruneThresholds {
  double min_length = 0.0;     // l_thd, euclidean units
  double max_circuity = 10.0;  // C_thd
  double similarity = 0.0;     // S_thd
  bool invert_similarity = false;
};

// Geometric and similarity pruning; requires stop and hub coordinates.
WeightedRouteSet prune_routes(const WeightedRouteSet& set, const StopNetwork& network,
                              const PruneThresholds& thresholds);

// Demand covered by the union of the first m routes in descending weight
// order, for m = 1..route count.
std::vector<double> cumulative_coverage(const WeightedRouteSet& set, const StopNetwork& network,
                                        Direction dir);

}  // namespace hubmod::spbench
