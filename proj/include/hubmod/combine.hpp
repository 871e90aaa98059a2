#pragma once

#include <vector>

#include "hubmod/model.hpp"

namespace hubmod::combine {

// Feasibility of joining two legs: by connecting travel time against the
// shorter trip time (default), or by connecting distance against the
// shorter trip distance when stop geometry is available.
enum class ConnectRule { Time, Distance };

struct GapMatrix {
  // cost[i][j] pairs FromHub route i with ToHub route j; `big` marks
  // pairings whose connection exceeds the shorter of the two trips.
  std::vector<std::vector<double>> cost;
  double big = 0.0;
};

GapMatrix build_gap_matrix(const std::vector<Route>& outs, const std::vector<Route>& backs,
                           const StopNetwork& network, ConnectRule rule = ConnectRule::Time);

// Minimum-cost perfect assignment on a square matrix; returns the column
// matched to each row.
std::vector<int> hungarian_match(const std::vector<std::vector<double>>& cost);

// Assembles round trips from a padded matching; rows or columns matched
// to dummies or at `big` cost become hub-return loops.
std::vector<RoundTrip> form_roundtrips(const std::vector<int>& match, const GapMatrix& gaps,
                                       const std::vector<Route>& outs,
                                       const std::vector<Route>& backs,
                                       const StopNetwork& network);

// build -> pad -> match -> assemble. Either side may be empty.
std::vector<RoundTrip> combine_routes(const std::vector<Route>& outs,
                                      const std::vector<Route>& backs,
                                      const StopNetwork& network,
                                      ConnectRule rule = ConnectRule::Time);

}  // namespace hubmod::combine
