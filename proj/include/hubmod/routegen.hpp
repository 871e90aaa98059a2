#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hubmod/model.hpp"

namespace hubmod::routegen {

enum class Mode { Exact, Heuristic };

// Counters for the structural checks performed during the exact search:
// the candidate set handed to each recursive call must stay inside the
// parent's reachable set, and no return value may exceed the remaining
// demand of the node's reachable set.
struct SearchStats {
  long expansions = 0;
  long subset_checks = 0;
  long subset_violations = 0;
  long bound_checks = 0;
  long bound_violations = 0;
};

struct ReachSets {
  std::vector<std::size_t> h_reach;  // extendable by vehicle
  std::vector<std::size_t> c_reach;  // coverable via one transfer; checked first
};

// Stops in `candidates` whose route extension from `from` keeps the trip
// time strictly below lambda times the alternative-mode time.
std::vector<std::size_t> reach(const StopNetwork& network, Direction dir, std::size_t from,
                               const std::vector<std::size_t>& candidates, Seconds elapsed);

// Same split against a transit overlay: transfer-coverable stops first,
// then vehicle-extendable ones among the rest.
ReachSets connect_reach(const StopNetwork& network, const TransitOverlay& overlay, Direction dir,
                        std::size_t from, const std::vector<std::size_t>& candidates,
                        Seconds elapsed);

struct GenOptions {
  Mode mode = Mode::Exact;
  const TransitOverlay* overlay = nullptr;
  SearchStats* stats = nullptr;
};

// One maximum-coverage route against the remaining demand, over the given
// candidate stops. Returns nullopt when no stop is reachable from the hub
// or no remaining demand can be covered.
std::optional<Route> max_coverage_route(const StopNetwork& network, Direction dir,
                                        const std::vector<double>& remaining_demand,
                                        const std::vector<std::size_t>& candidates,
                                        const GenOptions& options = {});

// Sequential generation of up to K mutually disjoint maximum-coverage
// routes; covered stops (physical and transfer) drop out of the demand
// and the candidate pool after each route.
std::vector<Route> generate_k_mcr(const StopNetwork& network, Direction dir, int k,
                                  const GenOptions& options = {});

}  // namespace hubmod::routegen
