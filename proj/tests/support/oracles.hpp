#pragma once

#include <optional>
#include <vector>

#include "hubmod/milp.hpp"
#include "hubmod/model.hpp"
#include "hubmod/robust.hpp"

namespace hubmod::testsupport {

// ---- route generation oracles (exhaustive, no pruning) -----------------

struct OracleRoute {
  double coverage = 0.0;
  Seconds trip_time = 0;
  std::vector<std::size_t> stops;
};

// Enumerates every feasible stop sequence by depth-first extension and
// keeps the best under (coverage, shorter trip, lexicographic ids).
// Returns nullopt when nothing with positive coverage exists.
std::optional<OracleRoute> exhaustive_mcr(const StopNetwork& network, Direction dir,
                                          const std::vector<double>& remaining,
                                          const std::vector<std::size_t>& candidates);

// Sequential disjoint construction using the exhaustive single-route
// oracle at every step.
std::vector<OracleRoute> exhaustive_k_mcr(const StopNetwork& network, Direction dir, int k);

// ---- assignment oracle --------------------------------------------------

// Minimum assignment cost over all permutations (square matrix).
double permutation_assignment_cost(const std::vector<std::vector<double>>& cost);

// ---- path oracle ---------------------------------------------------------

// All simple paths src -> dst sorted by (cost, node sequence); first k.
std::vector<std::pair<Seconds, std::vector<std::size_t>>> enumerate_k_shortest(
    const StopNetwork& network, std::size_t src, std::size_t dst, int k);

// ---- MILP / LP oracles ----------------------------------------------------

// Grid enumeration for models whose variables are all integer/binary.
std::optional<double> enumerate_milp(const milp::Model& model);

// Basic-solution enumeration for pure LPs (independent of the simplex):
// converts to equalities over nonnegative variables and scans every basis.
std::optional<double> enumerate_lp_vertices(const milp::Model& model);

// ---- two-stage robust oracle ----------------------------------------------

struct BruteForceRo {
  double objective = 0.0;
  Schedule schedule;
};

// Exhaustive min over integer schedules of [operation + worst budgeted
// scenario recourse], the recourse evaluated by the primal LP.
BruteForceRo brute_force_two_stage(const ScheduleProblem& problem, int gamma);

// All budget-feasible binary scenarios (sum p == gamma).
std::vector<DemandScenario> enumerate_budget_scenarios(const ScheduleProblem& problem, int gamma);

// Worst recourse value over the budget set for a fixed schedule, by
// enumeration of scenarios and primal LP solves.
double worst_case_recourse(const ScheduleProblem& problem, const Schedule& schedule, int gamma);

}  // namespace hubmod::testsupport
