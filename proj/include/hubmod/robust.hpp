#pragma once

#include <cstddef>
#include <vector>

#include "hubmod/milp.hpp"
#include "hubmod/model.hpp"

namespace hubmod::robust {

// Serving pairs (route, stop) per direction, derived from the round
// trips; routes are pairwise disjoint so each stop has at most one
// serving route per direction, but the maps stay general.
struct ServingIndex {
  std::vector<std::vector<std::size_t>> from_stops;  // per route, sorted
  std::vector<std::vector<std::size_t>> to_stops;
  std::vector<std::vector<int>> from_routes;  // per stop
  std::vector<std::vector<int>> to_routes;

  static ServingIndex build(const ScheduleProblem& problem);
};

// Served and lost demand rates: X indexed [route][stop], L by stop.
struct Assignment {
  std::vector<std::vector<double>> served_from, served_to;
  std::vector<double> lost_from, lost_to;
};

// Realized demand per stop and direction.
struct ScenarioDemand {
  std::vector<double> from, to;
};

ScenarioDemand realized_demand(const ScheduleProblem& problem, const DemandScenario& scenario);

// F_operation = c_o sum y_s; F_waiting charges half a headway per served
// passenger; F_loss charges the alternative-mode distance per lost one.
ObjectiveBreakdown objective_components(const Schedule& schedule, const Assignment& assignment,
                                        const ScheduleProblem& problem);

// The operator's best passenger assignment for a fixed schedule under a
// realized demand: an LP over X, L >= 0 with per-route capacity,
// per-stop conservation (loss absorbs any excess) and service bounds.
struct RecoursePrimal {
  milp::Model model;
  // variable ids
  std::vector<std::vector<int>> x_from, x_to;  // aligned with ServingIndex stop lists
  std::vector<int> l_from, l_to;
  ServingIndex serving;
};

RecoursePrimal build_recourse_primal(const ScheduleProblem& problem, const Schedule& schedule,
                                     const ScenarioDemand& demand);

// Convenience: build, solve, decode.
struct RecourseEvaluation {
  Assignment assignment;
  double waiting = 0.0;
  double loss = 0.0;
  double objective = 0.0;  // waiting + loss
};
RecourseEvaluation solve_recourse_primal(const ScheduleProblem& problem, const Schedule& schedule,
                                         const ScenarioDemand& demand);

// Dual of the recourse LP with the budgeted scenario variables p folded
// in; products of p with the conservation and service-bound duals are
// linearized exactly (p is binary). Solving it yields the worst-case
// scenario for the fixed schedule.
struct RecourseDualMilp {
  milp::Model model;
  std::vector<int> p_from, p_to;  // binary scenario variables per stop
  double big_m = 0.0;
};

RecourseDualMilp build_recourse_dual_milp(const ScheduleProblem& problem, const Schedule& schedule,
                                          int gamma);

// Scenario-pooled master: binary headway expansion h_s = sum 2^k g_s^k,
// exact envelopes for g*y and g*X products, one recourse copy per pooled
// scenario bounded below through eta.
struct MasterModel {
  milp::Model model;
  std::vector<int> y, kappa;
  std::vector<std::vector<int>> g, z;  // per route, per bit
  int eta = -1;
  int bits = 0;  // H + 1
};

MasterModel build_master(const ScheduleProblem& problem, const std::vector<DemandScenario>& pool);

Schedule decode_master(const MasterModel& master, const milp::Solution& solution,
                       const ScheduleProblem& problem);

struct CcgIteration {
  int iteration = 0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double gap = 0.0;
  double seconds = 0.0;
};

enum class InitialScenario { Deterministic, Random };

struct CcgOptions {
  double rel_tol = 1e-4;
  int iteration_limit = 50;
  InitialScenario initial = InitialScenario::Deterministic;
  unsigned seed = 0;
  milp::MilpOptions milp;
};

struct CcgResult {
  Schedule schedule;
  std::vector<CcgIteration> history;
  milp::SolveStatus status = milp::SolveStatus::GapLimit;
  double objective = 0.0;  // worst-case total cost of the returned schedule
};

CcgResult ccg_solve(const ScheduleProblem& problem, int gamma, const CcgOptions& options = {});

// Nominal problem: the master with the all-zero scenario pool.
Schedule solve_nominal(const ScheduleProblem& problem, const milp::MilpOptions& options = {});

}  // namespace hubmod::robust
