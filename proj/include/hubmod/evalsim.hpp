#pragma once

#include <utility>
#include <vector>

#include "hubmod/model.hpp"
#include "hubmod/robust.hpp"

namespace hubmod::evalsim {

// Demand realizations D = Dbar + u * Z with u i.i.d. uniform on [0,1],
// reproducible by seed across platforms.
std::vector<robust::ScenarioDemand> sample_scenarios(const ScheduleProblem& problem, int n,
                                                     unsigned long long seed);

struct EvalResult {
  ObjectiveBreakdown objective;
  double loss_rate = 0.0;  // lost / realized demand; 0 when no demand
};

// Operator's best assignment (recourse LP) under the realized demand.
EvalResult evaluate_schedule(const ScheduleProblem& problem, const Schedule& schedule,
                             const robust::ScenarioDemand& realized);

struct GammaRow {
  int gamma = 0;
  int vehicles = 0;
  double avg_total = 0.0, avg_loss_rate = 0.0;
  double half_total = 0.0, half_loss_rate = 0.0;  // p = 0.5 profile
  double full_total = 0.0, full_loss_rate = 0.0;  // p = 1 profile
  double gap_avg = 0.0;   // (avg_total - avg_total[0]) / avg_total[0]
  double gap_half = 0.0;
  double gap_full = 0.0;
  bool gaps_defined = true;  // false when the gamma=0 baseline cost is 0
};

struct GapReport {
  std::vector<GammaRow> rows;
};

// Cost-effectiveness of each schedule against the gamma=0 baseline over a
// shared random scenario set plus the two deterministic stress profiles.
GapReport gap_metrics(const ScheduleProblem& problem,
                      const std::vector<std::pair<int, Schedule>>& schedules_by_gamma,
                      const std::vector<robust::ScenarioDemand>& shared_scenarios);

}  // namespace hubmod::evalsim
