#include "hubmod/evalsim.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace hubmod::evalsim {

namespace {

// Platform-stable uniform on [0,1): the top 53 bits of the generator.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

robust::ScenarioDemand profile_demand(const ScheduleProblem& problem, double p) {
  DemandScenario s;
  s.p_from.assign(problem.stop_count(), p);
  s.p_to.assign(problem.stop_count(), p);
  return robust::realized_demand(problem, s);
}

}  // namespace

std::vector<robust::ScenarioDemand> sample_scenarios(const ScheduleProblem& problem, int n,
                                                     unsigned long long seed) {
  if (n < 1) throw std::invalid_argument("scenario count must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<robust::ScenarioDemand> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    robust::ScenarioDemand d;
    d.from.resize(problem.stop_count());
    d.to.resize(problem.stop_count());
    for (std::size_t i = 0; i < problem.stop_count(); ++i)
      d.from[i] = problem.mean_from[i] + uniform01(rng) * problem.dev_from[i];
    for (std::size_t i = 0; i < problem.stop_count(); ++i)
      d.to[i] = problem.mean_to[i] + uniform01(rng) * problem.dev_to[i];
    out.push_back(std::move(d));
  }
  return out;
}

EvalResult evaluate_schedule(const ScheduleProblem& problem, const Schedule& schedule,
                             const robust::ScenarioDemand& realized) {
  const robust::RecourseEvaluation ev = robust::solve_recourse_primal(problem, schedule, realized);

  EvalResult out;
  double operation = 0.0;
  for (const RouteSchedule& r : schedule.routes) operation += problem.cost_vehicle * r.vehicles;
  out.objective.operation = operation;
  out.objective.waiting = ev.waiting;
  out.objective.loss = ev.loss;
  out.objective.total = operation + ev.waiting + ev.loss;

  double lost = 0.0, total = 0.0;
  for (std::size_t i = 0; i < problem.stop_count(); ++i) {
    lost += ev.assignment.lost_from[i] + ev.assignment.lost_to[i];
    total += realized.from[i] + realized.to[i];
  }
  out.loss_rate = total > 0.0 ? std::clamp(lost / total, 0.0, 1.0) : 0.0;
  return out;
}

GapReport gap_metrics(const ScheduleProblem& problem,
                      const std::vector<std::pair<int, Schedule>>& schedules_by_gamma,
                      const std::vector<robust::ScenarioDemand>& shared_scenarios) {
  const Schedule* baseline = nullptr;
  for (const auto& [gamma, sched] : schedules_by_gamma)
    if (gamma == 0) baseline = &sched;
  if (baseline == nullptr) throw std::invalid_argument("gap_metrics needs the gamma=0 schedule");

  const robust::ScenarioDemand half = profile_demand(problem, 0.5);
  const robust::ScenarioDemand full = profile_demand(problem, 1.0);

  const auto eval_row = [&](const Schedule& sched, GammaRow& row) {
    double sum_total = 0.0, sum_rate = 0.0;
    for (const auto& d : shared_scenarios) {
      const EvalResult e = evaluate_schedule(problem, sched, d);
      sum_total += e.objective.total;
      sum_rate += e.loss_rate;
    }
    const double m = shared_scenarios.empty() ? 1.0 : static_cast<double>(shared_scenarios.size());
    row.avg_total = sum_total / m;
    row.avg_loss_rate = sum_rate / m;
    const EvalResult eh = evaluate_schedule(problem, sched, half);
    row.half_total = eh.objective.total;
    row.half_loss_rate = eh.loss_rate;
    const EvalResult ef = evaluate_schedule(problem, sched, full);
    row.full_total = ef.objective.total;
    row.full_loss_rate = ef.loss_rate;
    for (const RouteSchedule& r : sched.routes) row.vehicles += r.vehicles;
  };

  GammaRow base;
  eval_row(*baseline, base);

  GapReport report;
  for (const auto& [gamma, sched] : schedules_by_gamma) {
    GammaRow row;
    row.gamma = gamma;
    eval_row(sched, row);
    row.gaps_defined = base.avg_total > 0.0 && base.half_total > 0.0 && base.full_total > 0.0;
    if (row.gaps_defined) {
      row.gap_avg = (row.avg_total - base.avg_total) / base.avg_total;
      row.gap_half = (row.half_total - base.half_total) / base.half_total;
      row.gap_full = (row.full_total - base.full_total) / base.full_total;
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace hubmod::evalsim
