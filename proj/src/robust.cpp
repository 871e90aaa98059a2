#include "hubmod/robust.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace hubmod::robust {

namespace {

using milp::Model;
using milp::Relation;
using milp::Sense;
using milp::Term;

std::string id2(const char* base, std::size_t a, std::size_t b) {
  return std::string(base) + "_" + std::to_string(a) + "_" + std::to_string(b);
}

int headway_bits(int h_max) {
  int bits = 0;
  while ((1 << bits) < h_max + 1) ++bits;  // ceil(log2(h_max+1))
  return bits;
}

double max_loss_distance(const ScheduleProblem& p) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.stop_count(); ++i)
    d = std::max({d, p.loss_dist_from[i], p.loss_dist_to[i]});
  return d;
}

}  // namespace

ServingIndex ServingIndex::build(const ScheduleProblem& problem) {
  const std::size_t n = problem.stop_count();
  ServingIndex idx;
  idx.from_stops.resize(problem.route_count());
  idx.to_stops.resize(problem.route_count());
  idx.from_routes.assign(n, {});
  idx.to_routes.assign(n, {});
  for (std::size_t s = 0; s < problem.route_count(); ++s) {
    idx.from_stops[s] = problem.roundtrips[s].serves_from;
    idx.to_stops[s] = problem.roundtrips[s].serves_to;
    for (std::size_t i : idx.from_stops[s]) idx.from_routes[i].push_back(static_cast<int>(s));
    for (std::size_t i : idx.to_stops[s]) idx.to_routes[i].push_back(static_cast<int>(s));
  }
  return idx;
}

ScenarioDemand realized_demand(const ScheduleProblem& problem, const DemandScenario& scenario) {
  const std::size_t n = problem.stop_count();
  ScenarioDemand d;
  d.from.resize(n);
  d.to.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.from[i] = problem.mean_from[i] + scenario.p_from[i] * problem.dev_from[i];
    d.to[i] = problem.mean_to[i] + scenario.p_to[i] * problem.dev_to[i];
  }
  return d;
}

ObjectiveBreakdown objective_components(const Schedule& schedule, const Assignment& assignment,
                                        const ScheduleProblem& problem) {
  ObjectiveBreakdown out;
  for (const RouteSchedule& r : schedule.routes) out.operation += problem.cost_vehicle * r.vehicles;

  const ServingIndex idx = ServingIndex::build(problem);
  for (std::size_t s = 0; s < problem.route_count(); ++s) {
    const double half_headway = schedule.routes[s].headway / 2.0;
    double served = 0.0;
    for (std::size_t i : idx.from_stops[s]) served += assignment.served_from[s][i];
    for (std::size_t i : idx.to_stops[s]) served += assignment.served_to[s][i];
    out.waiting += problem.cost_wait * served * half_headway;
  }
  for (std::size_t i = 0; i < problem.stop_count(); ++i) {
    out.loss += problem.cost_loss * (problem.loss_dist_from[i] * assignment.lost_from[i] +
                                     problem.loss_dist_to[i] * assignment.lost_to[i]);
  }
  out.total = out.operation + out.waiting + out.loss;
  return out;
}

RecoursePrimal build_recourse_primal(const ScheduleProblem& problem, const Schedule& schedule,
                                     const ScenarioDemand& demand) {
  const std::size_t n = problem.stop_count();
  RecoursePrimal rp;
  rp.serving = ServingIndex::build(problem);
  Model& m = rp.model;
  m.set_sense(Sense::Minimize);

  rp.x_from.assign(problem.route_count(), {});
  rp.x_to.assign(problem.route_count(), {});
  rp.l_from.resize(n);
  rp.l_to.resize(n);

  // X exists only where the route is operated and serves the stop.
  for (std::size_t s = 0; s < problem.route_count(); ++s) {
    const bool on = schedule.routes[s].operated;
    const double wait_cost = problem.cost_wait * schedule.routes[s].headway / 2.0;
    for (std::size_t i : rp.serving.from_stops[s]) {
      const int v = on ? m.add_continuous(id2("xF", s, i)) : -1;
      rp.x_from[s].push_back(v);
      if (v >= 0) m.set_objective_coef(v, wait_cost);
    }
    for (std::size_t i : rp.serving.to_stops[s]) {
      const int v = on ? m.add_continuous(id2("xT", s, i)) : -1;
      rp.x_to[s].push_back(v);
      if (v >= 0) m.set_objective_coef(v, wait_cost);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    rp.l_from[i] = m.add_continuous("lF_" + std::to_string(i));
    m.set_objective_coef(rp.l_from[i], problem.cost_loss * problem.loss_dist_from[i]);
    rp.l_to[i] = m.add_continuous("lT_" + std::to_string(i));
    m.set_objective_coef(rp.l_to[i], problem.cost_loss * problem.loss_dist_to[i]);
  }

  // Vehicle capacity per operated route and direction.
  for (std::size_t s = 0; s < problem.route_count(); ++s) {
    if (!schedule.routes[s].operated) continue;
    const double h = schedule.routes[s].headway;
    std::vector<Term> f, t;
    for (std::size_t k = 0; k < rp.x_from[s].size(); ++k) f.push_back({rp.x_from[s][k], h});
    for (std::size_t k = 0; k < rp.x_to[s].size(); ++k) t.push_back({rp.x_to[s][k], h});
    if (!f.empty())
      m.add_constraint(std::move(f), Relation::LessEqual, problem.capacity, "capF_" + std::to_string(s));
    if (!t.empty())
      m.add_constraint(std::move(t), Relation::LessEqual, problem.capacity, "capT_" + std::to_string(s));
  }

  // Conservation: served plus lost equals realized demand.
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Term> f{{rp.l_from[i], 1.0}};
    for (int s : rp.serving.from_routes[i]) {
      const auto& stops = rp.serving.from_stops[s];
      const std::size_t k = std::lower_bound(stops.begin(), stops.end(), i) - stops.begin();
      if (rp.x_from[s][k] >= 0) f.push_back({rp.x_from[s][k], 1.0});
    }
    m.add_constraint(std::move(f), Relation::Equal, demand.from[i], "consF_" + std::to_string(i));

    std::vector<Term> t{{rp.l_to[i], 1.0}};
    for (int s : rp.serving.to_routes[i]) {
      const auto& stops = rp.serving.to_stops[s];
      const std::size_t k = std::lower_bound(stops.begin(), stops.end(), i) - stops.begin();
      if (rp.x_to[s][k] >= 0) t.push_back({rp.x_to[s][k], 1.0});
    }
    m.add_constraint(std::move(t), Relation::Equal, demand.to[i], "consT_" + std::to_string(i));
  }

  // Service bound: a route cannot serve more than the realized demand.
  for (std::size_t s = 0; s < problem.route_count(); ++s) {
    for (std::size_t k = 0; k < rp.x_from[s].size(); ++k)
      if (rp.x_from[s][k] >= 0)
        m.add_constraint({{rp.x_from[s][k], 1.0}}, Relation::LessEqual,
                         demand.from[rp.serving.from_stops[s][k]],
                         id2("bndF", s, rp.serving.from_stops[s][k]));
    for (std::size_t k = 0; k < rp.x_to[s].size(); ++k)
      if (rp.x_to[s][k] >= 0)
        m.add_constraint({{rp.x_to[s][k], 1.0}}, Relation::LessEqual,
                         demand.to[rp.serving.to_stops[s][k]],
                         id2("bndT", s, rp.serving.to_stops[s][k]));
  }
  return rp;
}

RecourseEvaluation solve_recourse_primal(const ScheduleProblem& problem, const Schedule& schedule,
                                         const ScenarioDemand& demand) {
  RecoursePrimal rp = build_recourse_primal(problem, schedule, demand);
  const milp::Solution sol = milp::solve_lp(rp.model);
  if (!sol.optimal()) throw std::runtime_error("recourse LP did not solve to optimality");

  const std::size_t n = problem.stop_count();
  RecourseEvaluation ev;
  ev.assignment.served_from.assign(problem.route_count(), std::vector<double>(n, 0.0));
  ev.assignment.served_to.assign(problem.route_count(), std::vector<double>(n, 0.0));
  ev.assignment.lost_from.resize(n);
  ev.assignment.lost_to.resize(n);
  for (std::size_t s = 0; s < problem.route_count(); ++s) {
    for (std::size_t k = 0; k < rp.x_from[s].size(); ++k)
      if (rp.x_from[s][k] >= 0)
        ev.assignment.served_from[s][rp.serving.from_stops[s][k]] = sol.values[rp.x_from[s][k]];
    for (std::size_t k = 0; k < rp.x_to[s].size(); ++k)
      if (rp.x_to[s][k] >= 0)
        ev.assignment.served_to[s][rp.serving.to_stops[s][k]] = sol.values[rp.x_to[s][k]];
  }
  for (std::size_t i = 0; i < n; ++i) {
    ev.assignment.lost_from[i] = sol.values[rp.l_from[i]];
    ev.assignment.lost_to[i] = sol.values[rp.l_to[i]];
  }

  const ObjectiveBreakdown parts = objective_components(schedule, ev.assignment, problem);
  ev.waiting = parts.waiting;
  ev.loss = parts.loss;
  ev.objective = sol.objective;
  return ev;
}

RecourseDualMilp build_recourse_dual_milp(const ScheduleProblem& problem, const Schedule& schedule,
                                          int gamma) {
  const std::size_t n = problem.stop_count();
  if (gamma < 0 || gamma > 2 * static_cast<int>(n))
    throw std::invalid_argument("gamma outside [0, 2N]");

  const ServingIndex idx = ServingIndex::build(problem);
  RecourseDualMilp rd;
  Model& m = rd.model;
  m.set_sense(Sense::Maximize);

  const double big_m =
      problem.cost_wait * problem.headway_max * static_cast<double>(problem.route_count()) / 2.0 +
      problem.cost_loss * max_loss_distance(problem);
  rd.big_m = big_m;

  // Scenario selectors.
  rd.p_from.resize(n);
  rd.p_to.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rd.p_from[i] = m.add_binary("pF_" + std::to_string(i));
    rd.p_to[i] = m.add_binary("pT_" + std::to_string(i));
  }

  // Duals: u per operated route/direction, lambda per stop/direction,
  // v per operated serving pair; gamma_/psi_ linearize p*lambda and p*v.
  std::vector<int> u_f(problem.route_count(), -1), u_t(problem.route_count(), -1);
  for (std::size_t s = 0; s < problem.route_count(); ++s) {
    if (!schedule.routes[s].operated) continue;
    if (!idx.from_stops[s].empty()) {
      u_f[s] = m.add_continuous("uF_" + std::to_string(s), -milp::kInfinity, 0.0);
      m.set_objective_coef(u_f[s], problem.capacity);
    }
    if (!idx.to_stops[s].empty()) {
      u_t[s] = m.add_continuous("uT_" + std::to_string(s), -milp::kInfinity, 0.0);
      m.set_objective_coef(u_t[s], problem.capacity);
    }
  }

  std::vector<int> lam_f(n), lam_t(n), gam_f(n), gam_t(n);
  for (std::size_t i = 0; i < n; ++i) {
    lam_f[i] = m.add_continuous("lamF_" + std::to_string(i), -milp::kInfinity, milp::kInfinity);
    lam_t[i] = m.add_continuous("lamT_" + std::to_string(i), -milp::kInfinity, milp::kInfinity);
    gam_f[i] = m.add_continuous("gamF_" + std::to_string(i), -big_m, big_m);
    gam_t[i] = m.add_continuous("gamT_" + std::to_string(i), -big_m, big_m);
    m.set_objective_coef(lam_f[i], problem.mean_from[i]);
    m.set_objective_coef(lam_t[i], problem.mean_to[i]);
    m.set_objective_coef(gam_f[i], problem.dev_from[i]);
    m.set_objective_coef(gam_t[i], problem.dev_to[i]);
  }

  struct PairVar {
    int v = -1, psi = -1;
    std::size_t stop = 0;
  };
  std::vector<std::vector<PairVar>> v_f(problem.route_count()), v_t(problem.route_count());
  for (std::size_t s = 0; s < problem.route_count(); ++s) {
    if (!schedule.routes[s].operated) continue;
    for (std::size_t i : idx.from_stops[s]) {
      PairVar pv;
      pv.stop = i;
      pv.v = m.add_continuous(id2("vF", s, i), -milp::kInfinity, 0.0);
      pv.psi = m.add_continuous(id2("psiF", s, i), -big_m, 0.0);
      m.set_objective_coef(pv.v, problem.mean_from[i]);
      m.set_objective_coef(pv.psi, problem.dev_from[i]);
      v_f[s].push_back(pv);
    }
    for (std::size_t i : idx.to_stops[s]) {
      PairVar pv;
      pv.stop = i;
      pv.v = m.add_continuous(id2("vT", s, i), -milp::kInfinity, 0.0);
      pv.psi = m.add_continuous(id2("psiT", s, i), -big_m, 0.0);
      m.set_objective_coef(pv.v, problem.mean_to[i]);
      m.set_objective_coef(pv.psi, problem.dev_to[i]);
      v_t[s].push_back(pv);
    }
  }

  // Columns of the primal X variables.
  for (std::size_t s = 0; s < problem.route_count(); ++s) {
    if (!schedule.routes[s].operated) continue;
    const double h = schedule.routes[s].headway;
    const double wait = problem.cost_wait * h / 2.0;
    for (const PairVar& pv : v_f[s])
      m.add_constraint({{u_f[s], h}, {lam_f[pv.stop], 1.0}, {pv.v, 1.0}}, Relation::LessEqual, wait,
                       id2("colF", s, pv.stop));
    for (const PairVar& pv : v_t[s])
      m.add_constraint({{u_t[s], h}, {lam_t[pv.stop], 1.0}, {pv.v, 1.0}}, Relation::LessEqual, wait,
                       id2("colT", s, pv.stop));
  }

  // Columns of the loss variables and the p-product envelopes.
  for (std::size_t i = 0; i < n; ++i) {
    m.add_constraint({{lam_f[i], 1.0}}, Relation::LessEqual,
                     problem.cost_loss * problem.loss_dist_from[i], "colLF_" + std::to_string(i));
    m.add_constraint({{lam_t[i], 1.0}}, Relation::LessEqual,
                     problem.cost_loss * problem.loss_dist_to[i], "colLT_" + std::to_string(i));

    const auto envelope = [&](int prod, int factor, int p) {
      m.add_constraint({{prod, 1.0}, {p, -big_m}}, Relation::LessEqual, 0.0);
      m.add_constraint({{prod, 1.0}, {p, big_m}}, Relation::GreaterEqual, 0.0);
      m.add_constraint({{prod, 1.0}, {factor, -1.0}, {p, big_m}}, Relation::LessEqual, big_m);
      m.add_constraint({{prod, 1.0}, {factor, -1.0}, {p, -big_m}}, Relation::GreaterEqual, -big_m);
    };
    envelope(gam_f[i], lam_f[i], rd.p_from[i]);
    envelope(gam_t[i], lam_t[i], rd.p_to[i]);
    for (std::size_t s = 0; s < problem.route_count(); ++s) {
      for (const PairVar& pv : v_f[s])
        if (pv.stop == i) envelope(pv.psi, pv.v, rd.p_from[i]);
      for (const PairVar& pv : v_t[s])
        if (pv.stop == i) envelope(pv.psi, pv.v, rd.p_to[i]);
    }
  }

  // Uncertainty budget.
  std::vector<Term> budget;
  for (std::size_t i = 0; i < n; ++i) {
    budget.push_back({rd.p_from[i], 1.0});
    budget.push_back({rd.p_to[i], 1.0});
  }
  m.add_constraint(std::move(budget), Relation::Equal, static_cast<double>(gamma), "budget");
  return rd;
}

MasterModel build_master(const ScheduleProblem& problem, const std::vector<DemandScenario>& pool) {
  if (pool.empty()) throw std::invalid_argument("scenario pool must be nonempty");
  const std::size_t n = problem.stop_count();
  const std::size_t R = problem.route_count();
  const ServingIndex idx = ServingIndex::build(problem);

  MasterModel mm;
  Model& m = mm.model;
  m.set_sense(Sense::Minimize);
  mm.bits = headway_bits(problem.headway_max);
  const int K = mm.bits;
  const double B = problem.fleet_size;

  mm.y.resize(R);
  mm.kappa.resize(R);
  mm.g.assign(R, std::vector<int>(K));
  mm.z.assign(R, std::vector<int>(K));
  for (std::size_t s = 0; s < R; ++s) {
    mm.y[s] = m.add_integer("y_" + std::to_string(s), 0.0, B);
    m.set_objective_coef(mm.y[s], problem.cost_vehicle);
    mm.kappa[s] = m.add_binary("kap_" + std::to_string(s));
    for (int k = 0; k < K; ++k) {
      mm.g[s][k] = m.add_binary(id2("g", s, k));
      mm.z[s][k] = m.add_continuous(id2("z", s, k), 0.0, B);
    }
  }
  mm.eta = m.add_continuous("eta", 0.0, milp::kInfinity);
  m.set_objective_coef(mm.eta, 1.0);

  // Shared scheduling constraints.
  {
    std::vector<Term> fleet;
    for (std::size_t s = 0; s < R; ++s) {
      fleet.push_back({mm.y[s], 1.0});
      m.add_constraint({{mm.y[s], 1.0}, {mm.kappa[s], -B}}, Relation::LessEqual, 0.0);
      m.add_constraint({{mm.kappa[s], 1.0}, {mm.y[s], -1.0}}, Relation::LessEqual, 0.0);

      // Round-trip coverage: 60 * sum 2^k z >= T_s seconds, gated on kappa.
      std::vector<Term> freq{{mm.kappa[s], -static_cast<double>(problem.roundtrips[s].total_time)}};
      for (int k = 0; k < K; ++k) freq.push_back({mm.z[s][k], 60.0 * (1 << k)});
      m.add_constraint(std::move(freq), Relation::GreaterEqual, 0.0, "freq_" + std::to_string(s));

      // Headway range, active when operated; unoperated routes carry h=0.
      std::vector<Term> hmin{{mm.kappa[s], -static_cast<double>(problem.headway_min)}};
      std::vector<Term> hmax;
      for (int k = 0; k < K; ++k) {
        hmin.push_back({mm.g[s][k], static_cast<double>(1 << k)});
        hmax.push_back({mm.g[s][k], static_cast<double>(1 << k)});
        m.add_constraint({{mm.g[s][k], 1.0}, {mm.kappa[s], -1.0}}, Relation::LessEqual, 0.0);
      }
      m.add_constraint(std::move(hmin), Relation::GreaterEqual, 0.0);
      m.add_constraint(std::move(hmax), Relation::LessEqual, problem.headway_max);

      // z = g * y envelopes (exact at binary g).
      for (int k = 0; k < K; ++k) {
        m.add_constraint({{mm.z[s][k], 1.0}, {mm.g[s][k], -B}}, Relation::LessEqual, 0.0);
        m.add_constraint({{mm.z[s][k], 1.0}, {mm.y[s], -1.0}}, Relation::LessEqual, 0.0);
        m.add_constraint({{mm.z[s][k], 1.0}, {mm.y[s], -1.0}, {mm.g[s][k], -B}},
                         Relation::GreaterEqual, -B);
      }
      // Range cuts: sum 2^k z is y*h, which lies in [h_min*y, h_max*y].
      // Redundant at integral points, they stop fractional bit patterns
      // from weakening the relaxation.
      {
        std::vector<Term> lo{{mm.y[s], static_cast<double>(problem.headway_min)}};
        std::vector<Term> hi{{mm.y[s], -static_cast<double>(problem.headway_max)}};
        for (int k = 0; k < K; ++k) {
          lo.push_back({mm.z[s][k], -static_cast<double>(1 << k)});
          hi.push_back({mm.z[s][k], static_cast<double>(1 << k)});
        }
        m.add_constraint(std::move(lo), Relation::LessEqual, 0.0);
        m.add_constraint(std::move(hi), Relation::LessEqual, 0.0);
      }
    }
    m.add_constraint(std::move(fleet), Relation::LessEqual, B, "fleet");
  }

  // Per-scenario recourse copies.
  for (std::size_t l = 0; l < pool.size(); ++l) {
    const ScenarioDemand dem = realized_demand(problem, pool[l]);

    std::vector<std::vector<int>> xf(R), xt(R);
    std::vector<int> Lf(n), Lt(n);
    std::vector<std::vector<std::vector<int>>> qf(R), qt(R);
    for (std::size_t s = 0; s < R; ++s) {
      xf[s].resize(idx.from_stops[s].size());
      qf[s].assign(idx.from_stops[s].size(), std::vector<int>(K));
      for (std::size_t a = 0; a < idx.from_stops[s].size(); ++a) {
        xf[s][a] = m.add_continuous("xF_" + std::to_string(l) + "_" + id2("", s, idx.from_stops[s][a]));
        for (int k = 0; k < K; ++k)
          qf[s][a][k] = m.add_continuous("qF_" + std::to_string(l) + "_" +
                                         std::to_string(s) + "_" +
                                         std::to_string(idx.from_stops[s][a]) + "_" + std::to_string(k));
      }
      xt[s].resize(idx.to_stops[s].size());
      qt[s].assign(idx.to_stops[s].size(), std::vector<int>(K));
      for (std::size_t a = 0; a < idx.to_stops[s].size(); ++a) {
        xt[s][a] = m.add_continuous("xT_" + std::to_string(l) + "_" + id2("", s, idx.to_stops[s][a]));
        for (int k = 0; k < K; ++k)
          qt[s][a][k] = m.add_continuous("qT_" + std::to_string(l) + "_" +
                                         std::to_string(s) + "_" +
                                         std::to_string(idx.to_stops[s][a]) + "_" + std::to_string(k));
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      Lf[i] = m.add_continuous("LF_" + std::to_string(l) + "_" + std::to_string(i));
      Lt[i] = m.add_continuous("LT_" + std::to_string(l) + "_" + std::to_string(i));
    }

    // eta bounds the scenario's waiting plus loss cost.
    {
      std::vector<Term> row{{mm.eta, 1.0}};
      for (std::size_t s = 0; s < R; ++s) {
        for (std::size_t a = 0; a < idx.from_stops[s].size(); ++a)
          for (int k = 0; k < K; ++k)
            row.push_back({qf[s][a][k], -problem.cost_wait * (1 << k) / 2.0});
        for (std::size_t a = 0; a < idx.to_stops[s].size(); ++a)
          for (int k = 0; k < K; ++k)
            row.push_back({qt[s][a][k], -problem.cost_wait * (1 << k) / 2.0});
      }
      for (std::size_t i = 0; i < n; ++i) {
        row.push_back({Lf[i], -problem.cost_loss * problem.loss_dist_from[i]});
        row.push_back({Lt[i], -problem.cost_loss * problem.loss_dist_to[i]});
      }
      m.add_constraint(std::move(row), Relation::GreaterEqual, 0.0, "eta_" + std::to_string(l));
    }

    // Capacity via the expanded products: sum_i sum_k 2^k q <= C.
    for (std::size_t s = 0; s < R; ++s) {
      if (!idx.from_stops[s].empty()) {
        std::vector<Term> row;
        for (std::size_t a = 0; a < idx.from_stops[s].size(); ++a)
          for (int k = 0; k < K; ++k) row.push_back({qf[s][a][k], static_cast<double>(1 << k)});
        m.add_constraint(std::move(row), Relation::LessEqual, problem.capacity);
      }
      if (!idx.to_stops[s].empty()) {
        std::vector<Term> row;
        for (std::size_t a = 0; a < idx.to_stops[s].size(); ++a)
          for (int k = 0; k < K; ++k) row.push_back({qt[s][a][k], static_cast<double>(1 << k)});
        m.add_constraint(std::move(row), Relation::LessEqual, problem.capacity);
      }
    }

    // Conservation and service bounds.
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Term> f{{Lf[i], 1.0}};
      for (int s : idx.from_routes[i]) {
        const auto& stops = idx.from_stops[s];
        const std::size_t a = std::lower_bound(stops.begin(), stops.end(), i) - stops.begin();
        f.push_back({xf[s][a], 1.0});
        m.add_constraint({{xf[s][a], 1.0}, {mm.kappa[s], -dem.from[i]}}, Relation::LessEqual, 0.0);
      }
      m.add_constraint(std::move(f), Relation::Equal, dem.from[i]);

      std::vector<Term> t{{Lt[i], 1.0}};
      for (int s : idx.to_routes[i]) {
        const auto& stops = idx.to_stops[s];
        const std::size_t a = std::lower_bound(stops.begin(), stops.end(), i) - stops.begin();
        t.push_back({xt[s][a], 1.0});
        m.add_constraint({{xt[s][a], 1.0}, {mm.kappa[s], -dem.to[i]}}, Relation::LessEqual, 0.0);
      }
      m.add_constraint(std::move(t), Relation::Equal, dem.to[i]);
    }

    // q = g * X envelopes with scenario-dependent demand caps, plus the
    // same h-range cuts on sum 2^k q = h*X.
    for (std::size_t s = 0; s < R; ++s) {
      const auto add_pair = [&](const std::vector<int>& q_bits, int x_var, double cap) {
        for (int k = 0; k < K; ++k) {
          m.add_constraint({{q_bits[k], 1.0}, {mm.g[s][k], -cap}}, Relation::LessEqual, 0.0);
          m.add_constraint({{q_bits[k], 1.0}, {x_var, -1.0}}, Relation::LessEqual, 0.0);
          m.add_constraint({{q_bits[k], 1.0}, {x_var, -1.0}, {mm.g[s][k], -cap}},
                           Relation::GreaterEqual, -cap);
        }
        std::vector<Term> lo{{x_var, static_cast<double>(problem.headway_min)}};
        std::vector<Term> hi{{x_var, -static_cast<double>(problem.headway_max)}};
        for (int k = 0; k < K; ++k) {
          lo.push_back({q_bits[k], -static_cast<double>(1 << k)});
          hi.push_back({q_bits[k], static_cast<double>(1 << k)});
        }
        m.add_constraint(std::move(lo), Relation::LessEqual, 0.0);
        m.add_constraint(std::move(hi), Relation::LessEqual, 0.0);
      };
      for (std::size_t a = 0; a < idx.from_stops[s].size(); ++a)
        add_pair(qf[s][a], xf[s][a], dem.from[idx.from_stops[s][a]]);
      for (std::size_t a = 0; a < idx.to_stops[s].size(); ++a)
        add_pair(qt[s][a], xt[s][a], dem.to[idx.to_stops[s][a]]);
    }
  }
  return mm;
}

Schedule decode_master(const MasterModel& master, const milp::Solution& solution,
                       const ScheduleProblem& problem) {
  Schedule sched;
  sched.routes.resize(problem.route_count());
  for (std::size_t s = 0; s < problem.route_count(); ++s) {
    RouteSchedule& r = sched.routes[s];
    r.operated = solution.values[master.kappa[s]] > 0.5;
    r.vehicles = static_cast<int>(std::llround(solution.values[master.y[s]]));
    int h = 0;
    for (int k = 0; k < master.bits; ++k)
      if (solution.values[master.g[s][k]] > 0.5) h += 1 << k;
    r.headway = r.operated ? h : 0;
  }
  return sched;
}

namespace {

DemandScenario zero_scenario(std::size_t n) {
  DemandScenario s;
  s.p_from.assign(n, 0.0);
  s.p_to.assign(n, 0.0);
  return s;
}

DemandScenario initial_scenario(const ScheduleProblem& problem, int gamma,
                                const CcgOptions& options) {
  const std::size_t n = problem.stop_count();
  DemandScenario p = zero_scenario(n);
  if (gamma == 0) return p;

  struct Entry {
    double score;
    std::size_t stop;
    int dir;  // 0 = from, 1 = to
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    const double wait = problem.cost_wait * problem.headway_max / 2.0;
    entries.push_back({problem.dev_from[i] * (wait + problem.cost_loss * problem.loss_dist_from[i]),
                       i, 0});
    entries.push_back({problem.dev_to[i] * (wait + problem.cost_loss * problem.loss_dist_to[i]),
                       i, 1});
  }
  if (options.initial == InitialScenario::Random) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(entries.begin(), entries.end(), rng);
  } else {
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.stop != b.stop) return a.stop < b.stop;
      return a.dir < b.dir;
    });
  }
  for (int k = 0; k < gamma; ++k) {
    const Entry& e = entries[k];
    (e.dir == 0 ? p.p_from : p.p_to)[e.stop] = 1.0;
  }
  return p;
}

}  // namespace

CcgResult ccg_solve(const ScheduleProblem& problem, int gamma, const CcgOptions& options) {
  const std::size_t n = problem.stop_count();
  if (gamma < 0 || gamma > 2 * static_cast<int>(n))
    throw std::invalid_argument("gamma outside [0, 2N]");

  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  CcgResult result;
  std::vector<DemandScenario> pool{initial_scenario(problem, gamma, options)};

  double lb = -milp::kInfinity;
  double ub = milp::kInfinity;
  Schedule incumbent;
  double incumbent_obj = milp::kInfinity;

  std::vector<std::pair<int, double>> warm_start;
  for (int it = 1; it <= options.iteration_limit; ++it) {
    MasterModel master = build_master(problem, pool);
    milp::MilpOptions master_opt = options.milp;
    // The previous schedule stays feasible after a scenario is added
    // (losses absorb any demand), so it seeds the incumbent.
    master_opt.integer_hint = warm_start;
    const milp::Solution msol = milp::solve(master.model, master_opt);
    if (msol.status != milp::SolveStatus::Optimal)
      throw std::runtime_error("master problem failed to solve");
    lb = msol.objective;
    const Schedule schedule = decode_master(master, msol, problem);
    warm_start.clear();
    for (std::size_t s = 0; s < problem.route_count(); ++s) {
      warm_start.push_back({master.y[s], msol.values[master.y[s]]});
      warm_start.push_back({master.kappa[s], msol.values[master.kappa[s]]});
      for (int k = 0; k < master.bits; ++k)
        warm_start.push_back({master.g[s][k], msol.values[master.g[s][k]]});
    }
    double operation = 0.0;
    for (const RouteSchedule& r : schedule.routes) operation += problem.cost_vehicle * r.vehicles;

    RecourseDualMilp recourse = build_recourse_dual_milp(problem, schedule, gamma);
    const milp::Solution rsol = milp::solve(recourse.model, options.milp);
    if (rsol.status != milp::SolveStatus::Optimal)
      throw std::runtime_error("recourse problem failed to solve");

    const double candidate = operation + rsol.objective;
    if (candidate < ub) {
      ub = candidate;
      incumbent = schedule;
      incumbent_obj = candidate;
    }

    const double gap = ub > 0.0 ? (ub - lb) / ub : 0.0;
    result.history.push_back({it, lb, ub, gap, elapsed()});

    if (gap <= options.rel_tol) {
      result.status = milp::SolveStatus::Optimal;
      break;
    }

    DemandScenario next;
    next.p_from.resize(n);
    next.p_to.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      next.p_from[i] = rsol.values[recourse.p_from[i]] > 0.5 ? 1.0 : 0.0;
      next.p_to[i] = rsol.values[recourse.p_to[i]] > 0.5 ? 1.0 : 0.0;
    }
    if (std::find(pool.begin(), pool.end(), next) != pool.end()) {
      // The worst case is already hedged; the remaining gap is numerical.
      result.status = milp::SolveStatus::GapLimit;
      break;
    }
    pool.push_back(std::move(next));
  }

  result.schedule = incumbent;
  result.objective = incumbent_obj;

  // Fill the returned schedule's cost breakdown at its own worst case.
  RecourseDualMilp worst = build_recourse_dual_milp(problem, incumbent, gamma);
  const milp::Solution wsol = milp::solve(worst.model, options.milp);
  if (wsol.optimal()) {
    DemandScenario wp;
    wp.p_from.resize(n);
    wp.p_to.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      wp.p_from[i] = wsol.values[worst.p_from[i]] > 0.5 ? 1.0 : 0.0;
      wp.p_to[i] = wsol.values[worst.p_to[i]] > 0.5 ? 1.0 : 0.0;
    }
    const RecourseEvaluation ev =
        solve_recourse_primal(problem, incumbent, realized_demand(problem, wp));
    double operation = 0.0;
    for (const RouteSchedule& r : incumbent.routes) operation += problem.cost_vehicle * r.vehicles;
    result.schedule.objective = {operation, ev.waiting, ev.loss, operation + ev.waiting + ev.loss};
  }
  return result;
}

Schedule solve_nominal(const ScheduleProblem& problem, const milp::MilpOptions& options) {
  std::vector<DemandScenario> pool{zero_scenario(problem.stop_count())};
  MasterModel master = build_master(problem, pool);
  const milp::Solution sol = milp::solve(master.model, options);
  if (sol.status != milp::SolveStatus::Optimal)
    throw std::runtime_error("nominal problem failed to solve");
  Schedule sched = decode_master(master, sol, problem);

  const RecourseEvaluation ev =
      solve_recourse_primal(problem, sched, realized_demand(problem, pool[0]));
  double operation = 0.0;
  for (const RouteSchedule& r : sched.routes) operation += problem.cost_vehicle * r.vehicles;
  sched.objective = {operation, ev.waiting, ev.loss, operation + ev.waiting + ev.loss};
  return sched;
}

}  // namespace hubmod::robust
