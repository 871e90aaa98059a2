#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hubmod/combine.hpp"
#include "hubmod/evalsim.hpp"
#include "hubmod/io.hpp"
#include "hubmod/milp.hpp"
#include "hubmod/model.hpp"
#include "hubmod/robust.hpp"
#include "hubmod/routegen.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace hubmod;

constexpr int kExitOk = 0;
constexpr int kExitSolver = 1;
constexpr int kExitInput = 2;

int log_level() {
  const char* env = std::getenv("HUBMOD_LOG");
  if (!env) return 1;
  const std::string v = env;
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[hubmod] " << msg << "\n";
}

[[noreturn]] void fail(const std::string& stage, const std::string& message, int code,
                       const std::vector<ValidationIssue>* issues = nullptr) {
  ordered_json err;
  err["error"]["stage"] = stage;
  err["error"]["message"] = message;
  if (issues) {
    ordered_json list = ordered_json::array();
    for (const auto& is : *issues) list.push_back(is.detail);
    err["error"]["issues"] = std::move(list);
  }
  std::cerr << err.dump() << "\n";
  std::exit(code);
}

struct StageInputs {
  std::string network_dir;
  std::string config_path;
  bool repair_triangle = false;
};

io::Config load_config_or_fail(const StageInputs& in, const std::string& stage) {
  try {
    return io::read_config(in.config_path);
  } catch (const io::InputError& e) {
    fail(stage, e.what(), kExitInput);
  }
}

StopNetwork load_network_or_fail(const StageInputs& in, const io::Config& cfg,
                                 const std::string& stage) {
  try {
    return io::load_network(in.network_dir, cfg, in.repair_triangle);
  } catch (const ValidationError& e) {
    fail(stage, e.what(), kExitInput, &e.issues());
  } catch (const io::InputError& e) {
    fail(stage, e.what(), kExitInput);
  }
}

routegen::GenOptions gen_options(const io::Config& cfg, const std::optional<TransitOverlay>& ov) {
  routegen::GenOptions opt;
  opt.mode = cfg.mode == "heuristic" ? routegen::Mode::Heuristic : routegen::Mode::Exact;
  opt.overlay = cfg.connect && ov ? &*ov : nullptr;
  return opt;
}

std::vector<Route> run_routes(const StopNetwork& net, const io::Config& cfg,
                              const std::optional<TransitOverlay>& ov) {
  const routegen::GenOptions opt = gen_options(cfg, ov);
  std::vector<Route> all = routegen::generate_k_mcr(net, Direction::FromHub, cfg.k_routes, opt);
  std::vector<Route> back = routegen::generate_k_mcr(net, Direction::ToHub, cfg.k_routes, opt);
  all.insert(all.end(), std::make_move_iterator(back.begin()), std::make_move_iterator(back.end()));
  log_info("generated " + std::to_string(all.size()) + " routes");
  return all;
}

ScheduleProblem make_problem(const StopNetwork& net, const io::Config& cfg,
                             std::vector<RoundTrip> trips) {
  ScheduleProblem p;
  p.roundtrips = std::move(trips);
  p.fleet_size = cfg.fleet;
  p.capacity = cfg.capacity;
  p.headway_min = cfg.h_min;
  p.headway_max = cfg.h_max;
  p.cost_vehicle = cfg.c_o;
  p.cost_wait = cfg.c_w;
  p.cost_loss = cfg.c_l;
  const std::size_t n = net.stop_count();
  p.mean_from.resize(n);
  p.mean_to.resize(n);
  p.dev_from.resize(n);
  p.dev_to.resize(n);
  p.loss_dist_from.resize(n);
  p.loss_dist_to.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.mean_from[i] = net.stops[i].demand_from_hub;
    p.mean_to[i] = net.stops[i].demand_to_hub;
    p.dev_from[i] = net.stops[i].max_dev_from_hub;
    p.dev_to[i] = net.stops[i].max_dev_to_hub;
    p.loss_dist_from[i] = net.stops[i].alt_dist_from_hub;
    p.loss_dist_to[i] = net.stops[i].alt_dist_to_hub;
  }
  return p;
}

std::string status_name(milp::SolveStatus s) {
  switch (s) {
    case milp::SolveStatus::Optimal: return "optimal";
    case milp::SolveStatus::Infeasible: return "infeasible";
    case milp::SolveStatus::Unbounded: return "unbounded";
    case milp::SolveStatus::GapLimit: return "gap_limit";
  }
  return "unknown";
}

std::vector<std::pair<int, io::ScheduleRecord>> run_schedules(const ScheduleProblem& problem,
                                                              const io::Config& cfg) {
  std::vector<std::pair<int, io::ScheduleRecord>> out;
  for (int gamma : cfg.gamma) {
    robust::CcgOptions opt;
    opt.rel_tol = cfg.ccg_tol;
    opt.iteration_limit = cfg.iteration_limit;
    opt.seed = static_cast<unsigned>(cfg.seed);
    try {
      robust::CcgResult res = robust::ccg_solve(problem, gamma, opt);
      io::ScheduleRecord rec;
      rec.gamma = gamma;
      rec.status = status_name(res.status);
      rec.schedule = res.schedule;
      rec.history = res.history;
      log_info("gamma " + std::to_string(gamma) + ": " + rec.status + " after " +
               std::to_string(res.history.size()) + " iteration(s)");
      out.push_back({gamma, std::move(rec)});
    } catch (const std::exception& e) {
      fail("schedule", std::string("gamma ") + std::to_string(gamma) + ": " + e.what(), kExitSolver);
    }
  }
  return out;
}

void write_schedules(const std::string& out_dir,
                     const std::vector<std::pair<int, io::ScheduleRecord>>& records) {
  std::vector<std::pair<int, std::vector<robust::CcgIteration>>> runs;
  for (const auto& [gamma, rec] : records) {
    io::write_schedule_json(out_dir + "/schedule_g" + std::to_string(gamma) + ".json", rec);
    runs.push_back({gamma, rec.history});
  }
  io::write_ccg_history_csv(out_dir + "/ccg_history.csv", runs);
}

void run_evaluate(const ScheduleProblem& problem, const io::Config& cfg,
                  const std::vector<std::pair<int, Schedule>>& schedules,
                  const std::string& out_dir) {
  try {
    const auto scenarios = evalsim::sample_scenarios(problem, cfg.n_eval_scenarios, cfg.seed);
    const evalsim::GapReport report = evalsim::gap_metrics(problem, schedules, scenarios);
    io::write_eval_report_csv(out_dir + "/eval_report.csv", report);
  } catch (const std::invalid_argument& e) {
    fail("evaluate", e.what(), kExitInput);
  } catch (const std::exception& e) {
    fail("evaluate", e.what(), kExitSolver);
  }
}

void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail("output", "cannot create output directory '" + out_dir + "'", kExitInput);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hub-based mobility-on-demand planning toolkit"};
  app.require_subcommand(1);

  StageInputs in;
  std::string out_dir = "out";
  std::string routes_path, trips_path, schedule_dir;

  const auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--network", in.network_dir, "directory with stops.csv and travel_times.csv")
        ->required();
    cmd->add_option("--config", in.config_path, "config.json path")->required();
    cmd->add_flag("--repair-triangle", in.repair_triangle,
                  "repair triangle-inequality violations by shortest-path closure");
    if (needs_out) cmd->add_option("--out", out_dir, "output directory");
  };

  CLI::App* c_validate = app.add_subcommand("validate", "validate network inputs");
  add_common(c_validate, false);

  CLI::App* c_routes = app.add_subcommand("routes", "generate maximum-coverage routes");
  add_common(c_routes, true);
  c_routes->add_option("--k", "override k_routes");
  c_routes->add_option("--mode", "override mode (exact|heuristic)");

  CLI::App* c_combine = app.add_subcommand("combine", "pair routes into round trips");
  add_common(c_combine, true);
  c_combine->add_option("--routes", routes_path, "routes.geojson from the routes stage");

  CLI::App* c_schedule = app.add_subcommand("schedule", "robust fleet/headway scheduling");
  add_common(c_schedule, true);
  c_schedule->add_option("--roundtrips", trips_path, "roundtrips.json from the combine stage");

  CLI::App* c_evaluate = app.add_subcommand("evaluate", "evaluate schedules under demand scenarios");
  add_common(c_evaluate, true);
  c_evaluate->add_option("--roundtrips", trips_path, "roundtrips.json from the combine stage");
  c_evaluate->add_option("--schedules", schedule_dir, "directory with schedule_g*.json");

  CLI::App* c_pipeline = app.add_subcommand("pipeline", "run every stage");
  add_common(c_pipeline, true);

  CLI11_PARSE(app, argc, argv);

  io::Config cfg = load_config_or_fail(in, app.get_subcommands().front()->get_name());

  if (c_routes->count("--k")) cfg.k_routes = c_routes->get_option("--k")->as<int>();
  if (c_routes->count("--mode")) cfg.mode = c_routes->get_option("--mode")->as<std::string>();
  if (cfg.mode != "exact" && cfg.mode != "heuristic")
    fail("routes", "mode must be exact or heuristic", kExitInput);

  StopNetwork net = load_network_or_fail(in, cfg, "validate");
  std::optional<TransitOverlay> overlay;
  try {
    overlay = io::load_overlay(in.network_dir, cfg, net);
  } catch (const io::InputError& e) {
    fail("validate", e.what(), kExitInput);
  }

  if (c_validate->parsed()) {
    ordered_json j;
    j["stops"] = net.stop_count();
    j["hub"] = net.hub_id;
    j["lambda"] = net.lambda;
    j["overlay_stations"] = overlay ? overlay->station_count() : 0;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }

  ensure_out_dir(out_dir);

  if (c_routes->parsed()) {
    const std::vector<Route> routes = run_routes(net, cfg, overlay);
    io::write_routes_geojson(out_dir + "/routes.geojson", net, routes);
    return kExitOk;
  }

  if (c_combine->parsed()) {
    if (routes_path.empty()) routes_path = out_dir + "/routes.geojson";
    std::vector<Route> routes;
    try {
      routes = io::read_routes_geojson(routes_path, net);
    } catch (const io::InputError& e) {
      fail("combine", e.what(), kExitInput);
    }
    std::vector<Route> outs, backs;
    for (Route& r : routes)
      (r.direction == Direction::FromHub ? outs : backs).push_back(std::move(r));
    const auto rule = cfg.combine_rule == "distance" ? combine::ConnectRule::Distance
                                                     : combine::ConnectRule::Time;
    const std::vector<RoundTrip> trips = combine::combine_routes(outs, backs, net, rule);
    io::write_roundtrips_json(out_dir + "/roundtrips.json", net, trips);
    return kExitOk;
  }

  if (c_schedule->parsed()) {
    if (trips_path.empty()) trips_path = out_dir + "/roundtrips.json";
    std::vector<RoundTrip> trips;
    try {
      trips = io::read_roundtrips_json(trips_path, net);
    } catch (const io::InputError& e) {
      fail("schedule", e.what(), kExitInput);
    }
    const ScheduleProblem problem = make_problem(net, cfg, std::move(trips));
    write_schedules(out_dir, run_schedules(problem, cfg));
    return kExitOk;
  }

  if (c_evaluate->parsed()) {
    if (trips_path.empty()) trips_path = out_dir + "/roundtrips.json";
    if (schedule_dir.empty()) schedule_dir = out_dir;
    std::vector<RoundTrip> trips;
    std::vector<std::pair<int, Schedule>> schedules;
    try {
      trips = io::read_roundtrips_json(trips_path, net);
      for (int gamma : cfg.gamma) {
        const io::ScheduleRecord rec =
            io::read_schedule_json(schedule_dir + "/schedule_g" + std::to_string(gamma) + ".json");
        schedules.push_back({gamma, rec.schedule});
      }
    } catch (const io::InputError& e) {
      fail("evaluate", e.what(), kExitInput);
    }
    const ScheduleProblem problem = make_problem(net, cfg, std::move(trips));
    run_evaluate(problem, cfg, schedules, out_dir);
    return kExitOk;
  }

  if (c_pipeline->parsed()) {
    const std::vector<Route> routes = run_routes(net, cfg, overlay);
    io::write_routes_geojson(out_dir + "/routes.geojson", net, routes);

    std::vector<Route> outs, backs;
    for (const Route& r : routes) (r.direction == Direction::FromHub ? outs : backs).push_back(r);
    const auto rule = cfg.combine_rule == "distance" ? combine::ConnectRule::Distance
                                                     : combine::ConnectRule::Time;
    const std::vector<RoundTrip> trips = combine::combine_routes(outs, backs, net, rule);
    io::write_roundtrips_json(out_dir + "/roundtrips.json", net, trips);

    const ScheduleProblem problem = make_problem(net, cfg, trips);
    const auto records = run_schedules(problem, cfg);
    write_schedules(out_dir, records);

    std::vector<std::pair<int, Schedule>> schedules;
    for (const auto& [gamma, rec] : records) schedules.push_back({gamma, rec.schedule});
    run_evaluate(problem, cfg, schedules, out_dir);
    log_info("pipeline complete; artifacts in " + out_dir);
    return kExitOk;
  }

  return kExitOk;
}
