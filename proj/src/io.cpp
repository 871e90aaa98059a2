#include "hubmod/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hubmod::io {

namespace {

using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool file_exists(const std::string& path) { return std::ifstream(path).good(); }

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const std::string& path) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError("'" + path + "' is missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

Csv read_csv(const std::string& path) {
  const std::string text = read_file(path);
  Csv csv;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (first) {
      csv.header = std::move(cells);
      first = false;
    } else {
      csv.rows.push_back(std::move(cells));
    }
  }
  if (first) throw InputError("'" + path + "' is empty; a header row is required");
  return csv;
}

double parse_num(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("cannot parse number '" + s + "' in " + context);
  }
}

double round12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::strtod(buf, nullptr);
}

ordered_json route_to_json(const StopNetwork& net, const Route& r) {
  ordered_json j;
  j["direction"] = direction_name(r.direction);
  ordered_json stops = ordered_json::array();
  ordered_json cum = ordered_json::array();
  for (std::size_t k = 0; k < r.stops.size(); ++k) {
    stops.push_back(net.stops[r.stops[k]].id);
    cum.push_back(round12(seconds_to_minutes(r.cum_time[k])));
  }
  j["stops"] = std::move(stops);
  j["cum_time"] = std::move(cum);
  ordered_json transfers = ordered_json::array();
  for (std::size_t t : r.transfer_covered) transfers.push_back(net.stops[t].id);
  j["transfer_covered"] = std::move(transfers);
  j["trip_time"] = round12(seconds_to_minutes(r.trip_time));
  j["coverage"] = round12(r.coverage);
  return j;
}

Route route_from_json(const StopNetwork& net, const ordered_json& j) {
  Route r;
  r.direction = j.at("direction").get<std::string>() == "to_hub" ? Direction::ToHub
                                                                 : Direction::FromHub;
  for (const auto& id : j.at("stops")) {
    const auto idx = net.stop_index(id.get<std::string>());
    if (!idx) throw InputError("route references unknown stop '" + id.get<std::string>() + "'");
    r.stops.push_back(*idx);
  }
  for (const auto& m : j.at("cum_time")) r.cum_time.push_back(minutes_to_seconds(m.get<double>()));
  for (const auto& id : j.at("transfer_covered")) {
    const auto idx = net.stop_index(id.get<std::string>());
    if (!idx) throw InputError("route references unknown stop '" + id.get<std::string>() + "'");
    r.transfer_covered.push_back(*idx);
  }
  std::sort(r.transfer_covered.begin(), r.transfer_covered.end());
  r.trip_time = minutes_to_seconds(j.at("trip_time").get<double>());
  r.coverage = j.at("coverage").get<double>();
  return r;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

Config read_config(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("cannot parse config '" + path + "': " + e.what());
  }

  Config c;
  try {
    c.hub_id = j.at("hub_id").get<std::string>();
    if (j.contains("hub_lat") && j.contains("hub_lon"))
      c.hub_coords = {j["hub_lat"].get<double>(), j["hub_lon"].get<double>()};
    if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
    if (j.contains("sigma")) c.sigma_seconds = j["sigma"].get<double>();
    if (j.contains("c_o")) c.c_o = j["c_o"].get<double>();
    if (j.contains("c_w")) c.c_w = j["c_w"].get<double>();
    if (j.contains("c_l")) c.c_l = j["c_l"].get<double>();
    if (j.contains("C")) c.capacity = j["C"].get<int>();
    if (j.contains("B")) c.fleet = j["B"].get<int>();
    if (j.contains("h_min")) c.h_min = j["h_min"].get<int>();
    if (j.contains("h_max")) c.h_max = j["h_max"].get<int>();
    if (j.contains("k_routes")) c.k_routes = j["k_routes"].get<int>();
    if (j.contains("mode")) c.mode = j["mode"].get<std::string>();
    if (j.contains("connect")) c.connect = j["connect"].get<bool>();
    if (j.contains("combine_rule")) c.combine_rule = j["combine_rule"].get<std::string>();
    if (j.contains("gamma")) {
      c.gamma.clear();
      for (const auto& g : j["gamma"]) c.gamma.push_back(g.get<int>());
    }
    if (j.contains("ccg_tol")) c.ccg_tol = j["ccg_tol"].get<double>();
    if (j.contains("iteration_limit")) c.iteration_limit = j["iteration_limit"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<unsigned long long>();
    if (j.contains("n_eval_scenarios")) c.n_eval_scenarios = j["n_eval_scenarios"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config '" + path + "': " + e.what());
  }
  if (c.mode != "exact" && c.mode != "heuristic")
    throw InputError("config mode must be 'exact' or 'heuristic'");
  if (c.combine_rule != "time" && c.combine_rule != "distance")
    throw InputError("config combine_rule must be 'time' or 'distance'");
  return c;
}

StopNetwork load_network(const std::string& network_dir, const Config& config,
                         bool repair_triangle) {
  const std::string stops_path = network_dir + "/stops.csv";
  const std::string times_path = network_dir + "/travel_times.csv";
  if (!file_exists(stops_path)) throw InputError("missing input file '" + stops_path + "'");
  if (!file_exists(times_path)) throw InputError("missing input file '" + times_path + "'");

  NetworkInput input;
  input.hub_id = config.hub_id;
  input.hub_coords = config.hub_coords;
  input.lambda = config.lambda;

  const Csv stops = read_csv(stops_path);
  const std::size_t c_id = stops.column("stop_id", stops_path);
  const std::size_t c_lat = stops.column("lat", stops_path);
  const std::size_t c_lon = stops.column("lon", stops_path);
  const std::size_t c_qf = stops.column("demand_from_hub", stops_path);
  const std::size_t c_qt = stops.column("demand_to_hub", stops_path);
  const std::size_t c_tf = stops.column("alt_time_from_hub", stops_path);
  const std::size_t c_tt = stops.column("alt_time_to_hub", stops_path);
  const std::size_t c_df = stops.column("alt_dist_from_hub", stops_path);
  const std::size_t c_dt = stops.column("alt_dist_to_hub", stops_path);
  const std::size_t c_zf = stops.column("max_dev_from_hub", stops_path);
  const std::size_t c_zt = stops.column("max_dev_to_hub", stops_path);
  for (const auto& row : stops.rows) {
    Stop s;
    s.id = row[c_id];
    if (!row[c_lat].empty() && !row[c_lon].empty())
      s.coords = {parse_num(row[c_lat], stops_path), parse_num(row[c_lon], stops_path)};
    s.demand_from_hub = parse_num(row[c_qf], stops_path);
    s.demand_to_hub = parse_num(row[c_qt], stops_path);
    s.alt_time_from_hub = minutes_to_seconds(parse_num(row[c_tf], stops_path));
    s.alt_time_to_hub = minutes_to_seconds(parse_num(row[c_tt], stops_path));
    s.alt_dist_from_hub = parse_num(row[c_df], stops_path);
    s.alt_dist_to_hub = parse_num(row[c_dt], stops_path);
    s.max_dev_from_hub = parse_num(row[c_zf], stops_path);
    s.max_dev_to_hub = parse_num(row[c_zt], stops_path);
    input.stops.push_back(std::move(s));
  }

  const std::size_t n = input.stops.size() + 1;
  input.travel_time.assign(n * n, -1);
  for (std::size_t i = 0; i < n; ++i) input.travel_time[i * n + i] = 0;

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < input.stops.size(); ++i) index[input.stops[i].id] = i;
  index[input.hub_id] = n - 1;

  const Csv times = read_csv(times_path);
  const std::size_t c_from = times.column("from_id", times_path);
  const std::size_t c_to = times.column("to_id", times_path);
  const std::size_t c_min = times.column("minutes", times_path);
  for (const auto& row : times.rows) {
    const auto fi = index.find(row[c_from]);
    const auto ti = index.find(row[c_to]);
    if (fi == index.end() || ti == index.end())
      throw InputError("travel_times.csv references unknown id '" +
                       (fi == index.end() ? row[c_from] : row[c_to]) + "'");
    input.travel_time[fi->second * n + ti->second] =
        minutes_to_seconds(parse_num(row[c_min], times_path));
  }

  return validate_network(input, repair_triangle);
}

std::optional<TransitOverlay> load_overlay(const std::string& network_dir, const Config& config,
                                           const StopNetwork& network) {
  const std::string stations_path = network_dir + "/transit_stations.csv";
  if (!file_exists(stations_path)) return std::nullopt;
  const std::string times_path = network_dir + "/transit_times.csv";
  const std::string access_path = network_dir + "/access.csv";
  if (!file_exists(times_path)) throw InputError("missing input file '" + times_path + "'");
  if (!file_exists(access_path)) throw InputError("missing input file '" + access_path + "'");

  TransitOverlay ov;
  ov.sigma = static_cast<Seconds>(std::llround(config.sigma_seconds));

  const Csv stations = read_csv(stations_path);
  const std::size_t c_sid = stations.column("station_id", stations_path);
  std::map<std::string, std::size_t> sindex;
  for (const auto& row : stations.rows) {
    sindex[row[c_sid]] = ov.stations.size();
    ov.stations.push_back(row[c_sid]);
  }
  const std::size_t S = ov.stations.size();

  ov.station_time.assign(S * S, -1);
  for (std::size_t k = 0; k < S; ++k) ov.station_time[k * S + k] = 0;
  const Csv times = read_csv(times_path);
  const std::size_t c_f = times.column("from_station", times_path);
  const std::size_t c_t = times.column("to_station", times_path);
  const std::size_t c_m = times.column("minutes", times_path);
  for (const auto& row : times.rows) {
    const auto a = sindex.find(row[c_f]);
    const auto b = sindex.find(row[c_t]);
    if (a == sindex.end() || b == sindex.end())
      throw InputError("transit_times.csv references unknown station");
    ov.station_time[a->second * S + b->second] =
        minutes_to_seconds(parse_num(row[c_m], times_path));
  }
  for (Seconds& t : ov.station_time)
    if (t < 0) throw InputError("transit_times.csv must cover every station pair");

  ov.access_time.assign(network.node_count(), std::vector<Seconds>(S, -1));
  const Csv access = read_csv(access_path);
  const std::size_t c_stop = access.column("stop_id", access_path);
  const std::size_t c_station = access.column("station_id", access_path);
  const std::size_t c_walk = access.column("walk_minutes", access_path);
  for (const auto& row : access.rows) {
    std::size_t node;
    if (row[c_stop] == network.hub_id) {
      node = network.hub_index();
    } else {
      const auto idx = network.stop_index(row[c_stop]);
      if (!idx) throw InputError("access.csv references unknown stop '" + row[c_stop] + "'");
      node = *idx;
    }
    const auto st = sindex.find(row[c_station]);
    if (st == sindex.end()) throw InputError("access.csv references unknown station");
    ov.access_time[node][st->second] = minutes_to_seconds(parse_num(row[c_walk], access_path));
  }
  return ov;
}

void write_routes_geojson(const std::string& path, const StopNetwork& network,
                          const std::vector<Route>& routes) {
  ordered_json features = ordered_json::array();
  int from_count = 0, to_count = 0;
  for (const Route& r : routes) {
    ordered_json f;
    f["type"] = "Feature";
    const std::string route_id = (r.direction == Direction::FromHub ? "F" : "T") +
                                 std::to_string(r.direction == Direction::FromHub ? from_count++
                                                                                  : to_count++);
    // Geometry in driving order; empty when any coordinate is missing.
    bool have_coords = network.hub_coords.has_value();
    for (std::size_t s : r.stops) have_coords = have_coords && network.stops[s].coords.has_value();
    ordered_json coords = ordered_json::array();
    if (have_coords) {
      const auto push = [&](const std::pair<double, double>& c) {
        coords.push_back({round12(c.second), round12(c.first)});  // lon, lat
      };
      if (r.direction == Direction::FromHub) {
        push(*network.hub_coords);
        for (std::size_t s : r.stops) push(*network.stops[s].coords);
      } else {
        for (auto it = r.stops.rbegin(); it != r.stops.rend(); ++it)
          push(*network.stops[*it].coords);
        push(*network.hub_coords);
      }
    }
    f["geometry"] = {{"type", "LineString"}, {"coordinates", std::move(coords)}};
    ordered_json props = route_to_json(network, r);
    props["route_id"] = route_id;
    f["properties"] = std::move(props);
    features.push_back(std::move(f));
  }
  ordered_json root;
  root["type"] = "FeatureCollection";
  root["features"] = std::move(features);
  write_file(path, root.dump(2) + "\n");
}

std::vector<Route> read_routes_geojson(const std::string& path, const StopNetwork& network) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("cannot parse '" + path + "': " + e.what());
  }
  std::vector<Route> routes;
  for (const auto& f : j.at("features")) routes.push_back(route_from_json(network, f.at("properties")));
  return routes;
}

void write_roundtrips_json(const std::string& path, const StopNetwork& network,
                           const std::vector<RoundTrip>& trips) {
  ordered_json arr = ordered_json::array();
  for (const RoundTrip& t : trips) {
    ordered_json j;
    j["out"] = t.out.empty() ? ordered_json(nullptr) : route_to_json(network, t.out);
    j["back"] = t.back.empty() ? ordered_json(nullptr) : route_to_json(network, t.back);
    j["connect_time"] = round12(seconds_to_minutes(t.connect_time));
    j["total_time"] = round12(seconds_to_minutes(t.total_time));
    arr.push_back(std::move(j));
  }
  ordered_json root;
  root["roundtrips"] = std::move(arr);
  write_file(path, root.dump(2) + "\n");
}

std::vector<RoundTrip> read_roundtrips_json(const std::string& path, const StopNetwork& network) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("cannot parse '" + path + "': " + e.what());
  }
  std::vector<RoundTrip> trips;
  for (const auto& t : j.at("roundtrips")) {
    Route out{Direction::FromHub, {}, {}, {}, 0, 0.0};
    Route back{Direction::ToHub, {}, {}, {}, 0, 0.0};
    if (!t.at("out").is_null()) out = route_from_json(network, t["out"]);
    if (!t.at("back").is_null()) back = route_from_json(network, t["back"]);
    trips.push_back(make_round_trip(network, std::move(out), std::move(back)));
  }
  return trips;
}

void write_schedule_json(const std::string& path, const ScheduleRecord& record) {
  ordered_json j;
  j["gamma"] = record.gamma;
  j["status"] = record.status;
  j["objective"] = {{"operation", round12(record.schedule.objective.operation)},
                    {"waiting", round12(record.schedule.objective.waiting)},
                    {"loss", round12(record.schedule.objective.loss)},
                    {"total", round12(record.schedule.objective.total)}};
  ordered_json routes = ordered_json::array();
  for (std::size_t s = 0; s < record.schedule.routes.size(); ++s) {
    const RouteSchedule& r = record.schedule.routes[s];
    routes.push_back({{"route", s},
                      {"vehicles", r.vehicles},
                      {"headway", r.headway},
                      {"operated", r.operated}});
  }
  j["routes"] = std::move(routes);
  // Wall time stays in the in-memory records only; serialized artifacts
  // must be byte-identical across reruns.
  ordered_json hist = ordered_json::array();
  for (const auto& h : record.history)
    hist.push_back({{"iteration", h.iteration},
                    {"lb", round12(h.lower_bound)},
                    {"ub", round12(h.upper_bound)},
                    {"gap", round12(h.gap)}});
  j["history"] = std::move(hist);
  write_file(path, j.dump(2) + "\n");
}

ScheduleRecord read_schedule_json(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("cannot parse '" + path + "': " + e.what());
  }
  ScheduleRecord rec;
  rec.gamma = j.at("gamma").get<int>();
  rec.status = j.at("status").get<std::string>();
  rec.schedule.objective.operation = j.at("objective").at("operation").get<double>();
  rec.schedule.objective.waiting = j["objective"]["waiting"].get<double>();
  rec.schedule.objective.loss = j["objective"]["loss"].get<double>();
  rec.schedule.objective.total = j["objective"]["total"].get<double>();
  for (const auto& r : j.at("routes")) {
    RouteSchedule rs;
    rs.vehicles = r.at("vehicles").get<int>();
    rs.headway = r.at("headway").get<int>();
    rs.operated = r.at("operated").get<bool>();
    rec.schedule.routes.push_back(rs);
  }
  for (const auto& h : j.at("history"))
    rec.history.push_back({h.at("iteration").get<int>(), h.at("lb").get<double>(),
                           h.at("ub").get<double>(), h.at("gap").get<double>(), 0.0});
  return rec;
}

void write_ccg_history_csv(
    const std::string& path,
    const std::vector<std::pair<int, std::vector<robust::CcgIteration>>>& runs) {
  std::ostringstream os;
  os << "gamma,iteration,lower_bound,upper_bound,gap\n";
  for (const auto& [gamma, history] : runs)
    for (const auto& h : history)
      os << gamma << "," << h.iteration << "," << format_double(h.lower_bound) << ","
         << format_double(h.upper_bound) << "," << format_double(h.gap) << "\n";
  write_file(path, os.str());
}

void write_eval_report_csv(const std::string& path, const evalsim::GapReport& report) {
  std::ostringstream os;
  os << "gamma,n_vehicles,loss_rate_avg,loss_rate_half,loss_rate_full,"
        "total_avg,total_half,total_full,gap_avg,gap_half,gap_full\n";
  for (const auto& r : report.rows) {
    os << r.gamma << "," << r.vehicles << "," << format_double(r.avg_loss_rate) << ","
       << format_double(r.half_loss_rate) << "," << format_double(r.full_loss_rate) << ","
       << format_double(r.avg_total) << "," << format_double(r.half_total) << ","
       << format_double(r.full_total) << ",";
    if (r.gaps_defined)
      os << format_double(r.gap_avg) << "," << format_double(r.gap_half) << ","
         << format_double(r.gap_full);
    else
      os << "undefined,undefined,undefined";
    os << "\n";
  }
  write_file(path, os.str());
}

}  // namespace hubmod::io
