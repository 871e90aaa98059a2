#include "hubmod/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace hubmod {

namespace {

std::string issue_kind_name(ValidationIssue::Kind k) {
  switch (k) {
    case ValidationIssue::Kind::MissingHub: return "missing_hub";
    case ValidationIssue::Kind::DuplicateStop: return "duplicate_stop";
    case ValidationIssue::Kind::NegativeValue: return "negative_value";
    case ValidationIssue::Kind::NonFiniteValue: return "non_finite_value";
    case ValidationIssue::Kind::TriangleInequality: return "triangle_inequality";
    case ValidationIssue::Kind::MissingEntry: return "missing_entry";
  }
  return "unknown";
}

std::string summarize(const std::vector<ValidationIssue>& issues) {
  std::ostringstream os;
  os << "network validation failed with " << issues.size() << " issue(s):";
  for (const auto& is : issues) os << "\n  [" << issue_kind_name(is.kind) << "] " << is.detail;
  return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : std::runtime_error(summarize(issues)), issues_(std::move(issues)) {}

void StopNetwork::set_lambda(double value) {
  lambda = value;
  // Decimal to exact rational; denominators beyond 1e9 round.
  std::int64_t den = 1;
  double scaled = value;
  while (den < 1000000000LL && std::abs(scaled - std::llround(scaled)) > 1e-9 * std::max(1.0, std::abs(scaled))) {
    scaled *= 10.0;
    den *= 10;
  }
  lambda_num = std::llround(scaled);
  lambda_den = den;
}

StopNetwork validate_network(const NetworkInput& input, bool repair_triangle) {
  std::vector<ValidationIssue> issues;
  auto add = [&](ValidationIssue::Kind kind, std::string detail) {
    issues.push_back({kind, std::move(detail)});
  };

  if (input.hub_id.empty()) add(ValidationIssue::Kind::MissingHub, "hub id is empty");
  if (!(input.lambda >= 1.0) || !std::isfinite(input.lambda))
    add(ValidationIssue::Kind::NegativeValue, "lambda must be a finite value >= 1");

  std::set<std::string> seen;
  for (const auto& s : input.stops) {
    if (s.id == input.hub_id)
      add(ValidationIssue::Kind::DuplicateStop, "stop '" + s.id + "' has the hub id");
    if (!seen.insert(s.id).second)
      add(ValidationIssue::Kind::DuplicateStop, "stop '" + s.id + "' appears more than once");

    auto check_field = [&](double v, const char* field, bool strictly_positive = false) {
      if (!std::isfinite(v)) {
        add(ValidationIssue::Kind::NonFiniteValue, "stop '" + s.id + "' field " + field);
      } else if (v < 0.0 || (strictly_positive && v == 0.0)) {
        add(ValidationIssue::Kind::NegativeValue,
            "stop '" + s.id + "' field " + field + (strictly_positive ? " must be > 0" : " must be >= 0"));
      }
    };
    check_field(s.demand_from_hub, "demand_from_hub");
    check_field(s.demand_to_hub, "demand_to_hub");
    check_field(static_cast<double>(s.alt_time_from_hub), "alt_time_from_hub", true);
    check_field(static_cast<double>(s.alt_time_to_hub), "alt_time_to_hub", true);
    check_field(s.alt_dist_from_hub, "alt_dist_from_hub");
    check_field(s.alt_dist_to_hub, "alt_dist_to_hub");
    check_field(s.max_dev_from_hub, "max_dev_from_hub");
    check_field(s.max_dev_to_hub, "max_dev_to_hub");
  }

  const std::size_t n = input.stops.size() + 1;
  if (input.travel_time.size() != n * n)
    throw std::invalid_argument("travel_time matrix has wrong size");

  auto node_name = [&](std::size_t i) {
    return i + 1 == n ? input.hub_id : input.stops[i].id;
  };

  std::vector<Seconds> w = input.travel_time;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (w[i * n + j] < 0)
        add(ValidationIssue::Kind::MissingEntry,
            "travel time " + node_name(i) + " -> " + node_name(j) + " is missing or negative");
    }
  }

  if (issues.empty()) {
    if (repair_triangle) {
      // Shortest-path closure restores the metric property.
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            w[i * n + j] = std::min(w[i * n + j], w[i * n + k] + w[k * n + j]);
    } else {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t k = 0; k < n; ++k)
            if (w[i * n + j] + w[j * n + k] < w[i * n + k])
              add(ValidationIssue::Kind::TriangleInequality,
                  "w(" + node_name(i) + "," + node_name(j) + ") + w(" + node_name(j) + "," +
                      node_name(k) + ") < w(" + node_name(i) + "," + node_name(k) + ")");
    }
  }

  if (!issues.empty()) throw ValidationError(std::move(issues));

  StopNetwork net;
  net.hub_id = input.hub_id;
  net.hub_coords = input.hub_coords;
  net.stops = input.stops;
  net.set_lambda(input.lambda);
  net.set_travel_matrix(std::move(w));
  return net;
}

Seconds min_transfer_cost(const TransitOverlay& overlay, std::size_t a, std::size_t b) {
  const std::size_t s = overlay.station_count();
  Seconds best = -1;
  for (std::size_t k = 0; k < s; ++k) {
    if (!overlay.has_access(a, k)) continue;
    for (std::size_t k2 = 0; k2 < s; ++k2) {
      if (!overlay.has_access(b, k2)) continue;
      Seconds c = overlay.access_time[a][k] + overlay.station_travel(k, k2) + overlay.access_time[b][k2];
      if (best < 0 || c < best) best = c;
    }
  }
  return best;
}

void check_route(const StopNetwork& network, const Route& route, const TransitOverlay* overlay) {
  if (route.stops.empty()) throw std::logic_error("route has no stops");
  if (route.cum_time.size() != route.stops.size())
    throw std::logic_error("route cum_time size mismatch");

  std::set<std::size_t> visited(route.stops.begin(), route.stops.end());
  if (visited.size() != route.stops.size()) throw std::logic_error("route repeats a stop");
  for (std::size_t t : route.transfer_covered)
    if (visited.count(t)) throw std::logic_error("transfer-covered stop is also visited");
  std::set<std::size_t> transfer(route.transfer_covered.begin(), route.transfer_covered.end());
  if (transfer.size() != route.transfer_covered.size())
    throw std::logic_error("transfer-covered stop repeated");

  const std::size_t hub = network.hub_index();
  const Direction dir = route.direction;
  Seconds elapsed = 0;
  std::size_t prev = hub;
  for (std::size_t k = 0; k < route.stops.size(); ++k) {
    const std::size_t stop = route.stops[k];
    elapsed += network.travel_dir(prev, stop, dir);
    if (elapsed != route.cum_time[k]) throw std::logic_error("route cum_time inconsistent");
    if (k > 0 && route.cum_time[k] <= route.cum_time[k - 1])
      throw std::logic_error("route cum_time not strictly increasing");
    if (!network.within_deviation(elapsed, network.alt_time(stop, dir)))
      throw std::logic_error("route violates the deviation constraint at stop " +
                             network.stops[stop].id);
    prev = stop;
  }
  if (route.trip_time != elapsed) throw std::logic_error("route trip_time inconsistent");

  if (!route.transfer_covered.empty()) {
    if (overlay == nullptr) throw std::logic_error("transfer-covered stops without an overlay");
    for (std::size_t target : route.transfer_covered) {
      // Some visited node (or the hub at time 0) must make the transfer
      // inequality hold for the covered stop.
      bool ok = false;
      Seconds at = 0;
      std::size_t node = hub;
      for (std::size_t k = 0; k <= route.stops.size() && !ok; ++k) {
        if (k > 0) {
          node = route.stops[k - 1];
          at = route.cum_time[k - 1];
        }
        Seconds c = dir == Direction::FromHub ? min_transfer_cost(*overlay, node, target)
                                              : min_transfer_cost(*overlay, target, node);
        if (c >= 0 &&
            network.within_deviation(at + c + overlay->sigma, network.alt_time(target, dir)))
          ok = true;
      }
      if (!ok)
        throw std::logic_error("transfer inequality fails for covered stop " +
                               network.stops[target].id);
    }
  }
}

RoundTrip make_round_trip(const StopNetwork& network, Route out, Route back) {
  if (out.empty() && back.empty()) throw std::invalid_argument("round trip needs at least one leg");
  const std::size_t hub = network.hub_index();

  RoundTrip rt;
  if (!out.empty() && !back.empty()) {
    rt.connect_time = network.travel(out.terminal(), back.terminal());
  } else if (!out.empty()) {
    rt.connect_time = network.travel(out.terminal(), hub);
  } else {
    rt.connect_time = network.travel(hub, back.terminal());
  }
  rt.total_time = (out.empty() ? 0 : out.trip_time) + rt.connect_time +
                  (back.empty() ? 0 : back.trip_time);

  auto serve_set = [](const Route& r) {
    std::vector<std::size_t> s(r.stops.begin(), r.stops.end());
    s.insert(s.end(), r.transfer_covered.begin(), r.transfer_covered.end());
    std::sort(s.begin(), s.end());
    return s;
  };
  rt.serves_from = serve_set(out);
  rt.serves_to = serve_set(back);
  rt.out = std::move(out);
  rt.back = std::move(back);
  return rt;
}

}  // namespace hubmod
