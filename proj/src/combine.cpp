#include "hubmod/combine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hubmod::combine {

namespace {

std::pair<double, double> coords_or_throw(const StopNetwork& net, std::size_t node) {
  const auto& c = node == net.hub_index() ? net.hub_coords : net.stops[node].coords;
  if (!c) throw std::runtime_error("distance connect rule needs stop coordinates");
  return *c;
}

double euclid(std::pair<double, double> a, std::pair<double, double> b) {
  const double dx = a.first - b.first, dy = a.second - b.second;
  return std::sqrt(dx * dx + dy * dy);
}

double route_length(const StopNetwork& net, const Route& r) {
  double len = 0.0;
  std::size_t prev = net.hub_index();
  for (std::size_t s : r.stops) {
    len += euclid(coords_or_throw(net, prev), coords_or_throw(net, s));
    prev = s;
  }
  return len;
}

}  // namespace

GapMatrix build_gap_matrix(const std::vector<Route>& outs, const std::vector<Route>& backs,
                           const StopNetwork& network, ConnectRule rule) {
  if (outs.empty() || backs.empty()) throw std::invalid_argument("both route sets must be nonempty");

  double total = 0.0;
  for (const Route& r : outs) total += r.coverage;
  for (const Route& r : backs) total += r.coverage;

  GapMatrix g;
  g.big = 1.0 + total;
  g.cost.assign(outs.size(), std::vector<double>(backs.size(), g.big));
  for (std::size_t i = 0; i < outs.size(); ++i) {
    for (std::size_t j = 0; j < backs.size(); ++j) {
      bool feasible;
      if (rule == ConnectRule::Time) {
        const Seconds connect = network.travel(outs[i].terminal(), backs[j].terminal());
        feasible = connect <= std::min(outs[i].trip_time, backs[j].trip_time);
      } else {
        const double connect = euclid(coords_or_throw(network, outs[i].terminal()),
                                      coords_or_throw(network, backs[j].terminal()));
        feasible = connect <= std::min(route_length(network, outs[i]),
                                       route_length(network, backs[j]));
      }
      if (feasible) g.cost[i][j] = std::abs(outs[i].coverage - backs[j].coverage);
    }
  }
  return g;
}

std::vector<int> hungarian_match(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  for (const auto& row : cost)
    if (static_cast<int>(row.size()) != n) throw std::invalid_argument("cost matrix must be square");
  if (n == 0) return {};

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Potentials-based shortest augmenting path, 1-based.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

std::vector<RoundTrip> form_roundtrips(const std::vector<int>& match, const GapMatrix& gaps,
                                       const std::vector<Route>& outs,
                                       const std::vector<Route>& backs,
                                       const StopNetwork& network) {
  const std::size_t n_out = outs.size();
  const std::size_t n_back = backs.size();
  std::vector<char> back_paired(n_back, 0);
  std::vector<RoundTrip> trips;

  for (std::size_t i = 0; i < match.size(); ++i) {
    const int j = match[i];
    const bool real_row = i < n_out;
    const bool real_col = j >= 0 && static_cast<std::size_t>(j) < n_back;
    if (real_row && real_col && gaps.cost[i][j] < gaps.big) {
      trips.push_back(make_round_trip(network, outs[i], backs[j]));
      back_paired[j] = 1;
    } else if (real_row) {
      trips.push_back(make_round_trip(network, outs[i], Route{Direction::ToHub, {}, {}, {}, 0, 0.0}));
    }
  }
  for (std::size_t j = 0; j < n_back; ++j)
    if (!back_paired[j])
      trips.push_back(make_round_trip(network, Route{Direction::FromHub, {}, {}, {}, 0, 0.0}, backs[j]));
  return trips;
}

std::vector<RoundTrip> combine_routes(const std::vector<Route>& outs,
                                      const std::vector<Route>& backs,
                                      const StopNetwork& network, ConnectRule rule) {
  if (outs.empty() && backs.empty()) return {};
  if (outs.empty() || backs.empty()) {
    std::vector<RoundTrip> trips;
    for (const Route& r : outs)
      trips.push_back(make_round_trip(network, r, Route{Direction::ToHub, {}, {}, {}, 0, 0.0}));
    for (const Route& r : backs)
      trips.push_back(make_round_trip(network, Route{Direction::FromHub, {}, {}, {}, 0, 0.0}, r));
    return trips;
  }

  GapMatrix g = build_gap_matrix(outs, backs, network, rule);
  const std::size_t n = std::max(outs.size(), backs.size());
  std::vector<std::vector<double>> padded(n, std::vector<double>(n, g.big));
  for (std::size_t i = 0; i < outs.size(); ++i)
    for (std::size_t j = 0; j < backs.size(); ++j) padded[i][j] = g.cost[i][j];
  return form_roundtrips(hungarian_match(padded), g, outs, backs, network);
}

}  // namespace hubmod::combine
