#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "hubmod/combine.hpp"
#include "hubmod/routegen.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace hubmod;

namespace {

// Ring of stops so connect times between terminals are controllable.
StopNetwork ring_network(int n) {
  NetworkInput in;
  in.hub_id = "hub";
  in.lambda = 2.0;
  const std::size_t nodes = n + 1;
  in.travel_time.assign(nodes * nodes, 0);
  const auto arc = [&](std::size_t a, std::size_t b) {
    if (a == nodes - 1 || b == nodes - 1) return 10.0;  // hub is central
    const int d = std::abs(static_cast<int>(a) - static_cast<int>(b));
    return 4.0 * std::min(d, n - d);
  };
  for (std::size_t i = 0; i < nodes; ++i)
    for (std::size_t j = 0; j < nodes; ++j)
      if (i != j) in.travel_time[i * nodes + j] = minutes_to_seconds(arc(i, j));
  // closure to restore the metric
  for (std::size_t k = 0; k < nodes; ++k)
    for (std::size_t i = 0; i < nodes; ++i)
      for (std::size_t j = 0; j < nodes; ++j)
        in.travel_time[i * nodes + j] = std::min(in.travel_time[i * nodes + j],
                                                 in.travel_time[i * nodes + k] +
                                                     in.travel_time[k * nodes + j]);
  for (int i = 0; i < n; ++i) {
    Stop s;
    s.id = "s" + std::to_string(i);
    s.demand_from_hub = 1.0;
    s.demand_to_hub = 1.0;
    s.alt_time_from_hub = minutes_to_seconds(10);
    s.alt_time_to_hub = minutes_to_seconds(10);
    in.stops.push_back(s);
  }
  return validate_network(in);
}

Route single_stop_route(const StopNetwork& net, Direction dir, std::size_t stop, double coverage) {
  Route r;
  r.direction = dir;
  r.stops = {stop};
  const Seconds t = dir == Direction::FromHub ? net.travel(net.hub_index(), stop)
                                              : net.travel(stop, net.hub_index());
  r.cum_time = {t};
  r.trip_time = t;
  r.coverage = coverage;
  return r;
}

}  // namespace

TEST_CASE("gap matrix: zero gap, infeasible pair, plain difference") {
  const StopNetwork net = ring_network(6);
  std::vector<Route> outs{single_stop_route(net, Direction::FromHub, 0, 5.0)};
  std::vector<Route> backs{single_stop_route(net, Direction::ToHub, 1, 5.0),
                           single_stop_route(net, Direction::ToHub, 3, 3.0)};
  const auto g = combine::build_gap_matrix(outs, backs, net);
  // terminal s0 -> origin s1: 4 min <= min(10,10): feasible, equal coverage
  CHECK(g.cost[0][0] == 0.0);
  // terminal s0 -> origin s3: 12 min > min(10,10): infeasible
  CHECK(g.cost[0][1] == g.big);
  CHECK(g.big == 1.0 + 5.0 + 5.0 + 3.0);

  // coverage gap 5 vs 3 when feasible
  std::vector<Route> near{single_stop_route(net, Direction::ToHub, 1, 3.0)};
  const auto g2 = combine::build_gap_matrix(outs, near, net);
  CHECK(g2.cost[0][0] == 2.0);
}

TEST_CASE("hungarian: one-by-one and the 2x2 hand example") {
  CHECK(combine::hungarian_match({{7.0}}) == std::vector<int>{0});
  const auto m = combine::hungarian_match({{1.0, 2.0}, {3.0, 1.0}});
  CHECK(m == std::vector<int>{0, 1});  // total 2 beats 5
}

TEST_CASE("hungarian equals the permutation oracle on random matrices") {
  std::mt19937_64 rng(93);
  std::uniform_int_distribution<int> cost(0, 40);
  for (int t = 0; t < 40; ++t) {
    const int n = 2 + static_cast<int>(rng() % 5);  // up to 6x6
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    for (auto& row : a)
      for (double& v : row) v = cost(rng);
    const auto match = combine::hungarian_match(a);
    double total = 0.0;
    std::vector<char> used(n, 0);
    for (int i = 0; i < n; ++i) {
      REQUIRE(match[i] >= 0);
      CHECK(!used[match[i]]);
      used[match[i]] = 1;
      total += a[i][match[i]];
    }
    CHECK(total == testsupport::permutation_assignment_cost(a));
  }
}

TEST_CASE("round trips: matched pair, dummy-matched, full hand instance") {
  const StopNetwork net = ring_network(6);
  std::vector<Route> outs{single_stop_route(net, Direction::FromHub, 0, 5.0),
                          single_stop_route(net, Direction::FromHub, 2, 2.0)};
  std::vector<Route> backs{single_stop_route(net, Direction::ToHub, 1, 5.0)};

  const auto trips = combine::combine_routes(outs, backs, net);
  REQUIRE(trips.size() == 2);

  // paired: out s0 with back s1 (equal coverage, adjacent)
  const RoundTrip* paired = nullptr;
  const RoundTrip* solo = nullptr;
  for (const auto& t : trips)
    (t.back.empty() ? solo : paired) = &t;
  REQUIRE(paired != nullptr);
  REQUIRE(solo != nullptr);
  CHECK(paired->out.terminal() == 0);
  CHECK(paired->back.terminal() == 1);
  CHECK(paired->total_time ==
        paired->out.trip_time + net.travel(0, 1) + paired->back.trip_time);
  // dummy-matched out returns to the hub
  CHECK(solo->out.terminal() == 2);
  CHECK(solo->connect_time == net.travel(2, net.hub_index()));
  CHECK(solo->total_time == solo->out.trip_time + solo->connect_time);
}

TEST_CASE("every route lands in exactly one round trip; no infeasible joins") {
  std::mt19937_64 rng(97);
  for (int t = 0; t < 10; ++t) {
    testsupport::NetworkParams p;
    p.stops = 8;
    const StopNetwork net = testsupport::random_metric_network(rng, p);
    const auto outs = routegen::generate_k_mcr(net, Direction::FromHub, 3);
    const auto backs = routegen::generate_k_mcr(net, Direction::ToHub, 3);
    if (outs.empty() || backs.empty()) continue;
    const auto trips = combine::combine_routes(outs, backs, net);

    std::size_t out_seen = 0, back_seen = 0;
    for (const auto& trip : trips) {
      if (!trip.out.empty()) ++out_seen;
      if (!trip.back.empty()) ++back_seen;
      if (!trip.out.empty() && !trip.back.empty()) {
        const Seconds connect = net.travel(trip.out.terminal(), trip.back.terminal());
        CHECK(connect <= std::min(trip.out.trip_time, trip.back.trip_time));
        CHECK(trip.total_time == trip.out.trip_time + connect + trip.back.trip_time);
      }
    }
    CHECK(out_seen == outs.size());
    CHECK(back_seen == backs.size());
  }
}

TEST_CASE("one empty side yields hub-return loops") {
  const StopNetwork net = ring_network(4);
  std::vector<Route> outs{single_stop_route(net, Direction::FromHub, 0, 1.0)};
  const auto trips = combine::combine_routes(outs, {}, net);
  REQUIRE(trips.size() == 1);
  CHECK(trips[0].back.empty());
  CHECK(trips[0].total_time == trips[0].out.trip_time + net.travel(0, net.hub_index()));
}

TEST_CASE("distance connect rule uses geometry instead of times") {
  // stops far apart in distance but joined by fast times: the time rule
  // accepts the pairing, the distance rule rejects it
  NetworkInput in;
  in.hub_id = "hub";
  in.hub_coords = {{0.0, 0.0}};
  in.lambda = 3.0;
  in.travel_time.assign(9, 0);
  const double w[3][3] = {{0, 2, 10}, {2, 0, 10}, {10, 10, 0}};  // minutes; hub last
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) in.travel_time[i * 3 + j] = minutes_to_seconds(w[i][j]);
  Stop a;
  a.id = "a";
  a.coords = {{0.0, 30.0}};  // geometrically distant from b
  a.demand_from_hub = 1.0;
  a.demand_to_hub = 1.0;
  a.alt_time_from_hub = minutes_to_seconds(10);
  a.alt_time_to_hub = minutes_to_seconds(10);
  Stop b = a;
  b.id = "b";
  b.coords = {{30.0, 0.0}};
  in.stops = {a, b};
  const StopNetwork net = validate_network(in);

  Route out;
  out.direction = Direction::FromHub;
  out.stops = {0};
  out.cum_time = {net.travel(2, 0)};
  out.trip_time = out.cum_time[0];
  out.coverage = 1.0;
  Route back;
  back.direction = Direction::ToHub;
  back.stops = {1};
  back.cum_time = {net.travel(1, 2)};
  back.trip_time = back.cum_time[0];
  back.coverage = 1.0;

  const auto by_time = combine::build_gap_matrix({out}, {back}, net, combine::ConnectRule::Time);
  CHECK(by_time.cost[0][0] == 0.0);  // 2 min connect <= 10 min trips
  const auto by_dist =
      combine::build_gap_matrix({out}, {back}, net, combine::ConnectRule::Distance);
  // connect distance ~42.4 exceeds both 30-unit legs
  CHECK(by_dist.cost[0][0] == by_dist.big);
}
