#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "hubmod/model.hpp"
#include "instances.hpp"

using namespace hubmod;

namespace {

NetworkInput symmetric_unit_instance() {
  NetworkInput in;
  in.hub_id = "hub";
  in.lambda = 1.3;
  for (int i = 0; i < 3; ++i) {
    Stop s;
    s.id = "s" + std::to_string(i);
    s.demand_from_hub = 1.0;
    s.demand_to_hub = 1.0;
    s.alt_time_from_hub = 60;
    s.alt_time_to_hub = 60;
    in.stops.push_back(s);
  }
  in.travel_time.assign(16, 60);
  for (int i = 0; i < 4; ++i) in.travel_time[i * 4 + i] = 0;
  return in;
}

}  // namespace

TEST_CASE("symmetric unit instance validates") {
  const StopNetwork net = validate_network(symmetric_unit_instance());
  CHECK(net.stop_count() == 3);
  CHECK(net.hub_index() == 3);
  CHECK(net.travel(0, 1) == 60);
  CHECK(net.lambda_num == 13);
  CHECK(net.lambda_den == 10);
}

TEST_CASE("triangle inequality violation reported with the triple") {
  NetworkInput in = symmetric_unit_instance();
  // w(s0,s1) + w(s1,s2) < w(s0,s2)
  in.travel_time[0 * 4 + 2] = 300;
  try {
    validate_network(in);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(!e.issues().empty());
    bool found = false;
    for (const auto& is : e.issues())
      if (is.kind == ValidationIssue::Kind::TriangleInequality &&
          is.detail.find("s0") != std::string::npos && is.detail.find("s2") != std::string::npos)
        found = true;
    CHECK(found);
  }
}

TEST_CASE("triangle repair closes the matrix instead of failing") {
  NetworkInput in = symmetric_unit_instance();
  in.travel_time[0 * 4 + 2] = 300;
  const StopNetwork net = validate_network(in, /*repair_triangle=*/true);
  CHECK(net.travel(0, 2) == 120);  // via s1
}

TEST_CASE("negative demand rejected") {
  NetworkInput in = symmetric_unit_instance();
  in.stops[1].demand_to_hub = -1.0;
  try {
    validate_network(in);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(e.issues().size() == 1);
    CHECK(e.issues()[0].kind == ValidationIssue::Kind::NegativeValue);
    CHECK(e.issues()[0].detail.find("demand_to_hub") != std::string::npos);
  }
}

TEST_CASE("duplicate stop and hub collision rejected") {
  NetworkInput in = symmetric_unit_instance();
  in.stops[2].id = "s0";
  CHECK_THROWS_AS(validate_network(in), ValidationError);
  in = symmetric_unit_instance();
  in.stops[0].id = "hub";
  CHECK_THROWS_AS(validate_network(in), ValidationError);
}

TEST_CASE("zero alternative-mode time rejected") {
  NetworkInput in = symmetric_unit_instance();
  in.stops[0].alt_time_from_hub = 0;
  CHECK_THROWS_AS(validate_network(in), ValidationError);
}

TEST_CASE("lambda parses to an exact rational") {
  StopNetwork net;
  net.set_lambda(1.25);
  CHECK(net.lambda_num == 125);
  CHECK(net.lambda_den == 100);
  // boundary: 10 * 1.3 == 13 exactly, strict test fails at equality
  net.set_lambda(1.3);
  CHECK(!net.within_deviation(13, 10));
  CHECK(net.within_deviation(12, 10));
}

TEST_CASE("route re-check accepts generated data and rejects corruption") {
  const StopNetwork net = validate_network(symmetric_unit_instance());
  Route r;
  r.direction = Direction::FromHub;
  r.stops = {0};
  r.cum_time = {60};
  r.trip_time = 60;
  // feasible: 60 < 1.3 * 60
  CHECK_NOTHROW(check_route(net, r));

  Route bad = r;
  bad.cum_time = {61};
  CHECK_THROWS_AS(check_route(net, bad), std::logic_error);

  Route repeat = r;
  repeat.stops = {0, 0};
  repeat.cum_time = {60, 120};
  repeat.trip_time = 120;
  CHECK_THROWS_AS(check_route(net, repeat), std::logic_error);
}

TEST_CASE("round trip time adds the three components exactly") {
  const StopNetwork net = validate_network(symmetric_unit_instance());
  Route out;
  out.direction = Direction::FromHub;
  out.stops = {0};
  out.cum_time = {60};
  out.trip_time = 60;
  Route back;
  back.direction = Direction::ToHub;
  back.stops = {2};
  back.cum_time = {60};
  back.trip_time = 60;

  const RoundTrip rt = make_round_trip(net, out, back);
  CHECK(rt.connect_time == 60);  // terminal s0 -> origin s2
  CHECK(rt.total_time == 180);
  CHECK(rt.serves_from == std::vector<std::size_t>{0});
  CHECK(rt.serves_to == std::vector<std::size_t>{2});

  const RoundTrip solo = make_round_trip(net, out, Route{Direction::ToHub, {}, {}, {}, 0, 0.0});
  CHECK(solo.connect_time == 60);  // back to hub
  CHECK(solo.total_time == 120);
}

TEST_CASE("random metric instances validate by construction") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    testsupport::NetworkParams params;
    params.stops = 6 + static_cast<int>(rng() % 5);
    CHECK_NOTHROW(testsupport::random_metric_network(rng, params));
  }
}
