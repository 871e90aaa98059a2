#include "hubmod/spbench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace hubmod::spbench {

namespace {

struct PathCandidate {
  Seconds cost;
  std::vector<std::size_t> nodes;
  bool operator<(const PathCandidate& o) const {
    if (cost != o.cost) return cost < o.cost;
    return nodes < o.nodes;
  }
};

// Dijkstra over the complete graph, honoring banned nodes and edges.
std::vector<std::size_t> shortest_path(const StopNetwork& net, std::size_t src, std::size_t dst,
                                       const std::vector<char>& banned_node,
                                       const std::set<std::pair<std::size_t, std::size_t>>& banned_edge,
                                       Seconds* cost_out) {
  const std::size_t n = net.node_count();
  constexpr Seconds kInf = std::numeric_limits<Seconds>::max() / 4;
  std::vector<Seconds> dist(n, kInf);
  std::vector<int> prev(n, -1);
  std::vector<char> done(n, 0);
  dist[src] = 0;
  for (;;) {
    std::size_t u = n;
    Seconds best = kInf;
    for (std::size_t i = 0; i < n; ++i)
      if (!done[i] && !banned_node[i] && dist[i] < best) {
        best = dist[i];
        u = i;
      }
    if (u == n) break;
    done[u] = 1;
    if (u == dst) break;
    for (std::size_t v = 0; v < n; ++v) {
      if (v == u || done[v] || banned_node[v]) continue;
      if (banned_edge.count({u, v})) continue;
      const Seconds nd = dist[u] + net.travel(u, v);
      if (nd < dist[v]) {
        dist[v] = nd;
        prev[v] = static_cast<int>(u);
      }
    }
  }
  if (dist[dst] >= kInf) return {};
  std::vector<std::size_t> path;
  for (int v = static_cast<int>(dst); v >= 0; v = prev[v]) path.push_back(static_cast<std::size_t>(v));
  std::reverse(path.begin(), path.end());
  if (cost_out) *cost_out = dist[dst];
  return path;
}

Seconds path_cost(const StopNetwork& net, const std::vector<std::size_t>& nodes) {
  Seconds c = 0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) c += net.travel(nodes[i], nodes[i + 1]);
  return c;
}

// Yen's loopless k-shortest paths between src and dst.
std::vector<PathCandidate> yen(const StopNetwork& net, std::size_t src, std::size_t dst, int k) {
  std::vector<PathCandidate> accepted;
  std::vector<char> no_ban(net.node_count(), 0);
  Seconds c0 = 0;
  std::vector<std::size_t> first = shortest_path(net, src, dst, no_ban, {}, &c0);
  if (first.empty()) return accepted;
  accepted.push_back({c0, std::move(first)});

  std::set<PathCandidate> candidates;
  while (static_cast<int>(accepted.size()) < k) {
    const std::vector<std::size_t>& last = accepted.back().nodes;
    for (std::size_t i = 0; i + 1 < last.size(); ++i) {
      const std::vector<std::size_t> root(last.begin(), last.begin() + i + 1);
      std::set<std::pair<std::size_t, std::size_t>> banned_edge;
      for (const auto& p : accepted) {
        if (p.nodes.size() > i &&
            std::equal(root.begin(), root.end(), p.nodes.begin()) && p.nodes.size() > i + 1)
          banned_edge.insert({p.nodes[i], p.nodes[i + 1]});
      }
      std::vector<char> banned_node(net.node_count(), 0);
      for (std::size_t j = 0; j < i; ++j) banned_node[root[j]] = 1;

      Seconds spur_cost = 0;
      std::vector<std::size_t> spur =
          shortest_path(net, root.back(), dst, banned_node, banned_edge, &spur_cost);
      if (spur.empty()) continue;
      std::vector<std::size_t> total = root;
      total.insert(total.end(), spur.begin() + 1, spur.end());
      candidates.insert({path_cost(net, total), std::move(total)});
    }
    if (candidates.empty()) break;
    auto it = candidates.begin();
    if (std::none_of(accepted.begin(), accepted.end(),
                     [&](const PathCandidate& p) { return p.nodes == it->nodes; }))
      accepted.push_back(*it);
    candidates.erase(it);
  }
  return accepted;
}

std::vector<std::pair<std::size_t, std::size_t>> links_of(const PathRoute& r) {
  std::vector<std::pair<std::size_t, std::size_t>> ls;
  for (std::size_t i = 0; i + 1 < r.nodes.size(); ++i) ls.push_back({r.nodes[i], r.nodes[i + 1]});
  return ls;
}

std::set<std::size_t> stop_set(const PathRoute& r, std::size_t hub) {
  std::set<std::size_t> s(r.nodes.begin(), r.nodes.end());
  s.erase(hub);
  return s;
}

bool has_repeated_link(const std::vector<std::size_t>& nodes) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    if (!seen.insert({nodes[i], nodes[i + 1]}).second) return true;
  return false;
}

double route_weight_from_stops(const PathRoute& r, const std::vector<double>& stop_weight,
                               std::size_t hub) {
  double w = 0.0;
  for (std::size_t x : stop_set(r, hub)) w += stop_weight[x];
  return w;
}

std::pair<double, double> coords_of(const StopNetwork& net, std::size_t node) {
  const auto& c = node == net.hub_index() ? net.hub_coords : net.stops[node].coords;
  if (!c) throw std::runtime_error("missing coordinates for geometric route pruning");
  return *c;
}

double euclid(std::pair<double, double> a, std::pair<double, double> b) {
  const double dx = a.first - b.first, dy = a.second - b.second;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

std::vector<PathRoute> k_shortest_routes(const StopNetwork& network, int k, Direction dir) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::vector<PathRoute> out;
  const std::size_t hub = network.hub_index();
  for (std::size_t i = 0; i < network.stop_count(); ++i) {
    const std::size_t src = dir == Direction::FromHub ? hub : i;
    const std::size_t dst = dir == Direction::FromHub ? i : hub;
    for (PathCandidate& p : yen(network, src, dst, k))
      out.push_back({std::move(p.nodes), p.cost, 0.0});
  }
  return out;
}

WeightedRouteSet assign_demand(std::vector<PathRoute> routes, const StopNetwork& network,
                               Direction dir, double softmax_unit_minutes) {
  if (routes.empty()) throw std::invalid_argument("assign_demand needs routes");
  const std::size_t n = network.stop_count();
  const std::size_t hub = network.hub_index();

  WeightedRouteSet set;
  set.stop_weight.assign(n, 0.0);
  set.assignment.assign(n, {});

  // Travel time between the hub and each stop along each route that
  // passes it, oriented with the passenger's trip.
  for (std::size_t r = 0; r < routes.size(); ++r) {
    const auto& nodes = routes[r].nodes;
    Seconds t = 0;
    if (dir == Direction::FromHub) {
      for (std::size_t i = 1; i < nodes.size(); ++i) {
        t += network.travel(nodes[i - 1], nodes[i]);
        if (nodes[i] != hub)
          set.assignment[nodes[i]].push_back({static_cast<int>(r), static_cast<double>(t)});
      }
    } else {
      // time is the suffix toward the hub
      std::vector<Seconds> suffix(nodes.size(), 0);
      for (std::size_t i = nodes.size() - 1; i-- > 0;)
        suffix[i] = suffix[i + 1] + network.travel(nodes[i], nodes[i + 1]);
      for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        if (nodes[i] != hub)
          set.assignment[nodes[i]].push_back({static_cast<int>(r), static_cast<double>(suffix[i])});
    }
  }

  // Softmax over travel time per stop.
  for (std::size_t i = 0; i < n; ++i) {
    auto& list = set.assignment[i];
    if (list.empty()) continue;
    double denom = 0.0;
    for (auto& [r, t] : list) {
      t = std::exp(-seconds_to_minutes(static_cast<Seconds>(t)) / softmax_unit_minutes);
      denom += t;
    }
    for (auto& [r, p] : list) p /= denom;
  }

  // W_i accumulates each stop's demand share over every stop the carrying
  // route passes.
  for (std::size_t j = 0; j < n; ++j) {
    const double qj = network.demand(j, dir);
    if (qj == 0.0) continue;
    for (const auto& [r, p] : set.assignment[j])
      for (std::size_t node : routes[r].nodes)
        if (node != hub) set.stop_weight[node] += qj * p;
  }
  for (auto& r : routes) r.weight = route_weight_from_stops(r, set.stop_weight, hub);
  set.routes = std::move(routes);
  return set;
}

WeightedRouteSet expand_routes(const WeightedRouteSet& set, const StopNetwork& network) {
  const std::size_t hub = network.hub_index();
  std::set<std::vector<std::size_t>> seen;
  WeightedRouteSet out;
  out.stop_weight = set.stop_weight;
  out.assignment.assign(network.stop_count(), {});

  auto push = [&](std::vector<std::size_t> nodes) {
    if (nodes.size() < 2 || has_repeated_link(nodes)) return;
    if (!seen.insert(nodes).second) return;
    PathRoute r;
    r.travel_time = path_cost(network, nodes);
    r.nodes = std::move(nodes);
    r.weight = route_weight_from_stops(r, out.stop_weight, hub);
    out.routes.push_back(std::move(r));
  };

  for (const auto& r : set.routes) push(r.nodes);

  for (std::size_t a = 0; a < set.routes.size(); ++a) {
    for (std::size_t b = a + 1; b < set.routes.size(); ++b) {
      const auto la = links_of(set.routes[a]);
      const auto lb = links_of(set.routes[b]);
      const auto sa = stop_set(set.routes[a], hub);
      const auto sb = stop_set(set.routes[b], hub);
      const bool subset = std::includes(sb.begin(), sb.end(), sa.begin(), sa.end()) ||
                          std::includes(sa.begin(), sa.end(), sb.begin(), sb.end());
      for (std::size_t i = 0; i < la.size(); ++i) {
        for (std::size_t j = 0; j < lb.size(); ++j) {
          if (la[i] != lb[j]) continue;
          std::vector<std::size_t> splice_ab(set.routes[a].nodes.begin(),
                                             set.routes[a].nodes.begin() + i + 2);
          splice_ab.insert(splice_ab.end(), set.routes[b].nodes.begin() + j + 2,
                           set.routes[b].nodes.end());
          push(std::move(splice_ab));
          if (!subset) {
            std::vector<std::size_t> splice_ba(set.routes[b].nodes.begin(),
                                               set.routes[b].nodes.begin() + j + 2);
            splice_ba.insert(splice_ba.end(), set.routes[a].nodes.begin() + i + 2,
                             set.routes[a].nodes.end());
            push(std::move(splice_ba));
          }
        }
      }
    }
  }
  return out;
}

WeightedRouteSet prune_routes(const WeightedRouteSet& set, const StopNetwork& network,
                              const PruneThresholds& thresholds) {
  const std::size_t hub = network.hub_index();

  struct Geo {
    double length;
    double circuity;
    std::vector<std::pair<double, double>> midpoints;  // link centers
    std::vector<double> seglen;
  };
  std::vector<Geo> geo(set.routes.size());
  for (std::size_t r = 0; r < set.routes.size(); ++r) {
    const auto& nodes = set.routes[r].nodes;
    Geo g{0.0, 0.0, {}, {}};
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      const auto p = coords_of(network, nodes[i]);
      const auto q = coords_of(network, nodes[i + 1]);
      g.length += euclid(p, q);
      g.midpoints.push_back({(p.first + q.first) / 2, (p.second + q.second) / 2});
    }
    const double direct = euclid(coords_of(network, nodes.front()), coords_of(network, nodes.back()));
    g.circuity = direct > 0.0 ? g.length / direct : std::numeric_limits<double>::infinity();
    geo[r] = std::move(g);
  }

  std::vector<std::size_t> alive;
  for (std::size_t r = 0; r < set.routes.size(); ++r)
    if (geo[r].length > thresholds.min_length && geo[r].circuity < thresholds.max_circuity)
      alive.push_back(r);

  // Sub-route rule: a route whose stops all lie on a longer route goes.
  {
    std::vector<std::set<std::size_t>> stops(alive.size());
    for (std::size_t k = 0; k < alive.size(); ++k) stops[k] = stop_set(set.routes[alive[k]], hub);
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < alive.size(); ++k) {
      bool drop = false;
      for (std::size_t m = 0; m < alive.size() && !drop; ++m) {
        if (m == k) continue;
        if (geo[alive[k]].length < geo[alive[m]].length &&
            std::includes(stops[m].begin(), stops[m].end(), stops[k].begin(), stops[k].end()))
          drop = true;
      }
      if (!drop) keep.push_back(alive[k]);
    }
    alive = std::move(keep);
  }

  // Similarity prune against higher-weight survivors; S near zero means
  // the routes trace the same corridor.
  std::sort(alive.begin(), alive.end(), [&](std::size_t x, std::size_t y) {
    if (set.routes[x].weight != set.routes[y].weight)
      return set.routes[x].weight > set.routes[y].weight;
    return set.routes[x].nodes < set.routes[y].nodes;
  });
  const auto similarity = [&](std::size_t x, std::size_t y) {
    double sum = 0.0;
    for (const auto& p : geo[x].midpoints) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : geo[y].midpoints) best = std::min(best, euclid(p, q));
      sum += best;
    }
    for (const auto& q : geo[y].midpoints) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : geo[x].midpoints) best = std::min(best, euclid(p, q));
      sum += best;
    }
    return sum / (geo[x].length + geo[y].length);
  };
  std::vector<std::size_t> survivors;
  for (std::size_t r : alive) {
    bool drop = false;
    for (std::size_t s : survivors) {
      const double sim = similarity(r, s);
      if (thresholds.invert_similarity ? sim > thresholds.similarity : sim < thresholds.similarity) {
        drop = true;
        break;
      }
    }
    if (!drop) survivors.push_back(r);
  }

  WeightedRouteSet out;
  out.stop_weight = set.stop_weight;
  out.assignment.assign(network.stop_count(), {});
  for (std::size_t r : survivors) out.routes.push_back(set.routes[r]);
  return out;
}

std::vector<double> cumulative_coverage(const WeightedRouteSet& set, const StopNetwork& network,
                                        Direction dir) {
  std::vector<std::size_t> order(set.routes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (set.routes[x].weight != set.routes[y].weight)
      return set.routes[x].weight > set.routes[y].weight;
    return set.routes[x].nodes < set.routes[y].nodes;
  });
  std::vector<char> covered(network.stop_count(), 0);
  double total = 0.0;
  std::vector<double> out;
  for (std::size_t r : order) {
    for (std::size_t node : set.routes[r].nodes) {
      if (node == network.hub_index() || covered[node]) continue;
      covered[node] = 1;
      total += network.demand(node, dir);
    }
    out.push_back(total);
  }
  return out;
}

}  // namespace hubmod::spbench
