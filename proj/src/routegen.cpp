#include "hubmod/routegen.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hubmod::routegen {

namespace {

// Lexicographic order of stop-id strings, precomputed as ranks.
std::vector<std::size_t> id_ranks(const StopNetwork& net) {
  std::vector<std::size_t> order(net.stop_count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return net.stops[a].id < net.stops[b].id; });
  std::vector<std::size_t> rank(net.stop_count());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
  return rank;
}

struct Tail {
  double coverage = 0.0;
  Seconds time = 0;
  std::vector<std::size_t> seq;
  std::vector<std::size_t> transfers;
};

struct SearchContext {
  const StopNetwork& net;
  Direction dir;
  const std::vector<double>& demand;
  std::vector<std::size_t> rank;
  SearchStats* stats = nullptr;
  // Oriented one-transfer costs, [node * stop_count + stop]; -1 when no
  // station pair connects them. Empty without an overlay.
  std::vector<Seconds> transfer_cost;
  Seconds sigma = 0;

  bool lex_less(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                        [&](std::size_t x, std::size_t y) { return rank[x] < rank[y]; });
  }
  // Higher coverage, then shorter trip, then lexicographically smaller.
  bool better(const Tail& a, const Tail& b) const {
    if (a.coverage != b.coverage) return a.coverage > b.coverage;
    if (a.time != b.time) return a.time < b.time;
    return lex_less(a.seq, b.seq);
  }
  void sort_by_id(std::vector<std::size_t>& v) const {
    std::sort(v.begin(), v.end(), [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
  }
};

std::vector<std::size_t> reach_impl(const StopNetwork& net, Direction dir, std::size_t from,
                                    const std::vector<std::size_t>& candidates, Seconds elapsed) {
  std::vector<std::size_t> out;
  out.reserve(candidates.size());
  for (std::size_t j : candidates) {
    const Seconds t = elapsed + net.travel_dir(from, j, dir);
    if (net.within_deviation(t, net.alt_time(j, dir))) out.push_back(j);
  }
  return out;
}

double demand_sum(const std::vector<double>& demand, const std::vector<std::size_t>& stops) {
  double s = 0.0;
  for (std::size_t j : stops) s += demand[j];
  return s;
}

void note_subset(SearchStats* stats, bool ok) {
  if (!stats) return;
  ++stats->subset_checks;
  if (!ok) ++stats->subset_violations;
}

void note_bound(SearchStats* stats, double value, double bound) {
  if (!stats) return;
  ++stats->bound_checks;
  if (value > bound + 1e-9) ++stats->bound_violations;
}

// Candidate sets handed to recursive calls are built from the parent's
// reachable set, so the subset property is verified directly against it.
bool is_subset(const std::vector<std::size_t>& small, const std::vector<std::size_t>& big) {
  for (std::size_t x : small)
    if (std::find(big.begin(), big.end(), x) == std::end(big)) return false;
  return true;
}

// ---- exact search, vehicle-only --------------------------------------

// Best continuation below `cur`; continuations strictly below prune_below
// in coverage cannot affect the caller and may be cut.
Tail expand_exact(const SearchContext& ctx, std::size_t cur,
                  const std::vector<std::size_t>& candidates, Seconds elapsed,
                  double prune_below) {
  if (ctx.stats) ++ctx.stats->expansions;
  std::vector<std::size_t> feasible = reach_impl(ctx.net, ctx.dir, cur, candidates, elapsed);
  note_subset(ctx.stats, is_subset(feasible, candidates));

  Tail best;  // stopping here is always available
  const double reachable_demand = demand_sum(ctx.demand, feasible);
  if (feasible.empty() || reachable_demand == 0.0 || reachable_demand < prune_below) {
    note_bound(ctx.stats, best.coverage, reachable_demand);
    return best;
  }

  for (std::size_t j : feasible) {
    std::vector<std::size_t> rest;
    rest.reserve(feasible.size() - 1);
    for (std::size_t x : feasible)
      if (x != j) rest.push_back(x);
    const Seconds leg = ctx.net.travel_dir(cur, j, ctx.dir);
    const double need = std::max(prune_below, best.coverage) - ctx.demand[j];
    Tail sub = expand_exact(ctx, j, rest, elapsed + leg, need);
    Tail cand;
    cand.coverage = ctx.demand[j] + sub.coverage;
    cand.time = leg + sub.time;
    cand.seq.reserve(sub.seq.size() + 1);
    cand.seq.push_back(j);
    cand.seq.insert(cand.seq.end(), sub.seq.begin(), sub.seq.end());
    if (ctx.better(cand, best)) best = std::move(cand);
  }
  note_bound(ctx.stats, best.coverage, reachable_demand);
  return best;
}

// ---- exact search with transit connections ---------------------------

struct ReachSplit {
  std::vector<std::size_t> h, c;
};

ReachSplit connect_split(const SearchContext& ctx, std::size_t from,
                         const std::vector<std::size_t>& candidates, Seconds elapsed) {
  ReachSplit out;
  const std::size_t n = ctx.net.stop_count();
  for (std::size_t j : candidates) {
    const Seconds alt = ctx.net.alt_time(j, ctx.dir);
    const Seconds tc = ctx.transfer_cost[from * n + j];
    if (tc >= 0 && ctx.net.within_deviation(elapsed + tc + ctx.sigma, alt)) {
      out.c.push_back(j);
    } else if (ctx.net.within_deviation(elapsed + ctx.net.travel_dir(from, j, ctx.dir), alt)) {
      out.h.push_back(j);
    }
  }
  return out;
}

// Best tail starting at (and including) cur: its demand, the stops it can
// absorb through a transfer on arrival, and the best onward extension.
Tail visit_connect(const SearchContext& ctx, std::size_t cur,
                   const std::vector<std::size_t>& candidates, Seconds elapsed,
                   double prune_below) {
  if (ctx.stats) ++ctx.stats->expansions;
  ReachSplit split = connect_split(ctx, cur, candidates, elapsed);
  note_subset(ctx.stats, is_subset(split.h, candidates) && is_subset(split.c, candidates));

  const bool at_hub = cur == ctx.net.hub_index();
  const double own = (at_hub ? 0.0 : ctx.demand[cur]) + demand_sum(ctx.demand, split.c);
  const double onward_demand = demand_sum(ctx.demand, split.h);

  Tail best;
  if (!split.h.empty() && onward_demand > 0.0 && own + onward_demand >= prune_below) {
    for (std::size_t j : split.h) {
      std::vector<std::size_t> rest;
      rest.reserve(split.h.size() - 1);
      for (std::size_t x : split.h)
        if (x != j) rest.push_back(x);
      const Seconds leg = ctx.net.travel_dir(cur, j, ctx.dir);
      const double need = std::max(prune_below - own, best.coverage);
      Tail sub = visit_connect(ctx, j, rest, elapsed + leg, need);
      sub.time += leg;
      if (ctx.better(sub, best)) best = std::move(sub);
    }
  }

  Tail out;
  out.coverage = own + best.coverage;
  out.time = best.time;
  if (!at_hub) out.seq.push_back(cur);
  out.seq.insert(out.seq.end(), best.seq.begin(), best.seq.end());
  out.transfers = std::move(best.transfers);
  out.transfers.insert(out.transfers.end(), split.c.begin(), split.c.end());
  note_bound(ctx.stats, out.coverage, own + onward_demand);
  return out;
}

// ---- greedy heuristics ------------------------------------------------

Tail heuristic_vehicle_only(const SearchContext& ctx, const std::vector<std::size_t>& candidates) {
  Tail tail;
  std::size_t cur = ctx.net.hub_index();
  Seconds elapsed = 0;
  std::vector<std::size_t> pool = candidates;
  for (;;) {
    std::vector<std::size_t> feasible = reach_impl(ctx.net, ctx.dir, cur, pool, elapsed);
    if (feasible.empty()) break;

    // Greedy score: own demand plus demand of the induced reachable set.
    int best = -1;
    double best_score = 0.0;
    Seconds best_leg = 0;
    for (std::size_t idx = 0; idx < feasible.size(); ++idx) {
      const std::size_t j = feasible[idx];
      const Seconds leg = ctx.net.travel_dir(cur, j, ctx.dir);
      std::vector<std::size_t> rest;
      rest.reserve(feasible.size() - 1);
      for (std::size_t x : feasible)
        if (x != j) rest.push_back(x);
      const std::vector<std::size_t> induced = reach_impl(ctx.net, ctx.dir, j, rest, elapsed + leg);
      const double score = ctx.demand[j] + demand_sum(ctx.demand, induced);
      const bool wins = best < 0 || score > best_score ||
                        (score == best_score &&
                         (leg < best_leg ||
                          (leg == best_leg && ctx.rank[j] < ctx.rank[feasible[best]])));
      if (wins) {
        best = static_cast<int>(idx);
        best_score = score;
        best_leg = leg;
      }
    }
    if (best_score == 0.0) break;

    const std::size_t chosen = feasible[best];
    tail.seq.push_back(chosen);
    tail.coverage += ctx.demand[chosen];
    elapsed += best_leg;
    tail.time = elapsed;
    pool.clear();
    for (std::size_t x : feasible)
      if (x != chosen) pool.push_back(x);
    cur = chosen;
  }
  return tail;
}

Tail heuristic_connect(const SearchContext& ctx, const std::vector<std::size_t>& candidates) {
  Tail tail;
  std::size_t cur = ctx.net.hub_index();
  Seconds elapsed = 0;
  ReachSplit split = connect_split(ctx, cur, candidates, elapsed);
  std::vector<std::size_t> absorbed = split.c;  // at the hub itself

  for (;;) {
    if (split.h.empty()) break;
    int best = -1;
    double best_score = 0.0;
    Seconds best_leg = 0;
    ReachSplit best_split;
    for (std::size_t idx = 0; idx < split.h.size(); ++idx) {
      const std::size_t j = split.h[idx];
      const Seconds leg = ctx.net.travel_dir(cur, j, ctx.dir);
      std::vector<std::size_t> rest;
      rest.reserve(split.h.size() - 1);
      for (std::size_t x : split.h)
        if (x != j) rest.push_back(x);
      ReachSplit induced = connect_split(ctx, j, rest, elapsed + leg);
      const double score = ctx.demand[j] + demand_sum(ctx.demand, induced.h) +
                           demand_sum(ctx.demand, induced.c);
      const bool wins = best < 0 || score > best_score ||
                        (score == best_score &&
                         (leg < best_leg ||
                          (leg == best_leg && ctx.rank[j] < ctx.rank[split.h[best]])));
      if (wins) {
        best = static_cast<int>(idx);
        best_score = score;
        best_leg = leg;
        best_split = std::move(induced);
      }
    }
    if (best_score == 0.0) break;

    const std::size_t chosen = split.h[best];
    tail.seq.push_back(chosen);
    tail.coverage += ctx.demand[chosen];
    elapsed += best_leg;
    tail.time = elapsed;
    absorbed.insert(absorbed.end(), best_split.c.begin(), best_split.c.end());
    split = std::move(best_split);
    cur = chosen;
  }

  if (!tail.seq.empty()) {
    tail.transfers = std::move(absorbed);
    for (std::size_t t : tail.transfers) tail.coverage += ctx.demand[t];
  }
  return tail;
}

std::vector<Seconds> oriented_transfer_costs(const StopNetwork& net, const TransitOverlay& overlay,
                                             Direction dir) {
  const std::size_t n = net.stop_count();
  std::vector<Seconds> cost((n + 1) * n, -1);
  for (std::size_t v = 0; v <= n; ++v)
    for (std::size_t j = 0; j < n; ++j)
      cost[v * n + j] = dir == Direction::FromHub ? min_transfer_cost(overlay, v, j)
                                                  : min_transfer_cost(overlay, j, v);
  return cost;
}

Route assemble_route(const StopNetwork& net, Direction dir, const std::vector<double>& demand,
                     std::vector<std::size_t> seq, std::vector<std::size_t> transfers) {
  Route r;
  r.direction = dir;
  r.stops = std::move(seq);
  r.cum_time.reserve(r.stops.size());
  Seconds elapsed = 0;
  std::size_t prev = net.hub_index();
  for (std::size_t s : r.stops) {
    elapsed += net.travel_dir(prev, s, dir);
    r.cum_time.push_back(elapsed);
    prev = s;
  }
  r.trip_time = elapsed;
  std::sort(transfers.begin(), transfers.end());
  r.transfer_covered = std::move(transfers);
  r.coverage = demand_sum(demand, r.stops) + demand_sum(demand, r.transfer_covered);
  return r;
}

}  // namespace

std::vector<std::size_t> reach(const StopNetwork& network, Direction dir, std::size_t from,
                               const std::vector<std::size_t>& candidates, Seconds elapsed) {
  return reach_impl(network, dir, from, candidates, elapsed);
}

ReachSets connect_reach(const StopNetwork& network, const TransitOverlay& overlay, Direction dir,
                        std::size_t from, const std::vector<std::size_t>& candidates,
                        Seconds elapsed) {
  ReachSets out;
  for (std::size_t j : candidates) {
    const Seconds alt = network.alt_time(j, dir);
    const Seconds tc = dir == Direction::FromHub ? min_transfer_cost(overlay, from, j)
                                                 : min_transfer_cost(overlay, j, from);
    if (tc >= 0 && network.within_deviation(elapsed + tc + overlay.sigma, alt))
      out.c_reach.push_back(j);
    else if (network.within_deviation(elapsed + network.travel_dir(from, j, dir), alt))
      out.h_reach.push_back(j);
  }
  return out;
}

std::optional<Route> max_coverage_route(const StopNetwork& network, Direction dir,
                                        const std::vector<double>& remaining_demand,
                                        const std::vector<std::size_t>& candidates,
                                        const GenOptions& options) {
  if (remaining_demand.size() != network.stop_count())
    throw std::invalid_argument("remaining_demand size mismatch");

  SearchContext ctx{network, dir, remaining_demand, id_ranks(network), options.stats};
  if (options.overlay) {
    ctx.transfer_cost = oriented_transfer_costs(network, *options.overlay, dir);
    ctx.sigma = options.overlay->sigma;
  }
  std::vector<std::size_t> cands = candidates;
  ctx.sort_by_id(cands);

  Tail tail;
  if (options.overlay) {
    tail = options.mode == Mode::Exact
               ? visit_connect(ctx, network.hub_index(), cands, 0, 0.0)
               : heuristic_connect(ctx, cands);
  } else {
    tail = options.mode == Mode::Exact
               ? expand_exact(ctx, network.hub_index(), cands, 0, 0.0)
               : heuristic_vehicle_only(ctx, cands);
  }
  if (tail.seq.empty()) return std::nullopt;
  return assemble_route(network, dir, remaining_demand, std::move(tail.seq),
                        std::move(tail.transfers));
}

std::vector<Route> generate_k_mcr(const StopNetwork& network, Direction dir, int k,
                                  const GenOptions& options) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");

  const std::size_t n = network.stop_count();
  std::vector<double> remaining(n);
  for (std::size_t i = 0; i < n; ++i) remaining[i] = network.demand(i, dir);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});

  std::vector<Route> routes;
  for (int t = 0; t < k; ++t) {
    if (demand_sum(remaining, pool) == 0.0) break;
    std::optional<Route> r = max_coverage_route(network, dir, remaining, pool, options);
    if (!r) break;
    check_route(network, *r, options.overlay);

    std::vector<char> covered(n, 0);
    for (std::size_t s : r->stops) covered[s] = 1;
    for (std::size_t s : r->transfer_covered) covered[s] = 1;
    for (std::size_t i = 0; i < n; ++i)
      if (covered[i]) remaining[i] = 0.0;
    std::vector<std::size_t> next;
    next.reserve(pool.size());
    for (std::size_t i : pool)
      if (!covered[i]) next.push_back(i);
    pool = std::move(next);
    routes.push_back(std::move(*r));
  }
  return routes;
}

}  // namespace hubmod::routegen
