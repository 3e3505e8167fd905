#include "gridres/topology.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace gridres {

namespace {

// Local adjacency over the restored graph with dense node indices.
struct LocalGraph {
  std::vector<BusId> node_ids;               // sorted
  std::map<BusId, int> index_of;
  std::vector<std::vector<std::pair<int, int>>> adj;  // (edge idx, neighbour)

  explicit LocalGraph(const RestoredGraph& g) {
    node_ids = g.nodes;
    std::sort(node_ids.begin(), node_ids.end());
    node_ids.erase(std::unique(node_ids.begin(), node_ids.end()), node_ids.end());
    for (std::size_t i = 0; i < node_ids.size(); ++i) index_of[node_ids[i]] = static_cast<int>(i);
    adj.resize(node_ids.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      auto ia = index_of.find(g.edges[e].a);
      auto ib = index_of.find(g.edges[e].b);
      if (ia == index_of.end() || ib == index_of.end()) {
        throw std::invalid_argument("restored graph edge on line " +
                                    std::to_string(g.edges[e].line) +
                                    " references a bus outside the node set");
      }
      adj[ia->second].emplace_back(static_cast<int>(e), ib->second);
      adj[ib->second].emplace_back(static_cast<int>(e), ia->second);
    }
  }

  std::vector<int> component_ids() const {
    std::vector<int> comp(node_ids.size(), -1);
    int next = 0;
    for (std::size_t s = 0; s < node_ids.size(); ++s) {
      if (comp[s] >= 0) continue;
      comp[s] = next;
      std::deque<int> queue{static_cast<int>(s)};
      while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (auto [e, v] : adj[u]) {
          (void)e;
          if (comp[v] < 0) {
            comp[v] = next;
            queue.push_back(v);
          }
        }
      }
      ++next;
    }
    return comp;
  }
};

// Unit-capacity max-flow (successive BFS augmentation). Each undirected
// edge becomes an antiparallel arc pair with capacity 1 each.
class UnitFlow {
 public:
  UnitFlow(const LocalGraph& g, const RestoredGraph& rg) : n_(static_cast<int>(g.node_ids.size())) {
    head_.assign(n_, -1);
    for (const auto& e : rg.edges) {
      int a = g.index_of.at(e.a);
      int b = g.index_of.at(e.b);
      add_arc(a, b);
      add_arc(b, a);
    }
  }

  int max_flow(int s, int t) {
    std::fill(cap_.begin(), cap_.end(), 1);
    int flow = 0;
    while (augment(s, t)) ++flow;
    return flow;
  }

 private:
  void add_arc(int from, int to) {
    to_.push_back(to);
    next_.push_back(head_[from]);
    head_[from] = static_cast<int>(to_.size()) - 1;
    cap_.push_back(1);
  }

  bool augment(int s, int t) {
    parent_arc_.assign(n_, -1);
    std::deque<int> queue{s};
    std::vector<char> seen(n_, 0);
    seen[s] = 1;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      if (u == t) break;
      for (int a = head_[u]; a >= 0; a = next_[a]) {
        int v = to_[a];
        if (cap_[a] > 0 && !seen[v]) {
          seen[v] = 1;
          parent_arc_[v] = a;
          queue.push_back(v);
        }
      }
    }
    if (!seen[t]) return false;
    for (int v = t; v != s;) {
      int a = parent_arc_[v];
      cap_[a] -= 1;
      cap_[a ^ 1] += 1;
      // arcs were added in pairs, so a^1 is the reverse arc
      v = arc_tail(a);
    }
    return true;
  }

  int arc_tail(int a) const { return to_[a ^ 1]; }

  int n_;
  std::vector<int> head_, next_, to_, parent_arc_;
  std::vector<int> cap_;
};

}  // namespace

bool RestoredGraph::has_node(BusId id) const {
  return std::find(nodes.begin(), nodes.end(), id) != nodes.end();
}

std::vector<std::vector<BusId>> islands(const RestoredGraph& g) {
  if (g.nodes.empty()) return {};
  LocalGraph lg(g);
  const auto comp = lg.component_ids();
  int count = *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<std::vector<BusId>> parts(count);
  for (std::size_t i = 0; i < comp.size(); ++i) parts[comp[i]].push_back(lg.node_ids[i]);
  for (auto& p : parts) std::sort(p.begin(), p.end());
  std::sort(parts.begin(), parts.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return parts;
}

int edge_connectivity(const RestoredGraph& g, BusId i, BusId j) {
  if (i == j) throw std::invalid_argument("edge_connectivity: identical nodes");
  LocalGraph lg(g);
  auto it_i = lg.index_of.find(i);
  auto it_j = lg.index_of.find(j);
  if (it_i == lg.index_of.end() || it_j == lg.index_of.end()) {
    throw std::invalid_argument("edge_connectivity: node not in graph");
  }
  UnitFlow flow(lg, g);
  return flow.max_flow(it_i->second, it_j->second);
}

double connectedness_index(const RestoredGraph& g, const GridCase& grid,
                           const std::vector<GenId>& online_gens,
                           const std::vector<BusId>& restored_load_buses) {
  // Denominator: pairs connected in the initial full grid.
  RestoredGraph full;
  full.nodes.reserve(grid.buses.size());
  for (const auto& b : grid.buses) full.nodes.push_back(b.id);
  full.edges.reserve(grid.lines.size());
  for (const auto& l : grid.lines) full.edges.push_back({l.id, l.from_bus, l.to_bus});
  LocalGraph full_graph(full);
  const auto full_comp = full_graph.component_ids();

  long long denom = 0;
  for (const auto& gen : grid.generators) {
    const int gi = full_graph.index_of.count(gen.bus) ? full_graph.index_of.at(gen.bus) : -1;
    for (const auto& load : grid.loads) {
      const int li = full_graph.index_of.count(load.bus) ? full_graph.index_of.at(load.bus) : -1;
      if (gi >= 0 && li >= 0 && full_comp[gi] == full_comp[li]) ++denom;
    }
  }
  if (denom == 0) return 0.0;

  LocalGraph lg(g);
  const auto comp = lg.component_ids();
  long long num = 0;
  for (GenId gid : online_gens) {
    const int gen_idx = grid.gen_index(gid);
    if (gen_idx < 0) continue;
    const BusId gbus = grid.generators[gen_idx].bus;
    auto it_g = lg.index_of.find(gbus);
    if (it_g == lg.index_of.end()) continue;
    for (BusId lbus : restored_load_buses) {
      auto it_l = lg.index_of.find(lbus);
      if (it_l == lg.index_of.end()) continue;
      if (comp[it_g->second] == comp[it_l->second]) ++num;
    }
  }
  return static_cast<double>(num) / static_cast<double>(denom);
}

double redundancy_index(const RestoredGraph& g, int initial_bus_count) {
  if (initial_bus_count < 2) throw std::invalid_argument("redundancy_index: need >= 2 buses");
  if (g.nodes.size() < 2) return 0.0;

  LocalGraph lg(g);
  const auto comp = lg.component_ids();
  UnitFlow flow(lg, g);

  long long sum = 0;  // unordered pairs; connectivity is symmetric
  const int n = static_cast<int>(lg.node_ids.size());
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (comp[a] != comp[b]) continue;
      sum += flow.max_flow(a, b);
    }
  }
  const double pairs = static_cast<double>(initial_bus_count) *
                       static_cast<double>(initial_bus_count - 1);
  return 2.0 * static_cast<double>(sum) / pairs;
}

ReconnectionPlan reconnection_plan(const GridCase& grid, const std::vector<LineId>& failed_lines,
                                   const RestoredGraph& g) {
  ReconnectionPlan plan;
  const auto parts = islands(g);
  if (parts.size() <= 1) return plan;

  const int bsu = grid.black_start_gen();
  if (bsu < 0) {
    plan.reconnectable = false;
    return plan;
  }
  const BusId root_bus = grid.generators[bsu].bus;

  std::set<LineId> failed(failed_lines.begin(), failed_lines.end());
  std::set<LineId> energized;
  for (const auto& e : g.edges) energized.insert(e.line);
  std::set<BusId> restored_nodes(g.nodes.begin(), g.nodes.end());

  if (!restored_nodes.count(root_bus)) {
    plan.reconnectable = false;
    return plan;
  }

  // Root component plus the islands still to be attached.
  std::set<BusId> root_set;
  std::vector<std::vector<BusId>> pending;
  for (const auto& part : parts) {
    if (std::find(part.begin(), part.end(), root_bus) != part.end()) {
      root_set.insert(part.begin(), part.end());
    } else {
      pending.push_back(part);
    }
  }

  const int nbus = static_cast<int>(grid.buses.size());
  const int inf = std::numeric_limits<int>::max();

  while (!pending.empty()) {
    // 0/1 BFS over the whole grid graph: energized or already-planned
    // lines cost 0, de-energized intact lines cost 1, failed blocked.
    std::vector<int> dist(nbus, inf);
    std::vector<int> parent_line(nbus, -1);
    std::vector<int> parent_bus(nbus, -1);
    std::deque<int> queue;
    for (BusId b : root_set) {
      const int bi = grid.bus_index(b);
      if (bi >= 0 && dist[bi] != 0) {
        dist[bi] = 0;
        queue.push_back(bi);
      }
    }
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (auto [line_idx, v] : grid.lines_at(u)) {
        const Line& line = grid.lines[line_idx];
        if (failed.count(line.id)) continue;
        const int w = energized.count(line.id) ? 0 : 1;
        if (dist[u] != inf && dist[u] + w < dist[v]) {
          dist[v] = dist[u] + w;
          parent_line[v] = line_idx;
          parent_bus[v] = u;
          if (w == 0) {
            queue.push_front(v);
          } else {
            queue.push_back(v);
          }
        }
      }
    }

    // Cheapest pending island; ties by lowest entry bus id.
    int best_island = -1;
    int best_cost = inf;
    int best_bus_idx = -1;
    for (std::size_t k = 0; k < pending.size(); ++k) {
      for (BusId b : pending[k]) {
        const int bi = grid.bus_index(b);
        if (bi < 0 || dist[bi] == inf) continue;
        if (dist[bi] < best_cost ||
            (dist[bi] == best_cost && (best_bus_idx < 0 || b < grid.buses[best_bus_idx].id))) {
          best_cost = dist[bi];
          best_island = static_cast<int>(k);
          best_bus_idx = bi;
        }
      }
    }
    if (best_island < 0) {
      return {{}, false, 0.0};
    }

    // Walk the path back to the zero-cost region, collecting the new lines.
    // Islands the path merely passes through get merged for free on a later
    // iteration (their distance drops to 0 once these lines are energized).
    for (int v = best_bus_idx; dist[v] != 0 && parent_line[v] >= 0; v = parent_bus[v]) {
      const Line& line = grid.lines[parent_line[v]];
      if (!energized.count(line.id)) {
        plan.lines.push_back(line.id);
        energized.insert(line.id);
      }
    }
    root_set.insert(pending[best_island].begin(), pending[best_island].end());
    pending.erase(pending.begin() + best_island);
  }

  plan.delay_minutes = 0.0;
  for (LineId id : plan.lines) {
    const int idx = grid.line_index(id);
    plan.delay_minutes += idx >= 0 ? grid.lines[idx].restore_minutes : 0.0;
  }
  std::sort(plan.lines.begin(), plan.lines.end());
  return plan;
}

}  // namespace gridres
