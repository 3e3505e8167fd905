#include "gridres/attack.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <stdexcept>

#include "gridres/linalg.hpp"

namespace gridres {

namespace {

constexpr double kTripTol = 1e-6;   // MW beyond the limit before a line trips
constexpr double kShedTol = 1e-9;

double frozen_cap(const GridCase& grid, const SystemState& s, std::size_t gen_idx) {
  Generator tmp = grid.generators[gen_idx];
  tmp.start_time_min = s.gen_start_min[gen_idx];
  return gen_output_at(tmp, s.time_min);
}

}  // namespace

std::vector<LineId> select_targets(const SystemState& s, double fraction, const GridCase& grid) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw std::invalid_argument("select_targets: fraction must be in (0, 1]");
  }
  std::vector<std::pair<double, LineId>> ranked;
  for (std::size_t i = 0; i < grid.lines.size(); ++i) {
    if (s.line_energized[i]) ranked.emplace_back(std::abs(s.line_flow_mw[i]), grid.lines[i].id);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  const auto count = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(ranked.size()) - 1e-9));
  std::vector<LineId> out;
  out.reserve(count);
  for (std::size_t i = 0; i < ranked.size() && i < count; ++i) out.push_back(ranked[i].second);
  return out;
}

std::vector<AttackIncident> enumerate_incidents(const std::vector<LineId>& targets, int k_max,
                                                double mu) {
  if (k_max < 1) throw std::invalid_argument("enumerate_incidents: k_max must be >= 1");
  if (!(mu > 0.0) || !(mu < 1.0)) {
    throw std::invalid_argument("enumerate_incidents: mu must be in (0, 1)");
  }
  std::vector<AttackIncident> out;
  const int n = static_cast<int>(targets.size());
  int next_id = 1;

  std::vector<int> pick;
  auto emit = [&]() {
    AttackIncident inc;
    inc.id = next_id++;
    inc.k = static_cast<int>(pick.size());
    inc.probability = 1.0;
    for (int i = 0; i < inc.k; ++i) inc.probability *= mu;
    for (int idx : pick) inc.failed_lines.push_back(targets[idx]);
    std::sort(inc.failed_lines.begin(), inc.failed_lines.end());
    out.push_back(std::move(inc));
  };
  // Subsets in size order, lexicographic within a size.
  for (int k = 1; k <= k_max && k <= n; ++k) {
    pick.assign(k, 0);
    for (int i = 0; i < k; ++i) pick[i] = i;
    for (;;) {
      emit();
      int i = k - 1;
      while (i >= 0 && pick[i] == n - k + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return out;
}

namespace {

// Mutable working copy of a snapshot while a cascade unwinds.
struct CascadeWork {
  const GridCase* grid = nullptr;
  double time = 0.0;
  std::vector<uint8_t> bus_on, line_on;
  std::vector<GenState> gen_state;
  std::vector<double> gen_start;
  std::vector<double> gen_cap;       // frozen at attack time, online units
  std::vector<double> load_mw;       // working loads during propagation
  std::vector<char> gen_lost;

  std::vector<int> comp_of_bus;      // scratch, by bus index
  std::vector<std::vector<int>> comp_buses;
  std::vector<std::vector<int>> comp_lines;

  void components() {
    const auto& g = *grid;
    comp_of_bus.assign(g.buses.size(), -1);
    comp_buses.clear();
    comp_lines.clear();
    for (std::size_t seed = 0; seed < g.buses.size(); ++seed) {
      if (!bus_on[seed] || comp_of_bus[seed] >= 0) continue;
      const int c = static_cast<int>(comp_buses.size());
      comp_buses.emplace_back();
      comp_lines.emplace_back();
      std::deque<int> queue{static_cast<int>(seed)};
      comp_of_bus[seed] = c;
      while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        comp_buses[c].push_back(u);
        for (auto [line_idx, v] : g.lines_at(u)) {
          if (!line_on[line_idx] || !bus_on[v]) continue;
          if (comp_of_bus[v] < 0) {
            comp_of_bus[v] = c;
            queue.push_back(v);
          }
        }
      }
      std::sort(comp_buses[c].begin(), comp_buses[c].end());
    }
    for (std::size_t li = 0; li < g.lines.size(); ++li) {
      if (!line_on[li]) continue;
      const int a = g.bus_index(g.lines[li].from_bus);
      comp_lines[comp_of_bus[a]].push_back(static_cast<int>(li));
    }
  }
};

struct PropagationResult {
  std::vector<int> tripped;  // line indices in trip order
  int rounds = 0;
};

// Alternates pro-rata island rebalancing with simultaneous overload
// tripping until no line exceeds its limit. Islands without a supplying
// unit de-energize; their loads shed and their starting units are lost.
PropagationResult propagate(CascadeWork& w) {
  const GridCase& g = *w.grid;
  PropagationResult res;

  std::vector<double> theta;  // scratch via DenseLu
  for (;;) {
    w.components();

    // Classify islands, shed dead ones.
    std::vector<char> alive(w.comp_buses.size(), 0);
    for (std::size_t c = 0; c < w.comp_buses.size(); ++c) {
      bool has_online = false;
      for (int b : w.comp_buses[c]) {
        for (int gi : g.gens_at(b)) {
          if (!w.gen_lost[gi] && w.gen_state[gi] == GenState::Online) has_online = true;
        }
      }
      alive[c] = has_online ? 1 : 0;
      if (!has_online) {
        for (int b : w.comp_buses[c]) {
          const int li = g.load_at(b);
          if (li >= 0) w.load_mw[li] = 0.0;
          for (int gi : g.gens_at(b)) {
            if (!w.gen_lost[gi] && w.gen_state[gi] != GenState::Offline) {
              if (w.gen_state[gi] == GenState::Starting) w.gen_lost[gi] = 1;
              // online units cannot exist here by construction
            }
          }
          w.bus_on[b] = 0;
        }
        for (int li : w.comp_lines[c]) w.line_on[li] = 0;
      }
    }

    // Rebalance and compute flows per surviving island.
    std::vector<int> overloaded;
    for (std::size_t c = 0; c < w.comp_buses.size(); ++c) {
      if (!alive[c]) continue;

      double supply = 0.0;
      std::vector<int> online, starting;
      for (int b : w.comp_buses[c]) {
        for (int gi : g.gens_at(b)) {
          if (w.gen_lost[gi]) continue;
          if (w.gen_state[gi] == GenState::Online) {
            online.push_back(gi);
            supply += w.gen_cap[gi];
          } else if (w.gen_state[gi] == GenState::Starting) {
            starting.push_back(gi);
          }
        }
      }
      std::sort(starting.begin(), starting.end(), [&g](int a, int b) {
        return g.generators[a].id < g.generators[b].id;
      });
      double crank = 0.0;
      for (int gi : starting) crank += g.generators[gi].cranking_mw;
      for (int gi : starting) {
        if (crank <= supply) break;
        crank -= g.generators[gi].cranking_mw;
        w.gen_lost[gi] = 1;
      }

      double demand = 0.0;
      for (int b : w.comp_buses[c]) {
        const int li = g.load_at(b);
        if (li >= 0) demand += w.load_mw[li];
      }
      const double avail = std::max(0.0, supply - crank);
      const double retained = std::min(demand, avail);
      const double load_scale = demand > kShedTol ? retained / demand : 0.0;
      if (load_scale < 1.0) {
        for (int b : w.comp_buses[c]) {
          const int li = g.load_at(b);
          if (li >= 0) w.load_mw[li] *= load_scale;
        }
      }

      if (w.comp_buses[c].size() <= 1 || w.comp_lines[c].empty()) continue;

      // DC flows from the rebalanced injections.
      const int n = static_cast<int>(w.comp_buses[c].size());
      std::vector<int> local_of(g.buses.size(), -1);
      for (int i = 0; i < n; ++i) local_of[w.comp_buses[c][i]] = i;

      std::vector<double> inj(n, 0.0);
      const double total_out = retained + crank;
      const double gen_scale = supply > kShedTol ? total_out / supply : 0.0;
      for (int gi : online) {
        inj[local_of[g.bus_index(g.generators[gi].bus)]] += w.gen_cap[gi] * gen_scale;
      }
      for (int gi : starting) {
        if (w.gen_lost[gi]) continue;
        inj[local_of[g.bus_index(g.generators[gi].bus)]] -= g.generators[gi].cranking_mw;
      }
      for (int b : w.comp_buses[c]) {
        const int li = g.load_at(b);
        if (li >= 0) inj[local_of[b]] -= w.load_mw[li];
      }

      const int r = n - 1;
      std::vector<double> mat(static_cast<std::size_t>(r) * r, 0.0);
      for (int li : w.comp_lines[c]) {
        const double y = 1.0 / g.lines[li].reactance;
        const int a = local_of[g.bus_index(g.lines[li].from_bus)];
        const int b = local_of[g.bus_index(g.lines[li].to_bus)];
        if (a > 0) mat[static_cast<std::size_t>(a - 1) * r + (a - 1)] += y;
        if (b > 0) mat[static_cast<std::size_t>(b - 1) * r + (b - 1)] += y;
        if (a > 0 && b > 0) {
          mat[static_cast<std::size_t>(a - 1) * r + (b - 1)] -= y;
          mat[static_cast<std::size_t>(b - 1) * r + (a - 1)] -= y;
        }
      }
      DenseLu lu;
      if (!lu.factor(mat.data(), r)) {
        throw std::runtime_error("cascade: singular island matrix");
      }
      std::vector<double> rhs(r);
      for (int i = 1; i < n; ++i) rhs[i - 1] = inj[i];
      theta.assign(r, 0.0);
      lu.solve(rhs.data(), theta.data());
      auto angle = [&theta](int local) { return local == 0 ? 0.0 : theta[local - 1]; };

      for (int li : w.comp_lines[c]) {
        const int a = local_of[g.bus_index(g.lines[li].from_bus)];
        const int b = local_of[g.bus_index(g.lines[li].to_bus)];
        const double f = (angle(a) - angle(b)) / g.lines[li].reactance;
        if (std::abs(f) > g.lines[li].flow_limit_mw + kTripTol) {
          overloaded.push_back(li);
        }
      }
    }

    if (overloaded.empty()) break;
    std::sort(overloaded.begin(), overloaded.end());
    overloaded.erase(std::unique(overloaded.begin(), overloaded.end()), overloaded.end());
    for (int li : overloaded) {
      w.line_on[li] = 0;
      res.tripped.push_back(li);
    }
    ++res.rounds;
  }
  return res;
}

}  // namespace

CascadeOutcome cascade(const SystemState& s, const AttackIncident& inc, const GridCase& grid) {
  CascadeOutcome out;
  out.final_state = s;

  // Attacks on shutdown equipment are ineffective.
  std::vector<int> hit_lines;
  for (LineId id : inc.failed_lines) {
    const int idx = grid.line_index(id);
    if (idx >= 0 && s.line_energized[idx]) hit_lines.push_back(idx);
  }
  std::vector<int> hit_gens;
  for (GenId id : inc.failed_generators) {
    const int idx = grid.gen_index(id);
    if (idx >= 0 && s.gen_state[idx] != GenState::Offline) hit_gens.push_back(idx);
  }
  if (hit_lines.empty() && hit_gens.empty()) return out;

  CascadeWork w;
  w.grid = &grid;
  w.time = s.time_min;
  w.bus_on = s.bus_energized;
  w.line_on = s.line_energized;
  w.gen_state = s.gen_state;
  w.gen_start = s.gen_start_min;
  w.gen_lost.assign(grid.generators.size(), 0);
  w.load_mw = s.restored_load_mw;
  w.gen_cap.assign(grid.generators.size(), 0.0);
  for (std::size_t i = 0; i < grid.generators.size(); ++i) {
    if (s.gen_state[i] == GenState::Online) w.gen_cap[i] = frozen_cap(grid, s, i);
  }

  for (int li : hit_lines) w.line_on[li] = 0;
  for (int gi : hit_gens) w.gen_lost[gi] = 1;

  const auto prop = propagate(w);
  out.rounds = prop.rounds;
  for (int li : prop.tripped) out.tripped_lines.push_back(grid.lines[li].id);

  // Final operating point per surviving island: minimum-curtailment
  // redispatch from the pre-attack values, line limits enforced.
  w.components();
  SystemState& fin = out.final_state;
  fin.bus_energized = w.bus_on;
  fin.line_energized = w.line_on;
  std::fill(fin.gen_output_mw.begin(), fin.gen_output_mw.end(), 0.0);
  std::fill(fin.restored_load_mw.begin(), fin.restored_load_mw.end(), 0.0);
  std::fill(fin.line_flow_mw.begin(), fin.line_flow_mw.end(), 0.0);

  for (std::size_t c = 0; c < w.comp_buses.size(); ++c) {
    DispatchProblem p;
    p.grid = &grid;
    p.tau = 1.0;
    for (int b : w.comp_buses[c]) {
      p.island.nodes.push_back(grid.buses[b].id);
      const int li = grid.load_at(b);
      if (li >= 0 && s.restored_load_mw[li] > 0.0) {
        p.load_caps.emplace_back(grid.buses[b].id, s.restored_load_mw[li]);
      }
    }
    for (int li : w.comp_lines[c]) {
      p.island.edges.push_back(
          {grid.lines[li].id, grid.lines[li].from_bus, grid.lines[li].to_bus});
    }
    std::vector<int> starting;
    for (int b : w.comp_buses[c]) {
      for (int gi : grid.gens_at(b)) {
        if (w.gen_lost[gi]) continue;
        if (w.gen_state[gi] == GenState::Online) {
          p.gen_caps.emplace_back(grid.generators[gi].id, w.gen_cap[gi]);
        } else if (w.gen_state[gi] == GenState::Starting) {
          starting.push_back(gi);
        }
      }
    }
    std::sort(starting.begin(), starting.end(), [&grid](int a, int b) {
      return grid.generators[a].id < grid.generators[b].id;
    });
    for (int gi : starting) {
      p.cranking.emplace_back(grid.generators[gi].id, grid.generators[gi].cranking_mw);
    }

    DispatchResult res = restoration_dispatch(p);
    std::size_t drop = 0;
    while (!res.feasible && drop < starting.size()) {
      // Cranking undeliverable under the line limits; give up on the
      // lowest-id starting unit and retry.
      w.gen_lost[starting[drop]] = 1;
      ++drop;
      p.cranking.erase(p.cranking.begin());
      res = restoration_dispatch(p);
    }

    for (const auto& [gid, mw] : res.gen_output) fin.gen_output_mw[grid.gen_index(gid)] = mw;
    for (const auto& [bus, mw] : res.restored_load) {
      const int li = grid.load_at(grid.bus_index(bus));
      if (li >= 0) fin.restored_load_mw[li] = mw;
    }
    for (const auto& [line, mw] : res.line_flows) fin.line_flow_mw[grid.line_index(line)] = mw;
  }

  for (std::size_t i = 0; i < grid.generators.size(); ++i) {
    if (w.gen_lost[i]) {
      fin.gen_state[i] = GenState::Offline;
      fin.gen_start_min[i] = std::numeric_limits<double>::quiet_NaN();
      out.lost_generators.push_back(grid.generators[i].id);
    }
  }
  std::sort(out.lost_generators.begin(), out.lost_generators.end());

  for (std::size_t li = 0; li < grid.loads.size(); ++li) {
    const double shed = s.restored_load_mw[li] - fin.restored_load_mw[li];
    if (shed > kShedTol) {
      out.shed_by_bus.emplace_back(grid.loads[li].bus, shed);
      out.shed_total_mw += shed;
    }
  }
  return out;
}

RobustnessIndices robustness_indices(const GridCase& grid, const SystemState& pre,
                                     const CascadeOutcome& out) {
  RobustnessIndices idx;

  for (GenId id : out.lost_generators) {
    idx.ramp_loss_mw_per_h += grid.generators[grid.gen_index(id)].ramp_mw_per_h;
  }

  const double pre_load = pre.total_restored_mw();
  if (pre_load > 0.0) {
    idx.load_curtailment_pct = 100.0 * out.shed_total_mw / pre_load;
  }

  auto online_gens = [&grid](const SystemState& s) {
    std::vector<GenId> ids;
    for (std::size_t i = 0; i < grid.generators.size(); ++i) {
      if (s.gen_state[i] == GenState::Online) ids.push_back(grid.generators[i].id);
    }
    return ids;
  };
  auto load_buses = [&grid](const SystemState& s) {
    std::vector<BusId> ids;
    for (std::size_t li = 0; li < grid.loads.size(); ++li) {
      if (s.restored_load_mw[li] > 0.0) ids.push_back(grid.loads[li].bus);
    }
    return ids;
  };

  const RestoredGraph pre_graph = restored_graph(grid, pre);
  const RestoredGraph post_graph = restored_graph(grid, out.final_state);
  const int nbus = static_cast<int>(grid.buses.size());

  const double pre_con = connectedness_index(pre_graph, grid, online_gens(pre), load_buses(pre));
  const double post_con =
      connectedness_index(post_graph, grid, online_gens(out.final_state), load_buses(out.final_state));
  if (pre_con > 0.0) idx.connectedness_drop_pct = 100.0 * (pre_con - post_con) / pre_con;

  const double pre_red = redundancy_index(pre_graph, nbus);
  const double post_red = redundancy_index(post_graph, nbus);
  if (pre_red > 0.0) idx.redundancy_drop_pct = 100.0 * (pre_red - post_red) / pre_red;

  // Reconnection delay of the surviving islands.
  const auto parts = islands(post_graph);
  if (parts.size() <= 1) {
    idx.restoration_delay_min = 0.0;
  } else {
    std::vector<LineId> unusable;
    for (std::size_t i = 0; i < grid.lines.size(); ++i) {
      if (pre.line_energized[i] && !out.final_state.line_energized[i]) {
        unusable.push_back(grid.lines[i].id);
      }
    }
    const auto plan = reconnection_plan(grid, unusable, post_graph);
    if (plan.reconnectable) {
      idx.restoration_delay_min = plan.delay_minutes;
    }
  }
  return idx;
}

struct IncidentEvaluator::Impl {
  const GridCase& grid;
  const SystemState* state = nullptr;

  // Per-component power transfer factors of the prepared snapshot.
  struct Comp {
    std::vector<int> bus_idx;
    std::vector<int> line_idx;
    std::vector<double> ptdf;  // line-major: line_idx.size() x bus_idx.size()
    int n = 0;
  };
  std::vector<Comp> comps;
  std::vector<int> comp_of_line;   // by line index, -1 de-energized
  std::vector<int> pos_in_comp;    // line position inside its component
  std::vector<int> local_of_bus;   // bus index -> local index in its component

  explicit Impl(const GridCase& g) : grid(g) {}

  double ptdf_at(const Comp& c, int line_pos, int local_bus) const {
    return c.ptdf[static_cast<std::size_t>(line_pos) * c.n + local_bus];
  }

  void prepare(const SystemState& s) {
    state = &s;
    comps.clear();
    comp_of_line.assign(grid.lines.size(), -1);
    pos_in_comp.assign(grid.lines.size(), -1);
    local_of_bus.assign(grid.buses.size(), -1);

    std::vector<int> comp_of_bus(grid.buses.size(), -1);
    for (std::size_t seed = 0; seed < grid.buses.size(); ++seed) {
      if (!s.bus_energized[seed] || comp_of_bus[seed] >= 0) continue;
      Comp comp;
      std::deque<int> queue{static_cast<int>(seed)};
      comp_of_bus[seed] = static_cast<int>(comps.size());
      while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        comp.bus_idx.push_back(u);
        for (auto [line_idx, v] : grid.lines_at(u)) {
          if (!s.line_energized[line_idx] || !s.bus_energized[v]) continue;
          if (comp_of_bus[v] < 0) {
            comp_of_bus[v] = static_cast<int>(comps.size());
            queue.push_back(v);
          }
        }
      }
      std::sort(comp.bus_idx.begin(), comp.bus_idx.end());
      comp.n = static_cast<int>(comp.bus_idx.size());
      comps.push_back(std::move(comp));
    }
    for (std::size_t li = 0; li < grid.lines.size(); ++li) {
      if (!s.line_energized[li]) continue;
      const int c = comp_of_bus[grid.bus_index(grid.lines[li].from_bus)];
      comp_of_line[li] = c;
      pos_in_comp[li] = static_cast<int>(comps[c].line_idx.size());
      comps[c].line_idx.push_back(static_cast<int>(li));
    }

    // Dense PTDF per component (reference = local bus 0).
    for (auto& comp : comps) {
      for (int i = 0; i < comp.n; ++i) local_of_bus[comp.bus_idx[i]] = i;
      const int n = comp.n;
      const int r = n - 1;
      comp.ptdf.assign(comp.line_idx.size() * static_cast<std::size_t>(n), 0.0);
      if (r <= 0 || comp.line_idx.empty()) continue;

      std::vector<double> mat(static_cast<std::size_t>(r) * r, 0.0);
      for (int li : comp.line_idx) {
        const double y = 1.0 / grid.lines[li].reactance;
        const int a = local_of_bus[grid.bus_index(grid.lines[li].from_bus)];
        const int b = local_of_bus[grid.bus_index(grid.lines[li].to_bus)];
        if (a > 0) mat[static_cast<std::size_t>(a - 1) * r + (a - 1)] += y;
        if (b > 0) mat[static_cast<std::size_t>(b - 1) * r + (b - 1)] += y;
        if (a > 0 && b > 0) {
          mat[static_cast<std::size_t>(a - 1) * r + (b - 1)] -= y;
          mat[static_cast<std::size_t>(b - 1) * r + (a - 1)] -= y;
        }
      }
      DenseLu lu;
      if (!lu.factor(mat.data(), r)) {
        throw std::runtime_error("incident screen: singular island matrix");
      }
      std::vector<double> binv(static_cast<std::size_t>(r) * r);
      std::vector<double> unit(r), col(r);
      for (int c2 = 0; c2 < r; ++c2) {
        std::fill(unit.begin(), unit.end(), 0.0);
        unit[c2] = 1.0;
        lu.solve(unit.data(), col.data());
        for (int i = 0; i < r; ++i) binv[static_cast<std::size_t>(i) * r + c2] = col[i];
      }
      for (std::size_t e = 0; e < comp.line_idx.size(); ++e) {
        const int li = comp.line_idx[e];
        const double inv_x = 1.0 / grid.lines[li].reactance;
        const int a = local_of_bus[grid.bus_index(grid.lines[li].from_bus)];
        const int b = local_of_bus[grid.bus_index(grid.lines[li].to_bus)];
        for (int local = 1; local < n; ++local) {
          const double ta = a == 0 ? 0.0 : binv[static_cast<std::size_t>(a - 1) * r + (local - 1)];
          const double tb = b == 0 ? 0.0 : binv[static_cast<std::size_t>(b - 1) * r + (local - 1)];
          comp.ptdf[e * static_cast<std::size_t>(n) + local] = (ta - tb) * inv_x;
        }
      }
    }
  }

  // Transfer factor of line `a_pos` for a unit flow transferred across
  // failed line `b_pos` (both positions inside `comp`).
  double phi(const Comp& comp, int a_pos, int b_pos) const {
    const int lb = comp.line_idx[b_pos];
    const int ib = local_of_bus[grid.bus_index(grid.lines[lb].from_bus)];
    const int jb = local_of_bus[grid.bus_index(grid.lines[lb].to_bus)];
    return ptdf_at(comp, a_pos, ib) - ptdf_at(comp, a_pos, jb);
  }

  // True when removing `failed_pos` provably neither islands the component
  // nor overloads any surviving line; flows follow outage factors.
  bool screen_zero_impact(const Comp& comp, const std::vector<int>& failed_pos) const {
    const int k = static_cast<int>(failed_pos.size());
    std::vector<double> m(static_cast<std::size_t>(k) * k, 0.0);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        m[static_cast<std::size_t>(i) * k + j] =
            (i == j ? 1.0 : 0.0) - phi(comp, failed_pos[i], failed_pos[j]);
      }
    }
    DenseLu lu;
    if (!lu.factor(m.data(), k)) return false;  // islanding (or near-singular)

    std::vector<double> f_failed(k), lambda(k);
    for (int i = 0; i < k; ++i) {
      f_failed[i] = state->line_flow_mw[comp.line_idx[failed_pos[i]]];
    }
    lu.solve(f_failed.data(), lambda.data());

    for (std::size_t a = 0; a < comp.line_idx.size(); ++a) {
      bool is_failed = false;
      for (int fp : failed_pos) {
        if (static_cast<int>(a) == fp) is_failed = true;
      }
      if (is_failed) continue;
      double f = state->line_flow_mw[comp.line_idx[a]];
      for (int i = 0; i < k; ++i) f += phi(comp, static_cast<int>(a), failed_pos[i]) * lambda[i];
      const int li = comp.line_idx[a];
      if (std::abs(f) > grid.lines[li].flow_limit_mw + kTripTol * 0.5) return false;
    }
    return true;
  }
};

IncidentEvaluator::IncidentEvaluator(const GridCase& grid) : impl_(new Impl(grid)) {}
IncidentEvaluator::~IncidentEvaluator() = default;

void IncidentEvaluator::prepare(const SystemState& s) { impl_->prepare(s); }

double IncidentEvaluator::shed_mw(const std::vector<LineId>& failed_lines) const {
  const auto& grid = impl_->grid;
  const SystemState& s = *impl_->state;

  // Group the effective failures per component.
  std::vector<std::vector<int>> failed_by_comp(impl_->comps.size());
  bool any = false;
  for (LineId id : failed_lines) {
    const int li = grid.line_index(id);
    if (li < 0 || !s.line_energized[li]) continue;
    failed_by_comp[impl_->comp_of_line[li]].push_back(impl_->pos_in_comp[li]);
    any = true;
  }
  if (!any) return 0.0;

  bool needs_cascade = false;
  for (std::size_t c = 0; c < impl_->comps.size() && !needs_cascade; ++c) {
    if (failed_by_comp[c].empty()) continue;
    if (!impl_->screen_zero_impact(impl_->comps[c], failed_by_comp[c])) needs_cascade = true;
  }
  if (!needs_cascade) return 0.0;

  AttackIncident inc;
  inc.failed_lines = failed_lines;
  inc.k = static_cast<int>(failed_lines.size());
  return cascade(s, inc, grid).shed_total_mw;
}

}  // namespace gridres
