#include "gridres/restoration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridres {

double SystemState::total_restored_mw() const {
  double sum = 0.0;
  for (double v : restored_load_mw) sum += v;
  return sum;
}

RestoredGraph restored_graph(const GridCase& grid, const SystemState& s) {
  RestoredGraph g;
  for (std::size_t i = 0; i < grid.buses.size(); ++i) {
    if (s.bus_energized[i]) g.nodes.push_back(grid.buses[i].id);
  }
  for (std::size_t i = 0; i < grid.lines.size(); ++i) {
    if (s.line_energized[i]) {
      g.edges.push_back({grid.lines[i].id, grid.lines[i].from_bus, grid.lines[i].to_bus});
    }
  }
  return g;
}

double gen_output_at(const Generator& g, double t_min) {
  if (!g.start_time_min.has_value()) return 0.0;
  const double since = t_min - *g.start_time_min;
  if (since <= 0.0) return 0.0;
  return std::min(g.rated_mw, g.ramp_mw_per_h * since / 60.0);
}

StartCheck can_start(const Generator& g, double t_min, const SystemState& s,
                     const GridCase& grid) {
  const bool hot_ok = t_min < g.hot_start_limit_min;
  const bool cold_ok = t_min > g.cold_start_limit_min;
  if (!hot_ok && !cold_ok) return {false, "start-time window"};

  double cranking = g.cranking_mw;
  double online_output = 0.0;
  for (std::size_t i = 0; i < grid.generators.size(); ++i) {
    if (s.gen_state[i] == GenState::Starting) cranking += grid.generators[i].cranking_mw;
    if (s.gen_state[i] == GenState::Online) {
      Generator tmp = grid.generators[i];
      tmp.start_time_min = s.gen_start_min[i];
      online_output += gen_output_at(tmp, t_min);
    }
  }
  const double committed = cranking + s.total_restored_mw();
  if (!(committed < online_output)) return {false, "cranking-power"};
  return {true, ""};
}

std::vector<LineId> decode(const std::vector<LineId>& perm, const GridCase& grid) {
  const int bsu = grid.black_start_gen();
  if (bsu < 0) throw std::invalid_argument("decode: case has no black-start unit");
  std::vector<uint8_t> bus_on(grid.buses.size(), 0);
  bus_on[grid.bus_index(grid.generators[bsu].bus)] = 1;

  std::vector<int> order;
  order.reserve(perm.size());
  for (LineId id : perm) {
    const int idx = grid.line_index(id);
    if (idx < 0) throw std::invalid_argument("decode: unknown line " + std::to_string(id));
    order.push_back(idx);
  }

  std::vector<uint8_t> used(grid.lines.size(), 0);
  std::vector<LineId> sequence;
  sequence.reserve(order.size());
  for (;;) {
    int pick = -1;
    for (int idx : order) {
      if (used[idx]) continue;
      const Line& l = grid.lines[idx];
      if (bus_on[grid.bus_index(l.from_bus)] || bus_on[grid.bus_index(l.to_bus)]) {
        pick = idx;
        break;
      }
    }
    if (pick < 0) break;
    used[pick] = 1;
    sequence.push_back(grid.lines[pick].id);
    bus_on[grid.bus_index(grid.lines[pick].from_bus)] = 1;
    bus_on[grid.bus_index(grid.lines[pick].to_bus)] = 1;
  }
  return sequence;
}

bool is_prefix_feasible(const std::vector<LineId>& sequence, const GridCase& grid,
                        LineId* first_infeasible) {
  const int bsu = grid.black_start_gen();
  if (bsu < 0) return false;
  std::vector<uint8_t> bus_on(grid.buses.size(), 0);
  bus_on[grid.bus_index(grid.generators[bsu].bus)] = 1;
  std::vector<uint8_t> used(grid.lines.size(), 0);
  for (LineId id : sequence) {
    const int idx = grid.line_index(id);
    if (idx < 0 || used[idx]) {
      if (first_infeasible) *first_infeasible = id;
      return false;
    }
    const Line& l = grid.lines[idx];
    if (!bus_on[grid.bus_index(l.from_bus)] && !bus_on[grid.bus_index(l.to_bus)]) {
      if (first_infeasible) *first_infeasible = id;
      return false;
    }
    used[idx] = 1;
    bus_on[grid.bus_index(l.from_bus)] = 1;
    bus_on[grid.bus_index(l.to_bus)] = 1;
  }
  return true;
}

namespace {

// Dispatch for the component holding the black-start unit at time t.
DispatchResult dispatch_step(const GridCase& grid, const SystemState& s, double t,
                             const std::vector<double>& prev_load, double tau) {
  DispatchProblem p;
  p.grid = &grid;
  p.island = restored_graph(grid, s);
  p.tau = tau;
  for (std::size_t i = 0; i < grid.generators.size(); ++i) {
    if (s.gen_state[i] == GenState::Online) {
      Generator tmp = grid.generators[i];
      tmp.start_time_min = s.gen_start_min[i];
      p.gen_caps.emplace_back(grid.generators[i].id, gen_output_at(tmp, t));
    } else if (s.gen_state[i] == GenState::Starting) {
      p.cranking.emplace_back(grid.generators[i].id, grid.generators[i].cranking_mw);
    }
  }
  for (std::size_t li = 0; li < grid.loads.size(); ++li) {
    const int bi = grid.bus_index(grid.loads[li].bus);
    if (bi >= 0 && s.bus_energized[bi]) {
      p.load_caps.emplace_back(grid.loads[li].bus, grid.loads[li].demand_mw);
      if (prev_load[li] > 0.0) p.load_floors.emplace_back(grid.loads[li].bus, prev_load[li]);
    }
  }
  return restoration_dispatch(p);
}

void apply_dispatch(const GridCase& grid, SystemState& s, const DispatchResult& r) {
  std::fill(s.gen_output_mw.begin(), s.gen_output_mw.end(), 0.0);
  for (const auto& [gid, mw] : r.gen_output) s.gen_output_mw[grid.gen_index(gid)] = mw;
  std::fill(s.restored_load_mw.begin(), s.restored_load_mw.end(), 0.0);
  for (const auto& [bus, mw] : r.restored_load) {
    const int li = grid.load_at(grid.bus_index(bus));
    if (li >= 0) s.restored_load_mw[li] = mw;
  }
  std::fill(s.line_flow_mw.begin(), s.line_flow_mw.end(), 0.0);
  for (const auto& [line, mw] : r.line_flows) s.line_flow_mw[grid.line_index(line)] = mw;
}

}  // namespace

Trajectory simulate_sequence(const GridCase& grid, const std::vector<LineId>& sequence,
                             const SimConfig& cfg) {
  const int bsu = grid.black_start_gen();
  if (bsu < 0) throw std::invalid_argument("simulate: case has no black-start unit");

  Trajectory tr;
  tr.dt_min = cfg.dt_min;

  SystemState s;
  s.bus_energized.assign(grid.buses.size(), 0);
  s.line_energized.assign(grid.lines.size(), 0);
  s.gen_state.assign(grid.generators.size(), GenState::Offline);
  s.gen_start_min.assign(grid.generators.size(), std::numeric_limits<double>::quiet_NaN());
  s.gen_output_mw.assign(grid.generators.size(), 0.0);
  s.restored_load_mw.assign(grid.loads.size(), 0.0);
  s.line_flow_mw.assign(grid.lines.size(), 0.0);
  s.bus_energized[grid.bus_index(grid.generators[bsu].bus)] = 1;

  std::vector<double> prev_load(grid.loads.size(), 0.0);
  std::size_t next_line = 0;
  int charged_line_idx = -1;  // energized this step, operational next step

  for (int step = 0; step < cfg.step_budget; ++step) {
    const double t = step * cfg.dt_min;
    s.time_min = t;

    // The line charged last step becomes operational now.
    if (charged_line_idx >= 0) {
      s.line_energized[charged_line_idx] = 1;
      s.bus_energized[grid.bus_index(grid.lines[charged_line_idx].from_bus)] = 1;
      s.bus_energized[grid.bus_index(grid.lines[charged_line_idx].to_bus)] = 1;
      charged_line_idx = -1;
    }

    // Charge the next line of the sequence.
    if (next_line < sequence.size()) {
      const int idx = grid.line_index(sequence[next_line]);
      if (idx < 0) {
        throw std::invalid_argument("simulate: unknown line " +
                                    std::to_string(sequence[next_line]));
      }
      charged_line_idx = idx;
      tr.events.push_back({t, TrajectoryEvent::LineCharged, grid.lines[idx].id});
      ++next_line;
    }

    // Status promotion: a starting unit supplies once its ramp output
    // covers its own cranking power.
    for (std::size_t i = 0; i < grid.generators.size(); ++i) {
      if (s.gen_state[i] == GenState::Starting) {
        Generator tmp = grid.generators[i];
        tmp.start_time_min = s.gen_start_min[i];
        if (gen_output_at(tmp, t) >= grid.generators[i].cranking_mw) {
          s.gen_state[i] = GenState::Online;
        }
      }
    }

    // Start every eligible unit, ascending id; the black-start unit
    // self-starts at t = 0.
    std::vector<std::size_t> started_now;
    std::vector<std::size_t> gen_order(grid.generators.size());
    for (std::size_t i = 0; i < gen_order.size(); ++i) gen_order[i] = i;
    std::sort(gen_order.begin(), gen_order.end(), [&grid](std::size_t a, std::size_t b) {
      return grid.generators[a].id < grid.generators[b].id;
    });
    for (std::size_t i : gen_order) {
      if (s.gen_state[i] != GenState::Offline) continue;
      const Generator& g = grid.generators[i];
      if (g.black_start) {
        if (t == 0.0) {
          s.gen_state[i] = GenState::Online;
          s.gen_start_min[i] = 0.0;
          tr.events.push_back({t, TrajectoryEvent::GeneratorStarted, g.id});
          started_now.push_back(i);
        }
        continue;
      }
      const int bi = grid.bus_index(g.bus);
      if (bi < 0 || !s.bus_energized[bi]) continue;
      if (!can_start(g, t, s, grid).allowed) continue;
      s.gen_state[i] = g.cranking_mw <= 0.0 ? GenState::Online : GenState::Starting;
      s.gen_start_min[i] = t;
      tr.events.push_back({t, TrajectoryEvent::GeneratorStarted, g.id});
      started_now.push_back(i);
    }

    bool all_started = true;
    for (auto st : s.gen_state) {
      if (st == GenState::Offline) all_started = false;
    }

    DispatchResult dis = dispatch_step(grid, s, t, prev_load, cfg.tau);
    if (!dis.feasible && !started_now.empty()) {
      // Eligibility passed the aggregate check but the network cannot
      // deliver the cranking power; cancel this step's starts.
      for (std::size_t i : started_now) {
        if (grid.generators[i].black_start) continue;
        s.gen_state[i] = GenState::Offline;
        s.gen_start_min[i] = std::numeric_limits<double>::quiet_NaN();
      }
      tr.events.erase(
          std::remove_if(tr.events.begin(), tr.events.end(),
                         [t](const TrajectoryEvent& e) {
                           return e.kind == TrajectoryEvent::GeneratorStarted && e.time_min == t;
                         }),
          tr.events.end());
      all_started = false;
      dis = dispatch_step(grid, s, t, prev_load, cfg.tau);
    }
    if (!dis.feasible) {
      // Monotone floors made infeasible by a loop-closing line; restart
      // pickup from scratch this step.
      std::vector<double> zero(grid.loads.size(), 0.0);
      dis = dispatch_step(grid, s, t, zero, cfg.tau);
    }
    apply_dispatch(grid, s, dis);
    for (std::size_t li = 0; li < grid.loads.size(); ++li) {
      prev_load[li] = s.restored_load_mw[li];
    }

    tr.steps.push_back(s);

    if (all_started) {
      tr.completed = true;
      tr.completion_min = t;
      break;
    }
  }
  return tr;
}

Trajectory simulate(const GridCase& grid, const std::vector<LineId>& perm, const SimConfig& cfg) {
  return simulate_sequence(grid, decode(perm, grid), cfg);
}

RestorabilityIndices restorability_indices(const Trajectory& tr, const GridCase& grid) {
  if (!tr.completed) {
    throw std::invalid_argument("restorability_indices: trajectory did not complete");
  }
  RestorabilityIndices out;
  out.restoration_time_min = *tr.completion_min;

  const double horizon = *tr.completion_min;
  double ramp_integral = 0.0;  // MW/h * min
  for (const auto& step : tr.steps) {
    if (step.time_min >= horizon && horizon > 0.0) break;
    double active = 0.0;
    for (std::size_t i = 0; i < grid.generators.size(); ++i) {
      if (step.gen_state[i] == GenState::Offline) continue;
      const Generator& g = grid.generators[i];
      const double since = step.time_min - step.gen_start_min[i];
      const double ramp_span = g.rated_mw / g.ramp_mw_per_h * 60.0;
      if (since >= 0.0 && since < ramp_span) active += g.ramp_mw_per_h;
    }
    ramp_integral += active * tr.dt_min;
  }
  out.avg_ramp_mw_per_h = horizon > 0.0 ? ramp_integral / horizon : 0.0;

  for (const auto& step : tr.steps) {
    out.restored_load_mw.push_back(step.total_restored_mw());

    std::vector<GenId> online;
    for (std::size_t i = 0; i < grid.generators.size(); ++i) {
      if (step.gen_state[i] == GenState::Online) online.push_back(grid.generators[i].id);
    }
    std::vector<BusId> load_buses;
    for (std::size_t li = 0; li < grid.loads.size(); ++li) {
      if (step.restored_load_mw[li] > 0.0) load_buses.push_back(grid.loads[li].bus);
    }
    const RestoredGraph g = restored_graph(grid, step);
    out.connectedness.push_back(connectedness_index(g, grid, online, load_buses));
    out.redundancy.push_back(redundancy_index(g, static_cast<int>(grid.buses.size())));
  }
  return out;
}

std::vector<LineId> greedy_baseline_sequence(const GridCase& grid) {
  const int bsu = grid.black_start_gen();
  if (bsu < 0) throw std::invalid_argument("baseline: case has no black-start unit");
  std::vector<uint8_t> bus_on(grid.buses.size(), 0);
  bus_on[grid.bus_index(grid.generators[bsu].bus)] = 1;
  std::vector<uint8_t> used(grid.lines.size(), 0);

  std::vector<LineId> out;
  for (;;) {
    int best = -1;
    for (std::size_t i = 0; i < grid.lines.size(); ++i) {
      if (used[i]) continue;
      const Line& l = grid.lines[i];
      if (!bus_on[grid.bus_index(l.from_bus)] && !bus_on[grid.bus_index(l.to_bus)]) continue;
      if (best < 0 || l.id < grid.lines[best].id) best = static_cast<int>(i);
    }
    if (best < 0) break;
    used[best] = 1;
    out.push_back(grid.lines[best].id);
    bus_on[grid.bus_index(grid.lines[best].from_bus)] = 1;
    bus_on[grid.bus_index(grid.lines[best].to_bus)] = 1;
  }
  return out;
}

}  // namespace gridres
