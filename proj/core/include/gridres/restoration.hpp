#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridres/case_model.hpp"
#include "gridres/dispatch.hpp"
#include "gridres/topology.hpp"

namespace gridres {

enum class GenState { Offline, Starting, Online };

/// One stable restoration time-section.
struct SystemState {
  double time_min = 0.0;
  std::vector<uint8_t> bus_energized;    // by bus index
  std::vector<uint8_t> line_energized;   // by line index
  std::vector<GenState> gen_state;       // by generator index
  std::vector<double> gen_start_min;     // start time, NaN while offline
  std::vector<double> gen_output_mw;     // dispatched output
  std::vector<double> restored_load_mw;  // by load index
  std::vector<double> line_flow_mw;      // by line index, 0 when de-energized

  double total_restored_mw() const;
};

/// Builds the restored-graph view (energized buses + lines) of a state.
RestoredGraph restored_graph(const GridCase& grid, const SystemState& s);

struct TrajectoryEvent {
  double time_min = 0.0;
  enum Kind { LineCharged, GeneratorStarted } kind = LineCharged;
  int id = 0;  // line id or generator id
};

struct Trajectory {
  std::vector<SystemState> steps;  // times strictly increasing by dt
  std::vector<TrajectoryEvent> events;
  bool completed = false;                    // all units started within budget
  std::optional<double> completion_min;      // set when completed
  double dt_min = 5.0;
};

struct SimConfig {
  double dt_min = 5.0;
  int step_budget = 96;  // 8 h at 5-minute steps
  double tau = 0.95;
};

/// Available output of a started unit at time t (minutes): ramps at
/// ramp_mw_per_h from its start time up to the nameplate rating. Zero
/// when offline or before the start time.
double gen_output_at(const Generator& g, double t_min);

struct StartCheck {
  bool allowed = false;
  std::string reason;  // "cranking-power" or "start-time window" when refused
};

/// Start-up feasibility of an offline unit at time t on snapshot s: the
/// cranking demands of starting units plus restored load plus this unit's
/// cranking power must stay strictly below the available online output,
/// and t must fall in the unit's hot/cold start window.
StartCheck can_start(const Generator& g, double t_min, const SystemState& s, const GridCase& grid);

/// Reorders a permutation of line ids into a prefix-feasible energization
/// sequence: each selected line touches an already-energized bus (seeded by
/// the black-start bus). Unreachable lines are dropped.
std::vector<LineId> decode(const std::vector<LineId>& perm, const GridCase& grid);

/// True when every line in `sequence` has an energized endpoint at its
/// position; `first_infeasible` receives the offender otherwise.
bool is_prefix_feasible(const std::vector<LineId>& sequence, const GridCase& grid,
                        LineId* first_infeasible = nullptr);

/// Discrete-time restoration run: one line energized per step (operational
/// the following step), eligible units started greedily, maximum-pickup
/// dispatch with monotone per-bus load floors. Ends when every unit has
/// started or the step budget runs out.
Trajectory simulate_sequence(const GridCase& grid, const std::vector<LineId>& sequence,
                             const SimConfig& cfg);

/// simulate_sequence over decode(perm).
Trajectory simulate(const GridCase& grid, const std::vector<LineId>& perm, const SimConfig& cfg);

struct RestorabilityIndices {
  double restoration_time_min = 0.0;           // completion time
  double avg_ramp_mw_per_h = 0.0;              // time-averaged active ramp sum
  std::vector<double> restored_load_mw;        // per step
  std::vector<double> connectedness;           // per step
  std::vector<double> redundancy;              // per step
};

/// Index series over a completed trajectory. Throws std::invalid_argument
/// on a non-completing trajectory.
RestorabilityIndices restorability_indices(const Trajectory& tr, const GridCase& grid);

/// Breadth-first baseline: always charges the lowest-id de-energized line
/// adjacent to the energized region. Spanning order over all lines.
std::vector<LineId> greedy_baseline_sequence(const GridCase& grid);

}  // namespace gridres
