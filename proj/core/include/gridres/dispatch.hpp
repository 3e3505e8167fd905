#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gridres/case_model.hpp"
#include "gridres/topology.hpp"

namespace gridres {

/// Linearized real-power flow on an energized snapshot. Injections are MW
/// per bus and must balance to zero within 1e-6 inside every island.
/// Throws std::invalid_argument on unbalanced injections or a
/// zero-reactance line.
std::vector<std::pair<LineId, double>> dc_power_flow(
    const RestoredGraph& g, const std::vector<std::pair<BusId, double>>& injections_mw,
    const GridCase& grid);

struct DispatchProblem {
  const GridCase* grid = nullptr;
  RestoredGraph island;
  std::vector<std::pair<GenId, double>> gen_caps;     // supplying units, MW upper bounds
  std::vector<std::pair<BusId, double>> load_caps;    // restorable MW per load bus
  std::vector<std::pair<BusId, double>> load_floors;  // monotone pickup lower bounds
  std::vector<std::pair<GenId, double>> cranking;     // starting units, fixed MW demand
  double tau = 1.0;  // sum(load) <= tau * sum(gen_caps); 1.0 disables the row
};

struct DispatchResult {
  bool feasible = false;
  std::string blocking;  // filled when infeasible
  std::vector<std::pair<GenId, double>> gen_output;
  std::vector<std::pair<BusId, double>> restored_load;
  std::vector<std::pair<LineId, double>> line_flows;  // signed, energized lines only
  double total_load_mw = 0.0;
};

/// Maximizes restored load subject to per-bus caps, the tau share cap, DC
/// flow limits, power balance and cranking demands. Deterministic: identical
/// problems give bit-identical results.
DispatchResult restoration_dispatch(const DispatchProblem& p);

/// Minimum-curtailment redispatch after equipment loss: load is bounded by
/// the prior operating point, generation by the caps in `p`, no tau row.
DispatchResult post_attack_redispatch(const DispatchProblem& p, const DispatchResult& prior);

}  // namespace gridres
