#pragma once

#include <vector>

#include "gridres/case_model.hpp"

namespace gridres {

struct RestoredEdge {
  LineId line = 0;
  BusId a = 0;
  BusId b = 0;
};

/// Snapshot of the energized part of the grid: restored buses plus the
/// energized, non-failed lines among them. Self-contained so the graph
/// operations below stay pure.
struct RestoredGraph {
  std::vector<BusId> nodes;        // unique
  std::vector<RestoredEdge> edges; // endpoints must appear in nodes

  bool has_node(BusId id) const;
};

/// Connected components, ordered by ascending minimum bus id; nodes within
/// a component sorted ascending. Components are disjoint and cover all nodes.
std::vector<std::vector<BusId>> islands(const RestoredGraph& g);

/// Minimum number of edges whose removal disconnects i and j (unit-capacity
/// max-flow). 0 iff already disconnected. Throws std::invalid_argument when
/// i == j or either node is absent.
int edge_connectivity(const RestoredGraph& g, BusId i, BusId j);

/// Fraction of (supplying generator, restored load bus) pairs connected in
/// g, normalized by the pairs connected in the full pre-outage grid.
double connectedness_index(const RestoredGraph& g, const GridCase& grid,
                           const std::vector<GenId>& online_gens,
                           const std::vector<BusId>& restored_load_buses);

/// Mean pairwise edge connectivity over ordered node pairs of g, normalized
/// by N(N-1) with N the bus count of the initial grid.
double redundancy_index(const RestoredGraph& g, int initial_bus_count);

struct ReconnectionPlan {
  std::vector<LineId> lines;  // de-energized intact lines to energize
  bool reconnectable = true;
  double delay_minutes = 0.0; // sum of restoration minutes over `lines`
};

/// Greedy sequential merge: repeatedly joins the cheapest remaining island
/// to the component holding the black-start bus, paths measured in
/// de-energized intact lines. failed_lines are unusable.
ReconnectionPlan reconnection_plan(const GridCase& grid, const std::vector<LineId>& failed_lines,
                                   const RestoredGraph& g);

}  // namespace gridres
