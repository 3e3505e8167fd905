#include "gridres/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "gridres/linalg.hpp"
#include "gridres/lp.hpp"

namespace gridres {

namespace {

constexpr double kBalanceTol = 1e-6;
constexpr double kFlowTol = 1e-6;

// One connected component with local indexing, reduced susceptance LU and
// power-transfer factors. Local bus 0 is the angle reference.
struct IslandSystem {
  std::vector<BusId> bus_ids;                 // sorted ascending
  std::vector<const RestoredEdge*> edges;     // edges inside the component
  std::map<BusId, int> local_of;
  int n = 0;
  DenseLu lu;
  std::vector<double> binv;  // (n-1)^2 inverse of the reduced matrix
  bool has_binv = false;

  void build(const std::vector<BusId>& nodes, const std::vector<const RestoredEdge*>& comp_edges,
             const GridCase& grid) {
    bus_ids = nodes;
    std::sort(bus_ids.begin(), bus_ids.end());
    n = static_cast<int>(bus_ids.size());
    local_of.clear();
    for (int i = 0; i < n; ++i) local_of[bus_ids[i]] = i;
    edges = comp_edges;

    if (n <= 1) return;
    const int r = n - 1;
    std::vector<double> b(static_cast<std::size_t>(r) * r, 0.0);
    for (const auto* e : edges) {
      const int li = grid.line_index(e->line);
      const double x = grid.lines[li].reactance;
      if (!(x > 0.0)) {
        throw std::invalid_argument("zero-reactance line " + std::to_string(e->line));
      }
      const double y = 1.0 / x;
      const int a = local_of.at(e->a);
      const int c = local_of.at(e->b);
      if (a > 0) b[static_cast<std::size_t>(a - 1) * r + (a - 1)] += y;
      if (c > 0) b[static_cast<std::size_t>(c - 1) * r + (c - 1)] += y;
      if (a > 0 && c > 0) {
        b[static_cast<std::size_t>(a - 1) * r + (c - 1)] -= y;
        b[static_cast<std::size_t>(c - 1) * r + (a - 1)] -= y;
      }
    }
    if (!lu.factor(b.data(), r)) {
      throw std::invalid_argument("singular network matrix (parallel zero-impedance paths?)");
    }
    has_binv = false;
  }

  // theta for local buses (reference angle 0), then per-edge flows.
  void flows_from_injections(const std::vector<double>& inj_local, const GridCase& grid,
                             std::vector<double>& edge_flows) const {
    edge_flows.assign(edges.size(), 0.0);
    if (n <= 1) return;
    const int r = n - 1;
    std::vector<double> rhs(r), theta(r);
    for (int i = 1; i < n; ++i) rhs[i - 1] = inj_local[i];
    lu.solve(rhs.data(), theta.data());
    auto angle = [&theta](int local) { return local == 0 ? 0.0 : theta[local - 1]; };
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const int li = grid.line_index(edges[e]->line);
      const double x = grid.lines[li].reactance;
      edge_flows[e] = (angle(local_of.at(edges[e]->a)) - angle(local_of.at(edges[e]->b))) / x;
    }
  }

  void ensure_binv() {
    if (has_binv || n <= 1) return;
    const int r = n - 1;
    binv.assign(static_cast<std::size_t>(r) * r, 0.0);
    std::vector<double> unit(r, 0.0), col(r, 0.0);
    for (int c = 0; c < r; ++c) {
      unit.assign(r, 0.0);
      unit[c] = 1.0;
      lu.solve(unit.data(), col.data());
      for (int i = 0; i < r; ++i) binv[static_cast<std::size_t>(i) * r + c] = col[i];
    }
    has_binv = true;
  }

  // Sensitivity of edge flow to a 1 MW injection at `local` (withdrawn at
  // the reference bus).
  double ptdf(std::size_t edge, int local, const GridCase& grid) const {
    if (n <= 1 || local == 0) return 0.0;
    const int r = n - 1;
    const int li = grid.line_index(edges[edge]->line);
    const double x = grid.lines[li].reactance;
    const int a = local_of.at(edges[edge]->a);
    const int b = local_of.at(edges[edge]->b);
    const double ta = a == 0 ? 0.0 : binv[static_cast<std::size_t>(a - 1) * r + (local - 1)];
    const double tb = b == 0 ? 0.0 : binv[static_cast<std::size_t>(b - 1) * r + (local - 1)];
    return (ta - tb) / x;
  }
};

std::vector<IslandSystem> split_islands(const RestoredGraph& g, const GridCase& grid) {
  const auto parts = islands(g);
  std::vector<IslandSystem> systems(parts.size());
  std::map<BusId, int> comp_of;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    for (BusId b : parts[k]) comp_of[b] = static_cast<int>(k);
  }
  std::vector<std::vector<const RestoredEdge*>> comp_edges(parts.size());
  for (const auto& e : g.edges) comp_edges[comp_of.at(e.a)].push_back(&e);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    systems[k].build(parts[k], comp_edges[k], grid);
  }
  return systems;
}

}  // namespace

std::vector<std::pair<LineId, double>> dc_power_flow(
    const RestoredGraph& g, const std::vector<std::pair<BusId, double>>& injections_mw,
    const GridCase& grid) {
  auto systems = split_islands(g, grid);

  std::map<BusId, double> inj;
  for (const auto& [bus, mw] : injections_mw) {
    bool known = false;
    for (const auto& sys : systems) {
      if (sys.local_of.count(bus)) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("injection at bus " + std::to_string(bus) +
                                  " outside the restored graph");
    }
    inj[bus] += mw;
  }

  std::vector<std::pair<LineId, double>> out;
  std::vector<double> local_inj, flows;
  for (auto& sys : systems) {
    local_inj.assign(sys.n, 0.0);
    double sum = 0.0;
    for (const auto& [bus, mw] : inj) {
      auto it = sys.local_of.find(bus);
      if (it != sys.local_of.end()) {
        local_inj[it->second] = mw;
        sum += mw;
      }
    }
    if (std::abs(sum) > kBalanceTol) {
      throw std::invalid_argument("injections do not balance in island containing bus " +
                                  std::to_string(sys.bus_ids.front()));
    }
    sys.flows_from_injections(local_inj, grid, flows);
    for (std::size_t e = 0; e < sys.edges.size(); ++e) {
      out.emplace_back(sys.edges[e]->line, flows[e]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct IslandLpOutcome {
  bool feasible = true;
  std::string blocking;
  std::vector<double> gen_values;   // aligned with comp gen entries
  std::vector<double> load_values;  // aligned with comp load entries
  std::vector<double> edge_flows;   // aligned with system edges
};

// Maximize total load inside one component subject to bounds, balance,
// optional tau share cap and DC flow limits (added lazily).
IslandLpOutcome solve_island(IslandSystem& sys, const GridCase& grid,
                             const std::vector<std::pair<GenId, double>>& gens,
                             const std::vector<std::pair<BusId, double>>& load_caps,
                             const std::vector<std::pair<BusId, double>>& load_floors,
                             const std::vector<std::pair<GenId, double>>& cranking, double tau) {
  IslandLpOutcome out;
  const int ng = static_cast<int>(gens.size());
  const int nl = static_cast<int>(load_caps.size());

  double crank_total = 0.0;
  std::vector<double> fixed_inj(sys.n, 0.0);  // cranking withdrawals
  for (const auto& [gid, mw] : cranking) {
    const int gi = grid.gen_index(gid);
    fixed_inj[sys.local_of.at(grid.generators[gi].bus)] -= mw;
    crank_total += mw;
  }

  double cap_total = 0.0;
  for (const auto& [gid, cap] : gens) cap_total += cap;
  (void)cap_total;

  if (ng == 0) {
    if (crank_total > kBalanceTol) {
      out.feasible = false;
      out.blocking = "cranking demand " + std::to_string(crank_total) +
                     " MW with no supplying generator in island";
    }
    out.load_values.assign(nl, 0.0);
    out.edge_flows.assign(sys.edges.size(), 0.0);
    return out;
  }

  std::map<BusId, double> floor_of;
  for (const auto& [bus, mw] : load_floors) floor_of[bus] += mw;

  LpProblem lp;
  lp.num_vars = ng + nl;
  lp.objective.assign(lp.num_vars, 0.0);
  lp.lower.assign(lp.num_vars, 0.0);
  lp.upper.assign(lp.num_vars, 0.0);
  for (int i = 0; i < ng; ++i) lp.upper[i] = std::max(0.0, gens[i].second);
  for (int j = 0; j < nl; ++j) {
    const double cap = std::max(0.0, load_caps[j].second);
    double floor = 0.0;
    auto it = floor_of.find(load_caps[j].first);
    if (it != floor_of.end()) floor = std::min(std::max(0.0, it->second), cap);
    lp.objective[ng + j] = 1.0;
    lp.lower[ng + j] = floor;
    lp.upper[ng + j] = cap;
  }

  std::vector<std::string> row_labels;
  {
    LpRow balance;
    balance.coeff.assign(lp.num_vars, 0.0);
    for (int i = 0; i < ng; ++i) balance.coeff[i] = 1.0;
    for (int j = 0; j < nl; ++j) balance.coeff[ng + j] = -1.0;
    balance.rhs = crank_total;
    balance.equality = true;
    lp.rows.push_back(std::move(balance));
    row_labels.push_back("power balance (cranking " + std::to_string(crank_total) + " MW)");
  }
  if (tau < 1.0) {
    LpRow share;
    share.coeff.assign(lp.num_vars, 0.0);
    for (int j = 0; j < nl; ++j) share.coeff[ng + j] = 1.0;
    double cap_sum = 0.0;
    for (const auto& [gid, cap] : gens) cap_sum += cap;
    share.rhs = tau * cap_sum;
    lp.rows.push_back(std::move(share));
    row_labels.push_back("load share cap");
  }

  // Variable -> local bus injection sign (+ for generation, - for load).
  std::vector<int> var_local(lp.num_vars);
  for (int i = 0; i < ng; ++i) {
    var_local[i] = sys.local_of.at(grid.generators[grid.gen_index(gens[i].first)].bus);
  }
  for (int j = 0; j < nl; ++j) var_local[ng + j] = sys.local_of.at(load_caps[j].first);

  sys.ensure_binv();
  std::vector<double> base_flow(sys.edges.size(), 0.0);
  for (std::size_t e = 0; e < sys.edges.size(); ++e) {
    for (int local = 1; local < sys.n; ++local) {
      if (fixed_inj[local] != 0.0) base_flow[e] += sys.ptdf(e, local, grid) * fixed_inj[local];
    }
  }

  LpSolution sol;
  std::vector<char> row_added(sys.edges.size() * 2, 0);
  std::vector<double> flows(sys.edges.size(), 0.0);
  for (int round = 0; round < static_cast<int>(sys.edges.size()) + 2; ++round) {
    sol = solve_lp(lp);
    if (sol.status == LpStatus::Infeasible) {
      out.feasible = false;
      out.blocking = sol.infeasible_row >= 0 && sol.infeasible_row < static_cast<int>(row_labels.size())
                         ? row_labels[sol.infeasible_row]
                         : "bounds";
      out.gen_values.assign(ng, 0.0);
      out.load_values.assign(nl, 0.0);
      out.edge_flows.assign(sys.edges.size(), 0.0);
      return out;
    }
    if (sol.status == LpStatus::Unbounded) {
      throw std::runtime_error("island dispatch: unbounded program");
    }

    // Flows at the solution; collect violated limits.
    bool violated = false;
    for (std::size_t e = 0; e < sys.edges.size(); ++e) {
      double f = base_flow[e];
      for (int v = 0; v < lp.num_vars; ++v) {
        const double sign = v < ng ? 1.0 : -1.0;
        if (sol.x[v] != 0.0) f += sys.ptdf(e, var_local[v], grid) * sign * sol.x[v];
      }
      flows[e] = f;
      const double limit = grid.lines[grid.line_index(sys.edges[e]->line)].flow_limit_mw;
      for (int side = 0; side < 2; ++side) {
        const double excess = side == 0 ? f - limit : -f - limit;
        if (excess > kFlowTol && !row_added[e * 2 + side]) {
          LpRow row;
          row.coeff.assign(lp.num_vars, 0.0);
          const double dir = side == 0 ? 1.0 : -1.0;
          for (int v = 0; v < lp.num_vars; ++v) {
            const double sign = v < ng ? 1.0 : -1.0;
            row.coeff[v] = dir * sys.ptdf(e, var_local[v], grid) * sign;
          }
          row.rhs = limit - dir * base_flow[e];
          lp.rows.push_back(std::move(row));
          row_labels.push_back("flow limit on line " + std::to_string(sys.edges[e]->line));
          row_added[e * 2 + side] = 1;
          violated = true;
        }
      }
    }
    if (!violated) break;
  }

  out.gen_values.assign(sol.x.begin(), sol.x.begin() + ng);
  out.load_values.assign(sol.x.begin() + ng, sol.x.end());
  out.edge_flows = flows;
  return out;
}

DispatchResult dispatch_common(const DispatchProblem& p,
                               const std::vector<std::pair<BusId, double>>& load_caps,
                               const std::vector<std::pair<BusId, double>>& load_floors,
                               double tau) {
  if (p.grid == nullptr) throw std::invalid_argument("dispatch: null grid");
  const GridCase& grid = *p.grid;

  for (const auto& [gid, cap] : p.gen_caps) {
    (void)cap;
    if (grid.gen_index(gid) < 0) throw std::invalid_argument("dispatch: unknown generator");
  }

  auto systems = split_islands(p.island, grid);
  DispatchResult result;
  result.feasible = true;

  auto system_of_bus = [&systems](BusId b) -> int {
    for (std::size_t k = 0; k < systems.size(); ++k) {
      if (systems[k].local_of.count(b)) return static_cast<int>(k);
    }
    throw std::invalid_argument("dispatch: bus " + std::to_string(b) +
                                " referenced outside the island");
  };

  for (std::size_t k = 0; k < systems.size(); ++k) {
    auto& sys = systems[k];
    std::vector<std::pair<GenId, double>> gens;
    std::vector<std::pair<GenId, double>> cranks;
    std::vector<std::pair<BusId, double>> caps;
    std::vector<std::pair<BusId, double>> floors;
    for (const auto& entry : p.gen_caps) {
      const BusId bus = grid.generators[grid.gen_index(entry.first)].bus;
      if (system_of_bus(bus) == static_cast<int>(k)) gens.push_back(entry);
    }
    for (const auto& entry : p.cranking) {
      const BusId bus = grid.generators[grid.gen_index(entry.first)].bus;
      if (system_of_bus(bus) == static_cast<int>(k)) cranks.push_back(entry);
    }
    for (const auto& entry : load_caps) {
      if (system_of_bus(entry.first) == static_cast<int>(k)) caps.push_back(entry);
    }
    for (const auto& entry : load_floors) {
      if (system_of_bus(entry.first) == static_cast<int>(k)) floors.push_back(entry);
    }

    auto outcome = solve_island(sys, grid, gens, caps, floors, cranks, tau);
    if (!outcome.feasible && result.feasible) {
      result.feasible = false;
      result.blocking = outcome.blocking;
    }
    for (std::size_t i = 0; i < gens.size(); ++i) {
      result.gen_output.emplace_back(gens[i].first, outcome.gen_values.empty() ? 0.0 : outcome.gen_values[i]);
    }
    for (std::size_t j = 0; j < caps.size(); ++j) {
      const double v = outcome.load_values.empty() ? 0.0 : outcome.load_values[j];
      result.restored_load.emplace_back(caps[j].first, v);
      result.total_load_mw += v;
    }
    for (std::size_t e = 0; e < sys.edges.size(); ++e) {
      result.line_flows.emplace_back(sys.edges[e]->line,
                                     outcome.edge_flows.empty() ? 0.0 : outcome.edge_flows[e]);
    }
  }

  std::sort(result.gen_output.begin(), result.gen_output.end());
  std::sort(result.restored_load.begin(), result.restored_load.end());
  std::sort(result.line_flows.begin(), result.line_flows.end());
  return result;
}

}  // namespace

DispatchResult restoration_dispatch(const DispatchProblem& p) {
  return dispatch_common(p, p.load_caps, p.load_floors, p.tau);
}

DispatchResult post_attack_redispatch(const DispatchProblem& p, const DispatchResult& prior) {
  std::map<BusId, double> prior_of;
  for (const auto& [bus, mw] : prior.restored_load) prior_of[bus] = mw;
  std::vector<std::pair<BusId, double>> caps;
  caps.reserve(p.load_caps.size());
  for (const auto& [bus, cap] : p.load_caps) {
    auto it = prior_of.find(bus);
    const double bound = it == prior_of.end() ? cap : std::min(cap, it->second);
    caps.emplace_back(bus, bound);
  }
  return dispatch_common(p, caps, {}, 1.0);
}

}  // namespace gridres
