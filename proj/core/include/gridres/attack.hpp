#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gridres/case_model.hpp"
#include "gridres/restoration.hpp"

namespace gridres {

/// Simultaneous equipment failures with occurrence weight mu^k.
struct AttackIncident {
  int id = 0;
  std::vector<LineId> failed_lines;
  std::vector<GenId> failed_generators;
  int k = 1;              // simultaneous equipment failures
  double probability = 1.0;
};

/// Energized lines ranked by |flow| descending (ties to the lower id);
/// returns the top ceil(fraction * count).
std::vector<LineId> select_targets(const SystemState& s, double fraction, const GridCase& grid);

/// Every subset of `targets` of size 1..k_max, probability mu^k. Ids are
/// assigned in enumeration order (singletons first, then pairs, ...).
std::vector<AttackIncident> enumerate_incidents(const std::vector<LineId>& targets, int k_max,
                                                double mu);

struct CascadeOutcome {
  SystemState final_state;
  std::vector<LineId> tripped_lines;  // overload trips, round by round
  std::vector<std::pair<BusId, double>> shed_by_bus;
  std::vector<GenId> lost_generators;
  int rounds = 0;  // rounds in which at least one line tripped
  double shed_total_mw = 0.0;
};

/// Cascading-failure propagation: remove the attacked equipment, then
/// alternate island rebalancing and simultaneous tripping of overloaded
/// lines until quiescent; islands without a supplying unit de-energize.
/// The final operating point of each surviving island comes from the
/// minimum-curtailment redispatch. Attacks on de-energized equipment have
/// no effect.
CascadeOutcome cascade(const SystemState& s, const AttackIncident& inc, const GridCase& grid);

struct RobustnessIndices {
  /// Reconnection delay in minutes; empty when a split cannot be repaired.
  std::optional<double> restoration_delay_min;
  /// Nameplate ramp rate lost with the units knocked out (MW/h).
  double ramp_loss_mw_per_h = 0.0;
  /// Curtailed share of the pre-attack restored load, percent.
  std::optional<double> load_curtailment_pct;
  /// Relative drop of the connectedness index, percent.
  std::optional<double> connectedness_drop_pct;
  /// Relative drop of the redundancy index, percent.
  std::optional<double> redundancy_drop_pct;
};

RobustnessIndices robustness_indices(const GridCase& grid, const SystemState& pre,
                                     const CascadeOutcome& out);

struct IncidentRow {
  double time_min = 0.0;
  int incident_id = 0;
  std::string failed_elements;
  double probability = 1.0;
  RobustnessIndices indices;
};

/// Shed-only incident evaluation against one snapshot. Screens each
/// incident with outage distribution factors first and only falls back to
/// the full cascade when the screen detects islanding or an overload.
class IncidentEvaluator {
 public:
  explicit IncidentEvaluator(const GridCase& grid);
  ~IncidentEvaluator();
  IncidentEvaluator(const IncidentEvaluator&) = delete;
  IncidentEvaluator& operator=(const IncidentEvaluator&) = delete;

  void prepare(const SystemState& s);
  double shed_mw(const std::vector<LineId>& failed_lines) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gridres
