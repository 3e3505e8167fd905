#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gridres {

using BusId = int;
using LineId = int;
using GenId = int;

/// Thrown for malformed case documents (bad syntax, schema violations).
/// The message carries the byte offset / key path of the offending token.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a syntactically valid document violates a model invariant
/// (dangling bus reference, duplicate id, disconnected graph, ...).
/// The message names the offending entity.
class SemanticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Bus {
  BusId id = 0;
  std::string name;

  friend bool operator==(const Bus&, const Bus&) = default;
};

struct Line {
  LineId id = 0;
  BusId from_bus = 0;
  BusId to_bus = 0;
  double reactance = 0.0;       // per-unit on the system MVA base
  double flow_limit_mw = 0.0;
  double restore_minutes = 5.0;

  friend bool operator==(const Line&, const Line&) = default;
};

struct Generator {
  GenId id = 0;
  BusId bus = 0;
  double rated_mw = 0.0;              // nameplate active power
  double ramp_mw_per_h = 0.0;
  double cranking_mw = 0.0;           // start-up demand drawn from the grid
  double hot_start_limit_min = std::numeric_limits<double>::infinity();
  double cold_start_limit_min = 0.0;
  bool black_start = false;

  // Assigned by the simulator, never serialized.
  std::optional<double> start_time_min;

  friend bool operator==(const Generator&, const Generator&) = default;
};

struct Load {
  BusId bus = 0;
  double demand_mw = 0.0;  // pre-outage demand to be restored
  bool critical = false;

  friend bool operator==(const Load&, const Load&) = default;
};

struct Violation {
  std::string entity;   // e.g. "generator 30", "line 7"
  std::string message;
};

/// Static network description. Immutable after finalize(); safe to share
/// across concurrent evaluators.
struct GridCase {
  double mva_base = 100.0;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<Load> loads;

  /// Rebuilds the derived lookups below. Must be called after the value
  /// fields change; parse_case/import_matpower call it for you.
  void finalize();

  double total_load_mw() const { return total_load_mw_; }

  int bus_index(BusId id) const;   // -1 when absent
  int line_index(LineId id) const;
  int gen_index(GenId id) const;

  /// Lines incident to a bus as (line index, neighbour bus index) pairs,
  /// in case order. Lines with dangling endpoints are skipped.
  const std::vector<std::pair<int, int>>& lines_at(int bus_idx) const {
    return adjacency_[bus_idx];
  }
  const std::vector<int>& gens_at(int bus_idx) const { return gens_at_bus_[bus_idx]; }
  int load_at(int bus_idx) const { return load_at_bus_[bus_idx]; }  // load index or -1

  /// Index of the black-start generator, -1 if the case has none.
  int black_start_gen() const { return black_start_gen_; }

  bool operator==(const GridCase& other) const;

 private:
  double total_load_mw_ = 0.0;
  std::unordered_map<int, int> bus_index_;
  std::unordered_map<int, int> line_index_;
  std::unordered_map<int, int> gen_index_;
  std::vector<std::vector<std::pair<int, int>>> adjacency_;
  std::vector<std::vector<int>> gens_at_bus_;
  std::vector<int> load_at_bus_;
  int black_start_gen_ = -1;
};

/// Parses the native case document (JSON). Throws ParseError / SemanticError.
GridCase parse_case(std::string_view text);

/// Serializes to the native document. Field order and number formatting are
/// byte-stable; serialize(parse(d)) reparses to an equal GridCase.
std::string serialize_case(const GridCase& grid);

/// Imports a MATPOWER-style tabular case (bus/branch/gen sections on a
/// 100 MVA base). Throws ParseError / SemanticError.
GridCase import_matpower(std::string_view text);

/// Checks every model invariant; empty result means the case is valid.
std::vector<Violation> validate(const GridCase& grid);

/// Structural equality with a relative tolerance on floating fields;
/// rel_tol = 0 demands bit equality.
bool cases_equal(const GridCase& a, const GridCase& b, double rel_tol = 0.0);

}  // namespace gridres
