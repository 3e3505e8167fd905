#include "gridres/case_model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

#include "json.hpp"

namespace gridres {

namespace {

using nlohmann::ordered_json;

std::string entity_name(const char* kind, long long id) {
  return std::string(kind) + " " + std::to_string(id);
}

double require_number(const ordered_json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw ParseError("missing key '" + std::string(key) + "' in " + where);
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    throw ParseError("key '" + std::string(key) + "' in " + where + " must be a number");
  }
  return v.get<double>();
}

int require_int(const ordered_json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw ParseError("missing key '" + std::string(key) + "' in " + where);
  }
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw ParseError("key '" + std::string(key) + "' in " + where + " must be an integer");
  }
  return v.get<int>();
}

double optional_number(const ordered_json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<double>();
}

void reject_unknown_keys(const ordered_json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ParseError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

// Shortest round-trip decimal for a double; integral values keep a
// trailing ".0" so the field stays a JSON float on reparse.
ordered_json num(double v) { return ordered_json(v); }

}  // namespace

void GridCase::finalize() {
  bus_index_.clear();
  line_index_.clear();
  gen_index_.clear();
  for (std::size_t i = 0; i < buses.size(); ++i) bus_index_.emplace(buses[i].id, static_cast<int>(i));
  for (std::size_t i = 0; i < lines.size(); ++i) line_index_.emplace(lines[i].id, static_cast<int>(i));
  for (std::size_t i = 0; i < generators.size(); ++i) gen_index_.emplace(generators[i].id, static_cast<int>(i));

  adjacency_.assign(buses.size(), {});
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int a = bus_index(lines[i].from_bus);
    const int b = bus_index(lines[i].to_bus);
    if (a < 0 || b < 0) continue;
    adjacency_[a].emplace_back(static_cast<int>(i), b);
    adjacency_[b].emplace_back(static_cast<int>(i), a);
  }

  gens_at_bus_.assign(buses.size(), {});
  black_start_gen_ = -1;
  for (std::size_t i = 0; i < generators.size(); ++i) {
    const int b = bus_index(generators[i].bus);
    if (b >= 0) gens_at_bus_[b].push_back(static_cast<int>(i));
    if (generators[i].black_start && black_start_gen_ < 0) black_start_gen_ = static_cast<int>(i);
  }

  load_at_bus_.assign(buses.size(), -1);
  total_load_mw_ = 0.0;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const int b = bus_index(loads[i].bus);
    if (b >= 0 && load_at_bus_[b] < 0) load_at_bus_[b] = static_cast<int>(i);
    total_load_mw_ += loads[i].demand_mw;
  }
}

int GridCase::bus_index(BusId id) const {
  auto it = bus_index_.find(id);
  return it == bus_index_.end() ? -1 : it->second;
}

int GridCase::line_index(LineId id) const {
  auto it = line_index_.find(id);
  return it == line_index_.end() ? -1 : it->second;
}

int GridCase::gen_index(GenId id) const {
  auto it = gen_index_.find(id);
  return it == gen_index_.end() ? -1 : it->second;
}

bool GridCase::operator==(const GridCase& other) const {
  return mva_base == other.mva_base && buses == other.buses && lines == other.lines &&
         generators == other.generators && loads == other.loads;
}

std::vector<Violation> validate(const GridCase& grid) {
  std::vector<Violation> out;
  auto add = [&out](std::string entity, std::string message) {
    out.push_back({std::move(entity), std::move(message)});
  };

  std::set<int> bus_ids;
  for (const auto& b : grid.buses) {
    if (!bus_ids.insert(b.id).second) add(entity_name("bus", b.id), "duplicate id");
  }

  std::set<int> line_ids;
  for (const auto& l : grid.lines) {
    const std::string ent = entity_name("line", l.id);
    if (!line_ids.insert(l.id).second) add(ent, "duplicate id");
    if (l.from_bus == l.to_bus) add(ent, "endpoints must differ");
    if (!bus_ids.count(l.from_bus)) add(ent, "references missing bus " + std::to_string(l.from_bus));
    if (!bus_ids.count(l.to_bus)) add(ent, "references missing bus " + std::to_string(l.to_bus));
    if (!(l.reactance > 0.0)) add(ent, "reactance must be > 0");
    if (!(l.flow_limit_mw > 0.0)) add(ent, "flow limit must be > 0");
    if (!(l.restore_minutes > 0.0)) add(ent, "restoration time must be > 0");
  }

  std::set<int> gen_ids;
  int black_start_count = 0;
  for (const auto& g : grid.generators) {
    const std::string ent = entity_name("generator", g.id);
    if (!gen_ids.insert(g.id).second) add(ent, "duplicate id");
    if (!bus_ids.count(g.bus)) add(ent, "references missing bus " + std::to_string(g.bus));
    if (!(g.rated_mw > 0.0)) add(ent, "rated power must be > 0");
    if (!(g.ramp_mw_per_h > 0.0)) add(ent, "ramp rate must be > 0");
    if (g.cranking_mw < 0.0) add(ent, "cranking power must be >= 0");
    if (g.cold_start_limit_min < 0.0) add(ent, "cold-start limit must be >= 0");
    if (std::isfinite(g.hot_start_limit_min) && std::isfinite(g.cold_start_limit_min) &&
        !(g.cold_start_limit_min < g.hot_start_limit_min)) {
      add(ent, "cold-start limit must be below hot-start limit");
    }
    if (g.black_start) ++black_start_count;
  }
  if (black_start_count != 1 && !grid.generators.empty()) {
    add("generators", "exactly one black-start unit required, found " +
                          std::to_string(black_start_count));
  }
  if (grid.generators.empty()) add("generators", "at least one generator required");

  std::set<int> load_buses;
  for (const auto& l : grid.loads) {
    const std::string ent = "load at bus " + std::to_string(l.bus);
    if (!bus_ids.count(l.bus)) add(ent, "references missing bus " + std::to_string(l.bus));
    if (!load_buses.insert(l.bus).second) add(ent, "duplicate load bus");
    if (l.demand_mw < 0.0) add(ent, "demand must be >= 0");
  }

  // Connectivity of the full line graph over all buses.
  if (grid.lines.empty()) {
    add("grid", "disconnected graph (no lines)");
  } else if (!grid.buses.empty()) {
    std::unordered_map<int, std::vector<int>> adj;
    for (const auto& l : grid.lines) {
      if (bus_ids.count(l.from_bus) && bus_ids.count(l.to_bus)) {
        adj[l.from_bus].push_back(l.to_bus);
        adj[l.to_bus].push_back(l.from_bus);
      }
    }
    std::set<int> seen;
    std::deque<int> queue{grid.buses.front().id};
    seen.insert(grid.buses.front().id);
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int v : adj[u]) {
        if (seen.insert(v).second) queue.push_back(v);
      }
    }
    for (const auto& b : grid.buses) {
      if (!seen.count(b.id)) {
        add("grid", "disconnected graph (bus " + std::to_string(b.id) + " unreachable)");
        break;
      }
    }
  }

  return out;
}

namespace {

GridCase from_json(const ordered_json& doc) {
  if (!doc.is_object()) throw ParseError("top level must be an object");
  reject_unknown_keys(doc, {"mva_base", "buses", "lines", "generators", "loads"}, "top level");

  GridCase grid;
  grid.mva_base = optional_number(doc, "mva_base", 100.0);

  if (!doc.contains("buses") || !doc.at("buses").is_array()) {
    throw ParseError("missing 'buses' array");
  }
  for (const auto& j : doc.at("buses")) {
    reject_unknown_keys(j, {"id", "name"}, "bus entry");
    Bus b;
    b.id = require_int(j, "id", "bus entry");
    if (j.contains("name")) b.name = j.at("name").get<std::string>();
    grid.buses.push_back(std::move(b));
  }

  if (!doc.contains("lines") || !doc.at("lines").is_array()) {
    throw ParseError("missing 'lines' array");
  }
  for (const auto& j : doc.at("lines")) {
    reject_unknown_keys(j, {"id", "from", "to", "x", "limit_mw", "restore_min"}, "line entry");
    Line l;
    l.id = require_int(j, "id", "line entry");
    const std::string where = entity_name("line", l.id);
    l.from_bus = require_int(j, "from", where);
    l.to_bus = require_int(j, "to", where);
    l.reactance = require_number(j, "x", where);
    l.flow_limit_mw = require_number(j, "limit_mw", where);
    l.restore_minutes = optional_number(j, "restore_min", 5.0);
    grid.lines.push_back(l);
  }

  if (!doc.contains("generators") || !doc.at("generators").is_array()) {
    throw ParseError("missing 'generators' array");
  }
  for (const auto& j : doc.at("generators")) {
    reject_unknown_keys(
        j, {"id", "bus", "pgn_mw", "ramp_mw_per_h", "crank_mw", "tch_min", "tcc_min", "black_start"},
        "generator entry");
    Generator g;
    g.id = require_int(j, "id", "generator entry");
    const std::string where = entity_name("generator", g.id);
    g.bus = require_int(j, "bus", where);
    g.rated_mw = require_number(j, "pgn_mw", where);
    g.ramp_mw_per_h = require_number(j, "ramp_mw_per_h", where);
    g.cranking_mw = optional_number(j, "crank_mw", 0.05 * g.rated_mw);
    g.hot_start_limit_min =
        optional_number(j, "tch_min", std::numeric_limits<double>::infinity());
    g.cold_start_limit_min = optional_number(j, "tcc_min", 0.0);
    if (j.contains("black_start")) g.black_start = j.at("black_start").get<bool>();
    grid.generators.push_back(g);
  }

  if (!doc.contains("loads") || !doc.at("loads").is_array()) {
    throw ParseError("missing 'loads' array");
  }
  for (const auto& j : doc.at("loads")) {
    reject_unknown_keys(j, {"bus", "p0_mw", "critical"}, "load entry");
    Load l;
    l.bus = require_int(j, "bus", "load entry");
    l.demand_mw = require_number(j, "p0_mw", "load at bus " + std::to_string(l.bus));
    if (j.contains("critical")) l.critical = j.at("critical").get<bool>();
    grid.loads.push_back(l);
  }

  return grid;
}

}  // namespace

GridCase parse_case(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("syntax error at byte ") + std::to_string(e.byte) + ": " +
                     e.what());
  }

  GridCase grid;
  try {
    grid = from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schema error: ") + e.what());
  }
  grid.finalize();

  const auto violations = validate(grid);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid case:";
    for (const auto& v : violations) msg << " [" << v.entity << ": " << v.message << "]";
    throw SemanticError(msg.str());
  }
  return grid;
}

std::string serialize_case(const GridCase& grid) {
  ordered_json doc;
  doc["mva_base"] = num(grid.mva_base);

  auto& buses = doc["buses"] = ordered_json::array();
  for (const auto& b : grid.buses) {
    ordered_json j;
    j["id"] = b.id;
    if (!b.name.empty()) j["name"] = b.name;
    buses.push_back(std::move(j));
  }

  auto& lines = doc["lines"] = ordered_json::array();
  for (const auto& l : grid.lines) {
    ordered_json j;
    j["id"] = l.id;
    j["from"] = l.from_bus;
    j["to"] = l.to_bus;
    j["x"] = num(l.reactance);
    j["limit_mw"] = num(l.flow_limit_mw);
    j["restore_min"] = num(l.restore_minutes);
    lines.push_back(std::move(j));
  }

  auto& gens = doc["generators"] = ordered_json::array();
  for (const auto& g : grid.generators) {
    ordered_json j;
    j["id"] = g.id;
    j["bus"] = g.bus;
    j["pgn_mw"] = num(g.rated_mw);
    j["ramp_mw_per_h"] = num(g.ramp_mw_per_h);
    j["crank_mw"] = num(g.cranking_mw);
    if (std::isfinite(g.hot_start_limit_min)) j["tch_min"] = num(g.hot_start_limit_min);
    if (g.cold_start_limit_min != 0.0) j["tcc_min"] = num(g.cold_start_limit_min);
    j["black_start"] = g.black_start;
    gens.push_back(std::move(j));
  }

  auto& loads = doc["loads"] = ordered_json::array();
  for (const auto& l : grid.loads) {
    ordered_json j;
    j["bus"] = l.bus;
    j["p0_mw"] = num(l.demand_mw);
    j["critical"] = l.critical;
    loads.push_back(std::move(j));
  }

  return doc.dump(2) + "\n";
}

bool cases_equal(const GridCase& a, const GridCase& b, double rel_tol) {
  if (rel_tol <= 0.0) return a == b;
  auto close = [rel_tol](double x, double y) {
    if (x == y) return true;
    const double scale = std::max(std::abs(x), std::abs(y));
    return std::abs(x - y) <= rel_tol * scale;
  };
  if (!close(a.mva_base, b.mva_base)) return false;
  if (a.buses != b.buses) return false;
  if (a.lines.size() != b.lines.size() || a.generators.size() != b.generators.size() ||
      a.loads.size() != b.loads.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.lines.size(); ++i) {
    const auto& x = a.lines[i];
    const auto& y = b.lines[i];
    if (x.id != y.id || x.from_bus != y.from_bus || x.to_bus != y.to_bus) return false;
    if (!close(x.reactance, y.reactance) || !close(x.flow_limit_mw, y.flow_limit_mw) ||
        !close(x.restore_minutes, y.restore_minutes)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.generators.size(); ++i) {
    const auto& x = a.generators[i];
    const auto& y = b.generators[i];
    if (x.id != y.id || x.bus != y.bus || x.black_start != y.black_start) return false;
    if (!close(x.rated_mw, y.rated_mw) || !close(x.ramp_mw_per_h, y.ramp_mw_per_h) ||
        !close(x.cranking_mw, y.cranking_mw)) {
      return false;
    }
    const bool hot_equal = (std::isinf(x.hot_start_limit_min) && std::isinf(y.hot_start_limit_min)) ||
                           close(x.hot_start_limit_min, y.hot_start_limit_min);
    if (!hot_equal || !close(x.cold_start_limit_min, y.cold_start_limit_min)) return false;
  }
  for (std::size_t i = 0; i < a.loads.size(); ++i) {
    const auto& x = a.loads[i];
    const auto& y = b.loads[i];
    if (x.bus != y.bus || x.critical != y.critical) return false;
    if (!close(x.demand_mw, y.demand_mw)) return false;
  }
  return true;
}

}  // namespace gridres
