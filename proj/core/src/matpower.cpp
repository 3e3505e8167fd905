#include <cctype>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gridres/case_model.hpp"

namespace gridres {

namespace {

struct Section {
  std::string name;
  std::vector<std::vector<double>> rows;
  double scalar = 0.0;
  bool is_matrix = false;
};

std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_comment = false;
  for (char c : text) {
    if (c == '%') in_comment = true;
    if (c == '\n') in_comment = false;
    out.push_back(in_comment ? ' ' : c);
  }
  return out;
}

// Collects every `mpc.<name> = ...;` assignment. Matrices are rows of
// numbers separated by `;`, scalars a single number. String assignments
// (e.g. version) are recorded with no rows.
std::map<std::string, Section> scan_sections(const std::string& text) {
  std::map<std::string, Section> sections;
  std::size_t pos = 0;
  const std::string tag = "mpc.";
  while ((pos = text.find(tag, pos)) != std::string::npos) {
    std::size_t name_start = pos + tag.size();
    std::size_t p = name_start;
    while (p < text.size() && (std::isalnum(static_cast<unsigned char>(text[p])) || text[p] == '_')) ++p;
    std::string name = text.substr(name_start, p - name_start);
    while (p < text.size() && std::isspace(static_cast<unsigned char>(text[p]))) ++p;
    if (p >= text.size() || text[p] != '=') {
      pos = p;
      continue;
    }
    ++p;
    while (p < text.size() && std::isspace(static_cast<unsigned char>(text[p]))) ++p;

    Section sec;
    sec.name = name;
    if (p < text.size() && text[p] == '[') {
      sec.is_matrix = true;
      std::size_t end = text.find(']', p);
      if (end == std::string::npos) {
        throw ParseError("unterminated matrix for mpc." + name);
      }
      std::string body = text.substr(p + 1, end - p - 1);
      std::string row_text;
      std::istringstream rows(body);
      while (std::getline(rows, row_text, ';')) {
        std::istringstream nums(row_text);
        std::vector<double> row;
        double v = 0.0;
        while (nums >> v) row.push_back(v);
        if (!nums.eof()) {
          throw ParseError("non-numeric token in mpc." + name + " row " +
                           std::to_string(sec.rows.size() + 1));
        }
        if (!row.empty()) sec.rows.push_back(std::move(row));
      }
      p = end + 1;
    } else if (p < text.size() && text[p] == '\'') {
      std::size_t end = text.find('\'', p + 1);
      if (end == std::string::npos) throw ParseError("unterminated string for mpc." + name);
      p = end + 1;
    } else {
      std::istringstream num(text.substr(p));
      if (!(num >> sec.scalar)) {
        throw ParseError("cannot read value of mpc." + name);
      }
      while (p < text.size() && text[p] != ';' && text[p] != '\n') ++p;
    }
    sections[name] = std::move(sec);
    pos = p;
  }
  return sections;
}

}  // namespace

GridCase import_matpower(std::string_view text) {
  const std::string clean = strip_comments(text);
  const auto sections = scan_sections(clean);

  static const char* kSupported[] = {"version", "baseMVA", "bus", "gen", "branch"};
  for (const auto& [name, sec] : sections) {
    bool ok = false;
    for (const char* s : kSupported) {
      if (name == s) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ParseError("unsupported construct: mpc." + name);
  }

  auto section = [&sections](const char* name) -> const Section& {
    auto it = sections.find(name);
    if (it == sections.end()) {
      throw ParseError(std::string("missing section: mpc.") + name);
    }
    return it->second;
  };

  GridCase grid;
  grid.mva_base = sections.count("baseMVA") ? sections.at("baseMVA").scalar : 100.0;

  const Section& bus = section("bus");
  int reference_bus = -1;
  for (std::size_t r = 0; r < bus.rows.size(); ++r) {
    const auto& row = bus.rows[r];
    if (row.size() < 3) {
      throw ParseError("bus row " + std::to_string(r + 1) + " needs at least 3 columns");
    }
    Bus b;
    b.id = static_cast<int>(row[0]);
    grid.buses.push_back(b);
    if (static_cast<int>(row[1]) == 3) reference_bus = b.id;
    const double pd = row[2];
    if (pd < 0.0) {
      throw ParseError("negative demand at bus " + std::to_string(b.id) + " unsupported");
    }
    if (pd > 0.0) grid.loads.push_back({b.id, pd, false});
  }
  if (reference_bus < 0) {
    throw SemanticError("bus table: no type-3 reference bus to mark the black-start unit");
  }

  const Section& branch = section("branch");
  for (std::size_t r = 0; r < branch.rows.size(); ++r) {
    const auto& row = branch.rows[r];
    if (row.size() < 6) {
      throw ParseError("branch row " + std::to_string(r + 1) + " needs at least 6 columns");
    }
    Line l;
    l.id = static_cast<int>(r + 1);
    l.from_bus = static_cast<int>(row[0]);
    l.to_bus = static_cast<int>(row[1]);
    l.reactance = row[3];
    l.flow_limit_mw = row[5];
    if (!(l.flow_limit_mw > 0.0)) {
      throw SemanticError("branch row " + std::to_string(r + 1) +
                          ": rateA must be > 0 (unlimited branches unsupported)");
    }
    grid.lines.push_back(l);
  }

  const Section& gen = section("gen");
  for (std::size_t r = 0; r < gen.rows.size(); ++r) {
    const auto& row = gen.rows[r];
    if (row.size() < 10) {
      throw ParseError("gen row " + std::to_string(r + 1) + " needs at least 10 columns");
    }
    Generator g;
    g.bus = static_cast<int>(row[0]);
    g.id = g.bus;
    g.rated_mw = row[8];
    // ramp_10 column when present, Table-style 0.6*Pmax otherwise.
    g.ramp_mw_per_h = row.size() >= 18 ? row[17] * 6.0 : 0.6 * g.rated_mw;
    g.cranking_mw = 0.05 * g.rated_mw;
    g.black_start = (g.bus == reference_bus);
    for (const auto& other : grid.generators) {
      if (other.bus == g.bus) {
        throw SemanticError("gen table: multiple generators at bus " + std::to_string(g.bus) +
                            " unsupported");
      }
    }
    grid.generators.push_back(g);
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

}  // namespace gridres
