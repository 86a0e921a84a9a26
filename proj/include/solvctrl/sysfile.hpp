#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "solvctrl/catalog.hpp"
#include "solvctrl/errors.hpp"

namespace solvctrl {

namespace sysfile {

struct Line {
  int number;
  std::vector<std::string> tokens;
};

inline std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    size_t hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    std::istringstream ls(raw);
    Line line{number, {}};
    std::string tok;
    while (ls >> tok) line.tokens.push_back(tok);
    if (!line.tokens.empty()) lines.push_back(line);
  }
  return lines;
}

inline double parse_double(const Line& line, const std::string& tok) {
  try {
    size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError(line.number, "expected a number, got '" + tok + "'");
  }
}

inline long parse_int(const Line& line, const std::string& tok) {
  try {
    size_t used = 0;
    long v = std::stol(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError(line.number, "expected an integer, got '" + tok + "'");
  }
}

struct Cursor {
  const std::vector<Line>& lines;
  size_t pos = 0;
  bool done() const { return pos >= lines.size(); }
  const Line& peek() const { return lines[pos]; }
  const Line& next() { return lines[pos++]; }
};

inline bool opens_block(const Line& line) {
  if (line.tokens.size() > 2 && line.tokens[1] == "{")
    throw ParseError(line.number,
                     "a block opens with '" + line.tokens[0] + " {' alone on its line");
  return line.tokens.size() == 2 && line.tokens[1] == "{";
}
inline bool closes_block(const Line& line) {
  return line.tokens.size() == 1 && line.tokens[0] == "}";
}

struct MatrixRows {
  std::vector<std::vector<double>> rows;
};

inline MatrixRows parse_matrix_block(Cursor& cur) {
  MatrixRows m;
  while (!cur.done() && !closes_block(cur.peek())) {
    const Line& line = cur.next();
    if (line.tokens[0] != "row")
      throw ParseError(line.number, "unknown key '" + line.tokens[0] + "' in a matrix block");
    std::vector<double> row;
    for (size_t i = 1; i < line.tokens.size(); ++i) row.push_back(parse_double(line, line.tokens[i]));
    if (row.empty()) throw ParseError(line.number, "empty matrix row");
    m.rows.push_back(row);
  }
  if (cur.done()) throw ParseError(cur.lines.back().number, "unterminated block");
  cur.next();  // consume '}'
  return m;
}

inline Mat to_matrix(const MatrixRows& m, int line_hint) {
  if (m.rows.empty()) throw ParseError(line_hint, "matrix block has no rows");
  size_t cols = m.rows[0].size();
  Mat out(static_cast<int>(m.rows.size()), static_cast<int>(cols));
  for (size_t r = 0; r < m.rows.size(); ++r) {
    if (m.rows[r].size() != cols) throw ParseError(line_hint, "ragged matrix rows");
    for (size_t c = 0; c < cols; ++c) out(static_cast<int>(r), static_cast<int>(c)) = m.rows[r][c];
  }
  return out;
}

}  // namespace sysfile

/// Parse a system-definition text into a SystemConfig. Strict: unknown keys
/// are rejected with their line number.
inline SystemConfig parse_system(const std::string& text) {
  using namespace sysfile;
  auto lines = tokenize(text);
  Cursor cur{lines};

  SystemConfig cfg;
  bool saw_algebra = false, saw_derivation = false, saw_controls = false;
  int dim = -1;
  std::vector<std::string> labels;
  std::vector<StructureTriple> triples;
  Mat derivation;
  std::vector<double> radii;
  std::vector<Vec> vectors;
  std::vector<Mat> dmats;
  bool any_dmat = false;

  while (!cur.done()) {
    const Line& line = cur.next();
    const std::string& key = line.tokens[0];
    if (key == "name") {
      if (line.tokens.size() != 2) throw ParseError(line.number, "name takes one token");
      cfg.name = line.tokens[1];
    } else if (key == "algebra" && opens_block(line)) {
      saw_algebra = true;
      while (!cur.done() && !closes_block(cur.peek())) {
        const Line& l = cur.next();
        const std::string& k = l.tokens[0];
        if (k == "dim") {
          if (l.tokens.size() != 2) throw ParseError(l.number, "dim takes one integer");
          dim = static_cast<int>(parse_int(l, l.tokens[1]));
          if (dim < 1 || dim > 8) throw ParseError(l.number, "dim must be in [1, 8]");
        } else if (k == "labels") {
          labels.assign(l.tokens.begin() + 1, l.tokens.end());
        } else if (k == "bracket") {
          if (l.tokens.size() != 5)
            throw ParseError(l.number, "bracket takes: i j k coefficient");
          triples.push_back({static_cast<int>(parse_int(l, l.tokens[1])),
                             static_cast<int>(parse_int(l, l.tokens[2])),
                             static_cast<int>(parse_int(l, l.tokens[3])),
                             parse_double(l, l.tokens[4])});
        } else {
          throw ParseError(l.number, "unknown key '" + k + "' in algebra block");
        }
      }
      if (cur.done()) throw ParseError(line.number, "unterminated algebra block");
      cur.next();
    } else if (key == "derivation" && opens_block(line)) {
      saw_derivation = true;
      derivation = to_matrix(parse_matrix_block(cur), line.number);
    } else if (key == "controls" && opens_block(line)) {
      saw_controls = true;
      while (!cur.done() && !closes_block(cur.peek())) {
        const Line& l = cur.next();
        const std::string& k = l.tokens[0];
        if (k == "sign") {
          if (l.tokens.size() != 2) throw ParseError(l.number, "sign takes +1 or -1");
          if (l.tokens[1] == "+1" || l.tokens[1] == "1")
            cfg.sign = +1.0;
          else if (l.tokens[1] == "-1")
            cfg.sign = -1.0;
          else
            throw ParseError(l.number, "sign takes +1 or -1");
        } else if (k == "range") {
          for (size_t i = 1; i < l.tokens.size(); ++i)
            radii.push_back(parse_double(l, l.tokens[i]));
          if (radii.empty()) throw ParseError(l.number, "range needs at least one radius");
        } else if (k == "control" && opens_block(l)) {
          Vec v;
          Mat dm;
          bool has_dm = false;
          while (!cur.done() && !closes_block(cur.peek())) {
            const Line& c = cur.next();
            if (c.tokens[0] == "vector") {
              v.resize(static_cast<int>(c.tokens.size() - 1));
              for (size_t i = 1; i < c.tokens.size(); ++i)
                v(static_cast<int>(i - 1)) = parse_double(c, c.tokens[i]);
            } else if (c.tokens[0] == "dmatrix" && opens_block(c)) {
              dm = to_matrix(parse_matrix_block(cur), c.number);
              has_dm = true;
            } else {
              throw ParseError(c.number, "unknown key '" + c.tokens[0] + "' in control block");
            }
          }
          if (cur.done()) throw ParseError(l.number, "unterminated control block");
          cur.next();
          if (v.size() == 0) throw ParseError(l.number, "control block needs a vector");
          vectors.push_back(v);
          dmats.push_back(has_dm ? dm : Mat());
          if (has_dm) any_dmat = true;
        } else {
          throw ParseError(l.number, "unknown key '" + k + "' in controls block");
        }
      }
      if (cur.done()) throw ParseError(line.number, "unterminated controls block");
      cur.next();
    } else if (key == "analysis" && opens_block(line)) {
      while (!cur.done() && !closes_block(cur.peek())) {
        const Line& l = cur.next();
        const std::string& k = l.tokens[0];
        auto one = [&]() -> const std::string& {
          if (l.tokens.size() != 2) throw ParseError(l.number, k + " takes one value");
          return l.tokens[1];
        };
        if (k == "rng_seed")
          cfg.analysis.rng_seed = static_cast<std::uint64_t>(std::stoull(one()));
        else if (k == "budget")
          cfg.analysis.budget = parse_int(l, one());
        else if (k == "horizon")
          cfg.analysis.horizon = parse_double(l, one());
        else if (k == "window")
          cfg.analysis.window = parse_double(l, one());
        else if (k == "ball")
          cfg.analysis.ball = parse_double(l, one());
        else if (k == "scan_laws")
          cfg.analysis.scan_laws = static_cast<int>(parse_int(l, one()));
        else if (k == "seed_time")
          cfg.analysis.seed_time = parse_double(l, one());
        else if (k == "max_pieces")
          cfg.analysis.max_pieces = static_cast<int>(parse_int(l, one()));
        else
          throw ParseError(l.number, "unknown key '" + k + "' in analysis block");
      }
      if (cur.done()) throw ParseError(line.number, "unterminated analysis block");
      cur.next();
    } else {
      throw ParseError(line.number, "unknown top-level key '" + key + "'");
    }
  }

  if (!saw_algebra) throw ParseError(1, "missing algebra block");
  if (!saw_derivation) throw ParseError(1, "missing derivation block");
  if (!saw_controls) throw ParseError(1, "missing controls block");
  if (dim < 0) throw ParseError(1, "algebra block missing dim");
  if (!labels.empty() && static_cast<int>(labels.size()) != dim)
    throw ParseError(1, "label count does not match dim");

  try {
    cfg.algebra = LieAlgebra::from_triples(dim, triples, labels);
  } catch (const std::invalid_argument& e) {
    throw ParseError(1, std::string("algebra block: ") + e.what());
  }
  if (derivation.rows() != dim || derivation.cols() != dim)
    throw ParseError(1, "derivation matrix must be dim x dim");
  cfg.derivation = derivation;
  if (vectors.empty()) throw ParseError(1, "controls block needs at least one control");
  if (radii.size() != vectors.size())
    throw ParseError(1, "range radius count must match the number of controls");
  for (const auto& v : vectors)
    if (v.size() != dim) throw ParseError(1, "control vector length must equal dim");
  cfg.controls = vectors;
  cfg.range = ControlRange(radii);
  if (any_dmat) {
    for (auto& m : dmats) {
      if (m.size() == 0) m = Mat::Zero(dim, dim);
      if (m.rows() != dim || m.cols() != dim)
        throw ParseError(1, "dmatrix must be dim x dim");
    }
    cfg.control_derivations = dmats;
  }
  return cfg;
}

inline SystemConfig load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_system(ss.str());
}

/// Either a catalog name or a path to a definition file.
inline SystemConfig resolve_system(const std::string& name_or_path) {
  if (auto cfg = catalog_lookup(name_or_path)) return *cfg;
  return load_system_file(name_or_path);
}

namespace sysfile {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace sysfile

/// Canonical text form: fixed key order, brackets with i < j sorted, all
/// floats at 17 significant digits. parse(serialize(parse(f))) is identical
/// to parse(f).
inline std::string serialize_system(const SystemConfig& cfg) {
  using sysfile::fmt_double;
  std::ostringstream out;
  if (!cfg.name.empty()) out << "name " << cfg.name << "\n";
  const int n = cfg.algebra.dim();
  out << "algebra {\n  dim " << n << "\n  labels";
  for (const auto& l : cfg.algebra.labels()) out << " " << l;
  out << "\n";
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double c = cfg.algebra.structure(i, j, k);
        if (c != 0.0)
          out << "  bracket " << (i + 1) << " " << (j + 1) << " " << (k + 1) << " "
              << fmt_double(c) << "\n";
      }
  out << "}\n";
  out << "derivation {\n";
  for (int r = 0; r < n; ++r) {
    out << "  row";
    for (int c = 0; c < n; ++c) out << " " << fmt_double(cfg.derivation(r, c));
    out << "\n";
  }
  out << "}\n";
  out << "controls {\n  sign " << (cfg.sign > 0 ? "+1" : "-1") << "\n  range";
  for (double r : cfg.range.radii()) out << " " << fmt_double(r);
  out << "\n";
  for (size_t j = 0; j < cfg.controls.size(); ++j) {
    out << "  control {\n    vector";
    for (int i = 0; i < cfg.controls[j].size(); ++i)
      out << " " << fmt_double(cfg.controls[j](i));
    out << "\n";
    if (!cfg.control_derivations.empty()) {
      out << "    dmatrix {\n";
      for (int r = 0; r < n; ++r) {
        out << "      row";
        for (int c = 0; c < n; ++c) out << " " << fmt_double(cfg.control_derivations[j](r, c));
        out << "\n";
      }
      out << "    }\n";
    }
    out << "  }\n";
  }
  out << "}\n";
  const AnalysisParams& a = cfg.analysis;
  out << "analysis {\n";
  out << "  rng_seed " << a.rng_seed << "\n";
  out << "  budget " << a.budget << "\n";
  out << "  horizon " << fmt_double(a.horizon) << "\n";
  out << "  window " << fmt_double(a.window) << "\n";
  out << "  ball " << fmt_double(a.ball) << "\n";
  out << "  scan_laws " << a.scan_laws << "\n";
  out << "  seed_time " << fmt_double(a.seed_time) << "\n";
  out << "  max_pieces " << a.max_pieces << "\n";
  out << "}\n";
  return out.str();
}

}  // namespace solvctrl
