#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "solvctrl/analysis.hpp"
#include "solvctrl/sysfile.hpp"

namespace solvctrl {

using Json = nlohmann::ordered_json;

inline Json to_json(const Vec& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline Json to_json(const ControlLaw& u) {
  Json a = Json::array();
  for (const auto& p : u.pieces()) a.push_back({{"duration", p.duration}, {"values", to_json(p.value)}});
  return a;
}

inline Json to_json(const SeedCertificate& c) {
  return Json{{"time", c.time},
              {"law", to_json(c.law)},
              {"det_gap", c.det_gap},
              {"x_star", to_json(c.x_star)},
              {"algebraic_residual", c.algebraic_residual},
              {"inversion_residual", c.inversion_residual},
              {"periodicity_residual", c.periodicity_residual}};
}

inline Json to_json(const AccessibilityReport& r) {
  Json pts = Json::array();
  for (size_t i = 0; i < r.points.size(); ++i)
    pts.push_back({{"point", to_json(r.points[i])},
                   {"l_rank", r.l_rank[i]},
                   {"l0_rank", r.l0_rank[i]}});
  return Json{{"state_dim", r.state_dim}, {"l_dim", r.l_dim},     {"l0_dim", r.l0_dim},
              {"larc", r.larc},           {"strong", r.strong},   {"points", pts}};
}

inline Json to_json(const SeedScan& s) {
  Json seeds = Json::array();
  for (const auto& c : s.seeds) seeds.push_back(to_json(c));
  Json conn = Json::array();
  for (const auto& row : s.connected) {
    Json r = Json::array();
    for (char c : row) r.push_back(static_cast<bool>(c));
    conn.push_back(r);
  }
  return Json{{"seeds", seeds},
              {"failures", s.failures},
              {"connected", conn},
              {"all_connected", s.all_connected},
              {"note", s.note}};
}

inline Json to_json(const ControlSetEstimate& e) {
  Json trans = Json::array();
  for (const auto& row : e.transitions) {
    Json r = Json::array();
    for (char c : row) r.push_back(static_cast<bool>(c));
    trans.push_back(r);
  }
  Json out{{"label", e.unique_consistent ? "UNIQUE-CONSISTENT" : "UNVERIFIED"},
           {"inlier_count", e.inliers.size()},
           {"forward_samples", e.forward_samples},
           {"backward_samples", e.backward_samples},
           {"transitions", trans}};
  if (!e.inliers.empty()) {
    out["bbox_min"] = to_json(e.bbox_min);
    out["bbox_max"] = to_json(e.bbox_max);
  }
  return out;
}

inline Json to_json(const FiberCoverage& f) {
  Json grid = Json::array();
  for (size_t i = 0; i < f.grid.size(); ++i)
    grid.push_back({{"v", to_json(f.grid[i])},
                    {"verified_both", static_cast<bool>(f.verified_both[i])},
                    {"note", f.notes[i]}});
  return Json{{"fraction", f.fraction}, {"grid", grid}};
}

inline Json to_json(const PipelineReport& r) {
  Json guards = Json::array();
  for (const auto& g : r.guards)
    guards.push_back({{"name", g.name}, {"pass", g.pass}, {"detail", g.detail}});
  Json out{{"guards", guards},
           {"completed", r.completed},
           {"stopped_at", r.stopped_at},
           {"dim_g0", r.dim_g0},
           {"dim_n", r.dim_n},
           {"dim_n0", r.dim_n0},
           {"n0_compact", r.compactness.verdict == CompactnessVerdict::kCompact},
           {"n0_note", r.compactness.note}};
  if (r.access) out["accessibility"] = to_json(*r.access);
  if (r.scan) out["seed_scan"] = to_json(*r.scan);
  if (r.estimate) out["control_set"] = to_json(*r.estimate);
  if (r.fiber) out["fiber_closure"] = to_json(*r.fiber);
  return out;
}

inline Json report_envelope(const std::string& command, const SystemConfig& cfg) {
  return Json{{"schema", "solvctrl-report/1"},
              {"command", command},
              {"system", cfg.name.empty() ? "(unnamed)" : cfg.name},
              {"rng_seed", cfg.analysis.rng_seed}};
}

// ---------------------------------------------------------------------------
// CSV / plot-data export
// ---------------------------------------------------------------------------

namespace csv {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace csv

inline std::string cloud_to_csv(const ReachCloud& cloud) {
  std::string out = "t";
  int dim = static_cast<int>(cloud.base.size());
  for (int i = 1; i <= dim; ++i) out += ",x_" + std::to_string(i);
  out += ",law_id\n";
  for (const auto& s : cloud.samples) {
    out += csv::fmt(s.time);
    for (int i = 0; i < dim; ++i) out += "," + csv::fmt(s.point(i));
    out += "," + std::to_string(s.law_id) + "\n";
  }
  return out;
}

/// Sampled trajectory export: t, x_1..x_dim.
template <typename System>
std::string trajectory_to_csv(const System& sys, const Vec& x0, const ControlLaw& u,
                              int samples_per_piece = 16) {
  std::string out = "t";
  for (int i = 1; i <= sys.dim(); ++i) out += ",x_" + std::to_string(i);
  out += "\n";
  double t = 0.0;
  Vec x = x0;
  out += csv::fmt(0.0);
  for (int i = 0; i < x.size(); ++i) out += "," + csv::fmt(x(i));
  out += "\n";
  for (const auto& p : u.pieces()) {
    for (int s = 1; s <= samples_per_piece; ++s) {
      double dt = p.duration / samples_per_piece;
      ControlLaw step = ControlLaw::constant(dt, p.value);
      x = sys.solve(x, step, SolveOptions{});
      t += dt;
      out += csv::fmt(t);
      for (int i = 0; i < x.size(); ++i) out += "," + csv::fmt(x(i));
      out += "\n";
    }
  }
  return out;
}

/// Gnuplot-ready projection of a cloud CSV (already parsed rows) onto two
/// axes, plus the matching script text.
struct PlotExport {
  std::string data;    // ax ay columns
  std::string script;  // gnuplot commands
};

inline PlotExport export_plot(const ReachCloud& forward, const ReachCloud& backward,
                              const std::vector<Vec>& inliers, int ax, int ay,
                              const std::string& data_path) {
  PlotExport pe;
  auto emit = [&](const std::vector<ReachSample>& samples, const char* tag) {
    pe.data += std::string("# ") + tag + "\n";
    for (const auto& s : samples)
      pe.data += csv::fmt(s.point(ax)) + " " + csv::fmt(s.point(ay)) + "\n";
    pe.data += "\n\n";
  };
  emit(forward.samples, "forward");
  emit(backward.samples, "backward");
  pe.data += "# inliers\n";
  for (const auto& p : inliers)
    pe.data += csv::fmt(p(ax)) + " " + csv::fmt(p(ay)) + "\n";
  pe.data += "\n\n";

  pe.script =
      "set key outside\n"
      "set xlabel 'x_" + std::to_string(ax + 1) + "'\n"
      "set ylabel 'x_" + std::to_string(ay + 1) + "'\n"
      "plot '" + data_path + "' index 0 w points pt 7 ps 0.3 title 'forward', \\\n"
      "     '" + data_path + "' index 1 w points pt 7 ps 0.3 title 'backward', \\\n"
      "     '" + data_path + "' index 2 w points pt 7 ps 0.5 title 'inliers'\n";
  return pe;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

}  // namespace solvctrl
