#pragma once

#include <optional>
#include <string>

#include "solvctrl/dynamics.hpp"

namespace solvctrl {

/// Sampling / certification knobs carried by a system definition.
struct AnalysisParams {
  std::uint64_t rng_seed = 20240808;
  long budget = 20000;       // trajectory evaluations per search
  double horizon = 2.0;      // max law duration for sampling
  double window = 2.0;       // V-window half-width for fiber grids
  double ball = tol::r_match;
  int scan_laws = 10;
  double seed_time = 1.0;
  int max_pieces = 4;
};

/// A full system definition: solvable algebra, drift derivation, control
/// vectors Y_j (or direct Z_j with explicit control derivations), box range.
struct SystemConfig {
  std::string name;
  LieAlgebra algebra;
  Mat derivation;
  std::vector<Vec> controls;
  std::vector<Mat> control_derivations;  // empty, or one per channel (direct SigmaA form)
  ControlRange range;
  double sign = +1.0;
  AnalysisParams analysis;
};

inline SemidirectLCS to_semidirect(const SystemConfig& cfg) {
  if (!cfg.control_derivations.empty())
    throw std::invalid_argument(
        "a system with explicit control derivations is already in SigmaA form");
  return SemidirectLCS{cfg.algebra, cfg.derivation, cfg.controls, cfg.range};
}

/// The product-system form of the definition; systems given directly in
/// SigmaA form get a zero-dimensional V factor.
inline ProductSystem build_product(const SystemConfig& cfg) {
  if (!cfg.control_derivations.empty()) {
    SigmaASystem inner(cfg.algebra, cfg.derivation, cfg.control_derivations, cfg.controls,
                       cfg.range, cfg.sign);
    return ProductSystem(0, Mat::Zero(0, 0),
                         std::vector<Vec>(cfg.controls.size(), Vec::Zero(0)), std::move(inner));
  }
  return build_semidirect(to_semidirect(cfg)).system;
}

// ---------------------------------------------------------------------------
// Built-in example catalog
// ---------------------------------------------------------------------------

namespace catalog {

inline SystemConfig heisenberg3() {
  SystemConfig cfg;
  cfg.name = "heisenberg3";
  cfg.algebra = LieAlgebra::from_triples(3, {{1, 2, 3, 1.0}});
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 1, 1, 2;
  cfg.derivation = d;
  cfg.controls = {Vec::Unit(3, 0), Vec::Unit(3, 1)};
  cfg.range = ControlRange({1.0, 1.0});
  cfg.analysis.ball = 0.05;
  cfg.analysis.budget = 100000;
  cfg.analysis.horizon = 2.0;
  cfg.analysis.seed_time = 1.0;
  return cfg;
}

inline SystemConfig filiform4() {
  SystemConfig cfg;
  cfg.name = "filiform4";
  cfg.algebra = LieAlgebra::from_triples(4, {{1, 2, 3, 1.0}, {1, 3, 4, 1.0}});
  Mat d = Mat::Zero(4, 4);
  d.diagonal() << 1, 2, 3, 4;
  cfg.derivation = d;
  cfg.controls = {Vec::Unit(4, 0), Vec::Unit(4, 1)};
  cfg.range = ControlRange({1.0, 1.0});
  cfg.analysis.ball = 0.05;
  cfg.analysis.budget = 100000;
  return cfg;
}

inline SystemConfig euclid_like() {
  SystemConfig cfg;
  cfg.name = "euclid-like";
  cfg.algebra =
      LieAlgebra::from_triples(3, {{1, 2, 3, 1.0}, {1, 3, 2, -1.0}}, {"T", "X", "Y"});
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 0, 1, 1;
  cfg.derivation = d;
  cfg.controls = {Vec::Unit(3, 0), Vec::Unit(3, 1)};
  cfg.range = ControlRange({1.0, 1.0});
  cfg.analysis.ball = 0.1;
  cfg.analysis.horizon = 6.0;
  cfg.analysis.budget = 40000;
  cfg.analysis.window = 2.0;
  return cfg;
}

/// Abelian R^n linear system: rotation blocks (plus a unit diagonal entry
/// when n is odd), one control vector per axis.
inline SystemConfig abelian_n(int n) {
  if (n < 1 || n > 8) throw std::invalid_argument("abelian-n supports 1 <= n <= 8");
  SystemConfig cfg;
  cfg.name = "abelian-" + std::to_string(n);
  cfg.algebra = LieAlgebra::from_triples(n, {});
  Mat d = Mat::Zero(n, n);
  int i = 0;
  for (; i + 1 < n; i += 2) {
    d(i, i + 1) = -1.0;
    d(i + 1, i) = 1.0;
  }
  if (i < n) d(i, i) = 1.0;
  cfg.derivation = d;
  std::vector<double> radii;
  for (int j = 0; j < n; ++j) {
    cfg.controls.push_back(Vec::Unit(n, j));
    radii.push_back(1.0);
  }
  cfg.range = ControlRange(radii);
  return cfg;
}

}  // namespace catalog

inline std::vector<std::string> catalog_names() {
  return {"heisenberg3", "filiform4", "euclid-like", "abelian-1", "abelian-2"};
}

inline std::optional<SystemConfig> catalog_lookup(const std::string& name) {
  if (name == "heisenberg3") return catalog::heisenberg3();
  if (name == "filiform4") return catalog::filiform4();
  if (name == "euclid-like") return catalog::euclid_like();
  if (name.rfind("abelian-", 0) == 0) {
    try {
      int n = std::stoi(name.substr(8));
      if (n >= 1 && n <= 8) return catalog::abelian_n(n);
    } catch (const std::exception&) {
    }
  }
  return std::nullopt;
}

}  // namespace solvctrl
