// solvctrl: analyze linear control systems on solvable Lie groups, build
// periodic-seed certificates, and sample control-set estimates.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "solvctrl/analysis.hpp"
#include "solvctrl/report.hpp"
#include "solvctrl/sysfile.hpp"

using namespace solvctrl;

namespace {

std::uint64_t env_seed_default() {
  if (const char* s = std::getenv("SOLVCTRL_RNG_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
    }
  }
  return 0;
}

ControlLaw parse_law_spec(const std::string& spec, int channels) {
  // "duration:v1,v2;duration:v1,v2"
  ControlLaw u;
  std::istringstream in(spec);
  std::string piece;
  while (std::getline(in, piece, ';')) {
    size_t colon = piece.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("law piece needs 'duration:v1,v2,...'");
    double duration = std::stod(piece.substr(0, colon));
    Vec v = Vec::Zero(channels);
    std::istringstream vs(piece.substr(colon + 1));
    std::string tok;
    int j = 0;
    while (std::getline(vs, tok, ',')) {
      if (j >= channels) throw std::invalid_argument("law piece has too many values");
      v(j++) = std::stod(tok);
    }
    if (j != channels) throw std::invalid_argument("law piece has too few values");
    u.append(duration, v);
  }
  if (u.empty()) throw std::invalid_argument("empty law spec");
  return u;
}

Vec parse_point(const std::string& spec, int dim) {
  Vec v = Vec::Zero(dim);
  std::istringstream in(spec);
  std::string tok;
  int i = 0;
  while (std::getline(in, tok, ',')) {
    if (i >= dim) throw std::invalid_argument("point has too many coordinates");
    v(i++) = std::stod(tok);
  }
  if (i != dim) throw std::invalid_argument("point has too few coordinates");
  return v;
}

void apply_seed_override(SystemConfig& cfg, std::uint64_t flag_seed, bool flag_given) {
  if (flag_given)
    cfg.analysis.rng_seed = flag_seed;
  else if (std::uint64_t env = env_seed_default())
    cfg.analysis.rng_seed = env;
}

int cmd_analyze(const std::string& system, const std::string& json_path,
                std::uint64_t flag_seed, bool seed_given) {
  SystemConfig cfg = resolve_system(system);
  apply_seed_override(cfg, flag_seed, seed_given);

  Json rep = report_envelope("analyze", cfg);
  rep["algebra"] = {{"dim", cfg.algebra.dim()},
                    {"jacobi_residual", cfg.algebra.jacobi_residual()},
                    {"nilpotency_class", cfg.algebra.nilpotency_class()},
                    {"solvable", cfg.algebra.is_solvable()}};
  std::cout << "system: " << (cfg.name.empty() ? system : cfg.name) << "\n";
  std::cout << "algebra: dim " << cfg.algebra.dim()
            << (cfg.algebra.is_nilpotent()
                    ? " nilpotent (class " + std::to_string(cfg.algebra.nilpotency_class()) + ")"
                    : cfg.algebra.is_solvable() ? " solvable" : " NOT solvable")
            << "\n";
  if (!cfg.algebra.is_solvable())
    throw HypothesisError("not-solvable", "the algebra is not solvable");

  LeibnizReport lr = leibniz_check(cfg.derivation, cfg.algebra);
  if (!lr.pass)
    throw HypothesisError("not-a-derivation",
                          "drift Leibniz residual " + std::to_string(lr.max_residual));
  std::cout << "drift: Leibniz residual " << lr.max_residual << "\n";
  rep["drift_leibniz_residual"] = lr.max_residual;

  if (cfg.control_derivations.empty()) {
    Derivation d(cfg.algebra, cfg.derivation);
    KernelSplit ks = kernel_split(cfg.algebra, d);
    JordanParts jp = jordan_decomposition(cfg.algebra, d);
    CompactnessReport comp = n0_compactness_criterion(ks.n0);
    std::cout << "kernel split: dim g0 = " << ks.g0.dim() << ", dim n = " << ks.n.dim()
              << ", dim n0 = " << ks.n0.dim() << "\n";
    std::cout << "lemma check: dim(n + g0) = " << ks.dim_n_plus_g0
              << (ks.lemma_sum_ok ? " (= dim g)" : " (MISMATCH)") << "\n";
    std::cout << "jordan: |H| = " << jp.hyperbolic.norm() << ", |E| = " << jp.elliptic.norm()
              << ", |N| = " << jp.nilpotent.norm() << "\n";
    std::cout << "N0 compactness: "
              << (comp.verdict == CompactnessVerdict::kCompact ? "COMPACT"
                                                               : "NOT_COMPACT_IN_MODEL")
              << " (" << comp.note << ")\n";
    rep["kernel_split"] = {{"dim_g0", ks.g0.dim()},
                           {"dim_n", ks.n.dim()},
                           {"dim_n0", ks.n0.dim()},
                           {"lemma_sum_ok", ks.lemma_sum_ok},
                           {"derived_g0_in_n0", ks.derived_g0_in_n0}};
    rep["jordan"] = {{"hyperbolic_norm", jp.hyperbolic.norm()},
                     {"elliptic_norm", jp.elliptic.norm()},
                     {"nilpotent_norm", jp.nilpotent.norm()}};
    rep["n0_compact"] = comp.verdict == CompactnessVerdict::kCompact;
    rep["n0_note"] = comp.note;
    if (comp.verdict != CompactnessVerdict::kCompact)
      throw HypothesisError("n0-not-trivial", comp.note);
  }

  ProductSystem ps = build_product(cfg);
  AccessibilityReport acc = larc_check(ps, {Vec::Zero(ps.dim())});
  std::cout << "accessibility: L rank " << acc.l_rank[0] << "/" << ps.dim()
            << (acc.larc ? " (LARC holds)" : " (LARC FAILS)") << ", L0 rank " << acc.l0_rank[0]
            << (acc.strong ? " (strongly accessible)" : "") << "\n";
  rep["accessibility"] = to_json(acc);

  if (!json_path.empty()) write_file(json_path, rep.dump(2) + "\n");
  return 0;
}

int cmd_seed(const std::string& system, double time_s, const std::string& law_spec, int scan_n,
             const std::string& json_path, std::uint64_t flag_seed, bool seed_given) {
  SystemConfig cfg = resolve_system(system);
  apply_seed_override(cfg, flag_seed, seed_given);
  ProductSystem ps = build_product(cfg);
  const SigmaASystem& sys = ps.inner();
  double s = time_s > 0 ? time_s : cfg.analysis.seed_time;

  Json rep = report_envelope("seed", cfg);
  if (scan_n > 0) {
    SeedScan scan = seed_family_scan(sys, s, scan_n, cfg.analysis.rng_seed, cfg.analysis);
    std::cout << "scan: " << scan.seeds.size() << " certificates, " << scan.failures.size()
              << " rejected laws\n";
    for (size_t i = 0; i < scan.seeds.size(); ++i)
      std::cout << "  seed " << i << ": |x*| = " << scan.seeds[i].x_star.norm()
                << ", det gap = " << scan.seeds[i].det_gap
                << ", periodicity residual = " << scan.seeds[i].periodicity_residual << "\n";
    std::cout << "pairwise connected: " << (scan.all_connected ? "yes" : "no") << "\n";
    if (!scan.note.empty()) std::cout << "note: " << scan.note << "\n";
    rep["scan"] = to_json(scan);
    if (scan.seeds.empty())
      throw HypothesisError("det-gap-too-small",
                            scan.note.empty() ? "no law admitted a seed" : scan.note);
  } else {
    ControlLaw u = law_spec.empty() ? ControlLaw::zero(s, sys.channels())
                                    : parse_law_spec(law_spec, sys.channels());
    SeedCertificate cert = seed_finder(sys, u);
    std::cout << "seed: x* = [";
    for (int i = 0; i < cert.x_star.size(); ++i)
      std::cout << (i ? ", " : "") << cert.x_star(i);
    std::cout << "]\n  det gap = " << cert.det_gap
              << "\n  algebraic residual = " << cert.algebraic_residual
              << "\n  periodicity residual = " << cert.periodicity_residual << "\n";
    rep["certificate"] = to_json(cert);
  }
  if (!json_path.empty()) write_file(json_path, rep.dump(2) + "\n");
  return 0;
}

int cmd_reach(const std::string& system, const std::string& from_spec, long budget,
              double horizon, const std::string& out_prefix, std::uint64_t flag_seed,
              bool seed_given) {
  SystemConfig cfg = resolve_system(system);
  apply_seed_override(cfg, flag_seed, seed_given);
  ProductSystem ps = build_product(cfg);
  if (budget >= 0) cfg.analysis.budget = budget;
  if (horizon > 0) cfg.analysis.horizon = horizon;

  SeedCertificate cert = seed_finder(
      ps.inner(), ControlLaw::zero(cfg.analysis.seed_time, ps.inner().channels()));
  Vec base = (from_spec == "seed") ? ps.join(Vec::Zero(ps.v_dim()), cert.x_star)
                                   : parse_point(from_spec, ps.dim());

  ReachCloud fwd = reach_sample(ps, base, ReachDirection::kForward, cfg.analysis.budget,
                                cfg.analysis.horizon, cfg.analysis.rng_seed,
                                cfg.analysis.max_pieces);
  ReachCloud bwd = reach_sample(ps, base, ReachDirection::kBackward, cfg.analysis.budget,
                                cfg.analysis.horizon, cfg.analysis.rng_seed + 5,
                                cfg.analysis.max_pieces);
  write_file(out_prefix + "_forward.csv", cloud_to_csv(fwd));
  write_file(out_prefix + "_backward.csv", cloud_to_csv(bwd));

  AnalysisParams params = cfg.analysis;
  ControlSetEstimate est = control_set_estimate(ps, {cert}, {base}, params);
  {
    std::string inl = "t";
    for (int i = 1; i <= ps.dim(); ++i) inl += ",x_" + std::to_string(i);
    inl += ",law_id\n";
    for (const auto& p : est.inliers) {
      inl += csv::fmt(0.0);
      for (int i = 0; i < p.size(); ++i) inl += "," + csv::fmt(p(i));
      inl += ",0\n";
    }
    write_file(out_prefix + "_inliers.csv", inl);
  }
  Json rep = report_envelope("reach", cfg);
  rep["base"] = to_json(base);
  rep["budget"] = cfg.analysis.budget;
  rep["horizon"] = cfg.analysis.horizon;
  rep["estimate"] = to_json(est);
  write_file(out_prefix + "_estimate.json", rep.dump(2) + "\n");

  std::cout << "clouds: " << fwd.samples.size() << " forward, " << bwd.samples.size()
            << " backward samples\n";
  std::cout << "estimate: " << est.inliers.size() << " inliers ("
            << (est.unique_consistent ? "UNIQUE-CONSISTENT" : "UNVERIFIED") << ")\n";
  std::cout << "wrote " << out_prefix << "_{forward,backward,inliers}.csv and " << out_prefix
            << "_estimate.json\n";
  return 0;
}

struct VerifyFailure {
  std::string suite;
  std::string detail;
};

void verify_one(const SystemConfig& base_cfg, std::vector<VerifyFailure>& failures) {
  SystemConfig cfg = base_cfg;
  auto check = [&](const std::string& suite, bool ok, const std::string& detail) {
    std::cout << "  [" << (ok ? "ok" : "FAIL") << "] " << suite
              << (detail.empty() ? "" : ": " + detail) << "\n";
    if (!ok) failures.push_back({suite, detail});
  };

  check("jacobi-identity", cfg.algebra.jacobi_residual() <= 1e-10,
        "residual " + std::to_string(cfg.algebra.jacobi_residual()));
  LeibnizReport lr = leibniz_check(cfg.derivation, cfg.algebra);
  check("drift-leibniz", lr.pass, "residual " + std::to_string(lr.max_residual));

  if (cfg.control_derivations.empty()) {
    Derivation d(cfg.algebra, cfg.derivation);
    KernelSplit ks = kernel_split(cfg.algebra, d);
    check("lemma-n-plus-g0", ks.lemma_sum_ok,
          "dim(n + g0) = " + std::to_string(ks.dim_n_plus_g0));
    check("derived-g0-in-n0", ks.derived_g0_in_n0, "");
    CompactnessReport comp = n0_compactness_criterion(ks.n0);
    if (comp.verdict != CompactnessVerdict::kCompact)
      throw HypothesisError("n0-not-trivial", comp.note);
  }

  ProductSystem ps = build_product(cfg);
  const SigmaASystem& sys = ps.inner();
  Rng rng(cfg.analysis.rng_seed + 17);

  double max_cert = 0.0, max_translation = 0.0, max_assoc = 0.0;
  for (int t = 0; t < 20; ++t) {
    ControlLaw u = detail::sample_law(sys.range(), rng, 1.5, 3, false);
    GroupAutomorphism phi = flow_B(sys, u);
    max_cert = std::max(max_cert, phi.certificate_residual());
    Vec x(sys.dim());
    for (int i = 0; i < sys.dim(); ++i) x(i) = rng.uniform(-1, 1);
    Vec composed = solve_A(sys, x, u);
    Vec direct = integrate_direct(sys, x, u);
    max_translation =
        std::max(max_translation, (composed - direct).norm() / (1.0 + direct.norm()));
    Vec y(sys.dim()), z(sys.dim());
    for (int i = 0; i < sys.dim(); ++i) {
      y(i) = rng.uniform(-1, 1);
      z(i) = rng.uniform(-1, 1);
    }
    const LieAlgebra& g = sys.algebra();
    Vec lhs = bch_product(g, bch_product(g, x, y), z);
    Vec rhs = bch_product(g, x, bch_product(g, y, z));
    max_assoc = std::max(max_assoc, (lhs - rhs).norm() / (1.0 + lhs.norm()));
  }
  check("automorphism-certificate", max_cert <= 1e-9,
        "max residual " + std::to_string(max_cert));
  check("translation-identity", max_translation <= 1e-6,
        "max residual " + std::to_string(max_translation));
  check("bch-associativity", max_assoc <= 1e-10, "max residual " + std::to_string(max_assoc));

  try {
    SeedCertificate cert =
        seed_finder(sys, ControlLaw::zero(cfg.analysis.seed_time, sys.channels()));
    check("trivial-seed", cert.x_star.norm() == 0.0 && cert.periodicity_residual == 0.0,
          "|x*| = " + std::to_string(cert.x_star.norm()));
  } catch (const HypothesisError& e) {
    check("trivial-seed", false, e.what());
  }

  ReachCloud a = reach_sample(ps, ps.join(Vec::Zero(ps.v_dim()), Vec::Zero(sys.dim())),
                              ReachDirection::kForward, 50, 1.0, cfg.analysis.rng_seed);
  ReachCloud b = reach_sample(ps, ps.join(Vec::Zero(ps.v_dim()), Vec::Zero(sys.dim())),
                              ReachDirection::kForward, 50, 1.0, cfg.analysis.rng_seed);
  bool identical = a.samples.size() == b.samples.size();
  for (size_t i = 0; identical && i < a.samples.size(); ++i)
    identical = (a.samples[i].point - b.samples[i].point).norm() == 0.0;
  check("reach-determinism", identical, "");
}

int cmd_verify(const std::string& system, bool all_examples) {
  std::vector<VerifyFailure> failures;
  if (all_examples) {
    for (const auto& name : catalog_names()) {
      std::cout << name << ":\n";
      verify_one(*catalog_lookup(name), failures);
    }
  } else {
    SystemConfig cfg = resolve_system(system);
    std::cout << (cfg.name.empty() ? system : cfg.name) << ":\n";
    verify_one(cfg, failures);
  }
  if (!failures.empty()) {
    std::cerr << failures.size() << " invariant suite(s) failed; first: " << failures[0].suite
              << "\n";
    return 3;
  }
  std::cout << "all invariant suites passed\n";
  return 0;
}

int cmd_export_plots(const std::string& clouds_prefix, const std::string& out_prefix, int ax,
                     int ay) {
  auto read_cloud = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    ReachCloud cloud;
    std::string line;
    std::getline(in, line);  // header
    int dim = -1;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string tok;
      std::vector<double> vals;
      while (std::getline(ls, tok, ',')) vals.push_back(std::stod(tok));
      if (vals.size() < 3) continue;
      if (dim < 0) dim = static_cast<int>(vals.size()) - 2;
      ReachSample s;
      s.time = vals[0];
      s.point = Vec(dim);
      for (int i = 0; i < dim; ++i) s.point(i) = vals[1 + i];
      s.law_id = static_cast<long>(vals.back());
      cloud.samples.push_back(s);
    }
    if (!cloud.samples.empty()) cloud.base = cloud.samples[0].point;
    return cloud;
  };

  ReachCloud fwd = read_cloud(clouds_prefix + "_forward.csv");
  ReachCloud bwd = read_cloud(clouds_prefix + "_backward.csv");
  ReachCloud inl = read_cloud(clouds_prefix + "_inliers.csv");
  std::vector<Vec> inliers;
  for (const auto& s : inl.samples) inliers.push_back(s.point);

  if (fwd.samples.empty()) std::cerr << "warning: empty forward cloud, plot will be empty\n";
  int dim = fwd.samples.empty() ? 0 : static_cast<int>(fwd.samples[0].point.size());
  if (dim > 0 && (ax < 0 || ax >= dim || ay < 0 || ay >= dim))
    throw std::invalid_argument("axis index out of range");

  PlotExport pe = (dim > 0) ? export_plot(fwd, bwd, inliers, ax, ay, out_prefix + "_plot.dat")
                            : PlotExport{"", "# nothing to plot\n"};
  write_file(out_prefix + "_plot.dat", pe.data);
  write_file(out_prefix + "_plot.gp", pe.script);
  std::cout << "wrote " << out_prefix << "_plot.dat and " << out_prefix << "_plot.gp\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"control sets of linear control systems on solvable Lie groups"};
  app.require_subcommand(1);

  std::string system, json_path, law_spec, from_spec = "seed";
  std::string clouds_prefix, out_prefix;
  double time_s = 0.0, horizon = -1.0;
  long budget = -1;
  int scan_n = 0, ax = 0, ay = 1;
  std::uint64_t rng_seed = 0;
  bool all_examples = false;

  auto add_seed_flag = [&](CLI::App* cmd) { return cmd->add_option("--rng-seed", rng_seed); };

  auto* analyze = app.add_subcommand("analyze", "structural checks and accessibility");
  analyze->add_option("system", system)->required();
  analyze->add_option("--json", json_path);
  auto* analyze_seed = add_seed_flag(analyze);

  auto* seed = app.add_subcommand("seed", "periodic-point seed certificates");
  seed->add_option("system", system)->required();
  seed->add_option("--time", time_s);
  seed->add_option("--law", law_spec);
  seed->add_option("--scan", scan_n);
  seed->add_option("--json", json_path);
  auto* seed_seed = add_seed_flag(seed);

  auto* reach = app.add_subcommand("reach", "reachability clouds and control-set estimate");
  reach->add_option("system", system)->required();
  reach->add_option("--from", from_spec);
  reach->add_option("--budget", budget);
  reach->add_option("--horizon", horizon);
  reach->add_option("--out", out_prefix)->required();
  auto* reach_seed = add_seed_flag(reach);

  auto* verify = app.add_subcommand("verify", "invariant suites (exit 0 iff all pass)");
  verify->add_option("system", system);
  verify->add_flag("--all-examples", all_examples);

  auto* plots = app.add_subcommand("export-plots", "gnuplot data + script from reach outputs");
  plots->add_option("--clouds", clouds_prefix)->required();
  plots->add_option("--out", out_prefix)->required();
  plots->add_option("--ax", ax);
  plots->add_option("--ay", ay);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (analyze->parsed())
      return cmd_analyze(system, json_path, rng_seed, analyze_seed->count() > 0);
    if (seed->parsed())
      return cmd_seed(system, time_s, law_spec, scan_n, json_path, rng_seed,
                      seed_seed->count() > 0);
    if (reach->parsed())
      return cmd_reach(system, from_spec, budget, horizon, out_prefix, rng_seed,
                       reach_seed->count() > 0);
    if (verify->parsed()) {
      if (!all_examples && system.empty()) {
        std::cerr << "verify needs a system or --all-examples\n";
        return 2;
      }
      return cmd_verify(system, all_examples);
    }
    if (plots->parsed()) return cmd_export_plots(clouds_prefix, out_prefix, ax, ay);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis failed [" << e.name() << "]: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure [" << e.name() << "] residual=" << e.residual() << ": "
              << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
