#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "solvctrl/catalog.hpp"
#include "solvctrl/dynamics.hpp"
#include "solvctrl/polyfield.hpp"

namespace solvctrl {

// ---------------------------------------------------------------------------
// Accessibility (LARC / strong accessibility) by bracket saturation of the
// polynomial vector fields
// ---------------------------------------------------------------------------

struct AccessibilityReport {
  std::vector<Vec> points;
  std::vector<int> l_rank;   // rank of L evaluated at each point
  std::vector<int> l0_rank;  // rank of the ideal L0 at each point
  int state_dim = 0;
  int l_dim = 0;   // dimension of the saturated system algebra
  int l0_dim = 0;
  bool larc = false;    // L(x) full rank at every queried point
  bool strong = false;  // L0(x) full rank at every queried point
};

namespace detail {

inline PolyVF drift_field(const SigmaASystem& sys) {
  return linear_field(sys.dim(), sys.dim(), sys.drift());
}

inline PolyVF control_field(const SigmaASystem& sys, int j) {
  PolyVF f = invariant_poly_field(sys.algebra(), sys.control_vectors()[j], sys.dim(), sys.dim());
  Mat dj = sys.sign_convention() * sys.control_derivations()[j];
  if (dj.norm() > 0.0) f = add(f, linear_field(sys.dim(), sys.dim(), dj));
  return f;
}

inline PolyVF drift_field(const ProductSystem& sys) {
  const int n = sys.dim();
  PolyVF f = PolyVF::zero(n, n);
  if (sys.v_dim() > 0) f = add(f, linear_field(n, n, sys.v_drift()));
  f = add(f, linear_field(n, n, sys.inner().drift(), sys.v_dim(), sys.v_dim()));
  return f;
}

inline PolyVF control_field(const ProductSystem& sys, int j) {
  const int n = sys.dim();
  PolyVF f = PolyVF::zero(n, n);
  if (sys.v_dim() > 0) f = add(f, constant_field(n, n, sys.v_controls()[j]));
  f = add(f, invariant_poly_field(sys.inner().algebra(), sys.inner().control_vectors()[j], n, n,
                                  sys.v_dim(), sys.v_dim()));
  Mat dj = sys.inner().sign_convention() * sys.inner().control_derivations()[j];
  if (dj.norm() > 0.0) f = add(f, linear_field(n, n, dj, sys.v_dim(), sys.v_dim()));
  return f;
}

/// Saturate {f0, f1..fm} under the vector-field bracket; the ideal span
/// starts from {f1..fm} and is closed under bracketing with everything.
template <typename System>
AccessibilityReport larc_impl(const System& sys, const std::vector<Vec>& points) {
  constexpr int kMaxFields = 256;
  constexpr int kMaxDegree = 16;
  AccessibilityReport rep;
  rep.state_dim = sys.dim();

  std::vector<PolyVF> gens;
  gens.push_back(drift_field(sys));
  for (int j = 0; j < sys.channels(); ++j) gens.push_back(control_field(sys, j));

  PolySpan span;
  for (const auto& f : gens) span.add(f);
  // Full system algebra L.
  for (size_t i = 0; i < span.fields().size(); ++i) {
    for (size_t j = 0; j < i; ++j) {
      PolyVF br = lie_bracket(span.fields()[i], span.fields()[j]);
      int deg = 0;
      for (const auto& c : br.comp) deg = std::max(deg, poly::degree(c));
      if (deg > kMaxDegree)
        throw NumericError("larc-saturation-overflow", "bracket degree exceeded the cap");
      span.add(br);
      if (span.dim() > kMaxFields)
        throw NumericError("larc-saturation-overflow", "system algebra did not stabilize");
    }
  }
  rep.l_dim = span.dim();

  // Ideal L0 generated by the control fields: close the control span under
  // bracketing with every element of L.
  PolySpan ideal;
  for (int j = 0; j < sys.channels(); ++j) ideal.add(gens[j + 1]);
  for (size_t i = 0; i < ideal.fields().size(); ++i) {
    for (const auto& f : span.fields()) {
      PolyVF br = lie_bracket(f, ideal.fields()[i]);
      ideal.add(br);
      if (ideal.dim() > kMaxFields)
        throw NumericError("larc-saturation-overflow", "ideal did not stabilize");
    }
  }
  rep.l0_dim = ideal.dim();

  rep.larc = true;
  rep.strong = true;
  for (const Vec& x : points) {
    Mat evals(sys.dim(), span.dim());
    for (int c = 0; c < span.dim(); ++c) evals.col(c) = evaluate(span.fields()[c], x);
    int r = linalg::rank(evals);
    Mat evals0(sys.dim(), ideal.dim());
    for (int c = 0; c < ideal.dim(); ++c) evals0.col(c) = evaluate(ideal.fields()[c], x);
    int r0 = linalg::rank(evals0);
    rep.points.push_back(x);
    rep.l_rank.push_back(r);
    rep.l0_rank.push_back(r0);
    if (r < sys.dim()) rep.larc = false;
    if (r0 < sys.dim()) rep.strong = false;
  }
  return rep;
}

}  // namespace detail

inline AccessibilityReport larc_check(const SigmaASystem& sys, const std::vector<Vec>& points) {
  return detail::larc_impl(sys, points);
}

inline AccessibilityReport larc_check(const ProductSystem& sys, const std::vector<Vec>& points) {
  return detail::larc_impl(sys, points);
}

// ---------------------------------------------------------------------------
// Seed certificates (periodic points in the interior of their own orbit)
// ---------------------------------------------------------------------------

struct SeedCertificate {
  double time = 0.0;
  ControlLaw law;
  double det_gap = 0.0;
  Vec x_star;
  double algebraic_residual = 0.0;    // |x* - a * Phi x*|
  double inversion_residual = 0.0;    // |f_Phi(x*) - a|
  double periodicity_residual = 0.0;  // |phi^A(S, x*, u) - x*| by re-integration
};

/// Produce the fixed point x* = phi^A(S, x*, u) by inverting x -> x*Phi(x)^{-1}
/// at a = phi^A(S, 0, u). Verified twice: algebraically and by independent
/// re-integration.
inline SeedCertificate seed_finder(const SigmaASystem& sys, const ControlLaw& u) {
  if (u.empty()) throw std::invalid_argument("seed_finder needs a law of positive duration");
  SeedCertificate cert;
  cert.time = u.total_time();
  cert.law = u;

  GroupAutomorphism phi = flow_B(sys, u);
  cert.det_gap = detail::det_gap(phi.matrix());
  if (cert.det_gap <= tol::det_gap(phi.matrix().norm()))
    throw HypothesisError("det-gap-too-small",
                          "|det(Phi - 1)| = " + std::to_string(cert.det_gap) +
                              ": the fixed-point map is not invertible at this law");

  Vec a = solve_A_from_identity(sys, u);
  cert.x_star = f_phi_invert(sys.algebra(), phi, a);

  Vec back = bch_product(sys.algebra(), a, Vec(phi.matrix() * cert.x_star));
  cert.algebraic_residual = (cert.x_star - back).norm();
  cert.inversion_residual = (f_phi_apply(sys.algebra(), phi, cert.x_star) - a).norm();
  Vec reint = integrate_direct(sys, cert.x_star, u);
  cert.periodicity_residual = (reint - cert.x_star).norm();
  if (cert.periodicity_residual > tol::seed * (1.0 + cert.x_star.norm()))
    throw NumericError("periodicity-residual-exceeded",
                       "re-integrated fixed point drifted", cert.periodicity_residual);
  return cert;
}

// ---------------------------------------------------------------------------
// Random law sampling
// ---------------------------------------------------------------------------

namespace detail {

/// Random piecewise-constant law: piece count <= max_pieces, durations
/// summing to `total` when exact_time, otherwise <= horizon; values uniform
/// in amplitude * Omega.
inline ControlLaw sample_law(const ControlRange& range, Rng& rng, double total, int max_pieces,
                             bool exact_time, double amplitude = 1.0) {
  int m = range.channels();
  int pieces = 1 + static_cast<int>(rng.below(std::max(1, max_pieces)));
  double t = exact_time ? total : total * (0.2 + 0.8 * rng.uniform());
  // Uniform simplex split via sorted uniforms.
  std::vector<double> cuts{0.0, t};
  for (int i = 1; i < pieces; ++i) cuts.push_back(t * rng.uniform());
  std::sort(cuts.begin(), cuts.end());
  ControlLaw u;
  for (int i = 0; i < pieces; ++i) {
    double d = cuts[i + 1] - cuts[i];
    if (d < 1e-9) continue;
    Vec v(m);
    for (int j = 0; j < m; ++j)
      v(j) = amplitude * range.radii()[j] * rng.uniform(-1.0, 1.0);
    u.append(d, v);
  }
  if (u.empty()) u.append(t > 0 ? t : total, Vec::Zero(m));
  return u;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Reach clouds
// ---------------------------------------------------------------------------

enum class ReachDirection { kForward, kBackward };

struct ReachSample {
  Vec point;
  double time;
  long law_id;  // -1 marks the base point
};

struct ReachCloud {
  Vec base;
  ReachDirection direction = ReachDirection::kForward;
  std::uint64_t rng_seed = 0;
  std::vector<ReachSample> samples;  // base point first
};

/// Endpoint cloud of `budget` random laws. Backward clouds integrate the
/// time-reversed field: their points steer *into* the base point.
/// Deterministic: law index i draws from the derived stream (seed, i).
template <typename System>
ReachCloud reach_sample(const System& sys, const Vec& x0, ReachDirection direction, long budget,
                        double horizon, std::uint64_t rng_seed, int max_pieces = 4) {
  ReachCloud cloud;
  cloud.base = x0;
  cloud.direction = direction;
  cloud.rng_seed = rng_seed;
  cloud.samples.push_back({x0, 0.0, -1});
  System rev = sys.reversed();
  const System& isys = (direction == ReachDirection::kForward) ? sys : rev;
  SolveOptions fast{true};
  for (long i = 0; i < budget; ++i) {
    Rng rng = Rng::stream(rng_seed, static_cast<std::uint64_t>(i));
    ControlLaw u = detail::sample_law(sys.range(), rng, horizon, max_pieces, false);
    Vec end = isys.solve(x0, u, fast);
    cloud.samples.push_back({end, u.total_time(), i});
  }
  return cloud;
}

// ---------------------------------------------------------------------------
// Shooting search for steering laws
// ---------------------------------------------------------------------------

struct SteeringResult {
  bool found = false;
  ControlLaw law;
  double achieved_distance = 0.0;
  long evaluations = 0;
};

/// Random shooting plus coordinate-descent refinement on piece durations and
/// values. NotFound after budget exhaustion is evidence, not proof.
template <typename System>
SteeringResult cross_reachability(const System& sys, const Vec& from, const Vec& to, double ball,
                                  long budget, double horizon, std::uint64_t rng_seed,
                                  const std::vector<ControlLaw>& pilots = {}) {
  SteeringResult res;
  res.achieved_distance = (from - to).norm();
  if (res.achieved_distance <= ball) {
    res.found = true;  // empty law
    return res;
  }
  if (budget <= 0) return res;

  Rng rng(rng_seed);
  SolveOptions fast{true};
  long used = 0;
  auto dist = [&](const ControlLaw& u) {
    ++used;
    return (sys.solve(from, u, fast) - to).norm();
  };

  ControlLaw best;
  double best_d = std::numeric_limits<double>::infinity();
  auto consider = [&](const ControlLaw& u) {
    double d = dist(u);
    if (d < best_d) {
      best_d = d;
      best = u;
      return true;
    }
    return false;
  };

  for (const auto& p : pilots)
    if (!p.empty() && used < budget) consider(p);

  long shots = std::min<long>(budget / 4, 256);
  for (long i = 0; i < shots && used < budget; ++i)
    consider(detail::sample_law(sys.range(), rng, horizon, 4, false));

  // Coordinate descent with annealed step and random restarts.
  double step = 0.25;
  int stale_sweeps = 0;
  while (used < budget && best_d > ball * 0.8) {
    bool improved = false;
    const auto pieces = best.pieces();
    const int m = sys.range().channels();
    for (size_t pi = 0; pi < pieces.size() && used < budget; ++pi) {
      for (int j = -1; j < m && used < budget; ++j) {
        for (double sgn : {+1.0, -1.0}) {
          ControlLaw cand;
          for (size_t q = 0; q < pieces.size(); ++q) {
            double d = pieces[q].duration;
            Vec v = pieces[q].value;
            if (q == pi) {
              if (j < 0)
                d = std::max(0.01, std::min(horizon, d + sgn * step * horizon * 0.25));
              else
                v(j) = std::clamp(v(j) + sgn * step * sys.range().radii()[j],
                                  -sys.range().radii()[j], sys.range().radii()[j]);
            }
            cand.append(d, v);
          }
          if (cand.total_time() > horizon * 1.5) continue;
          if (consider(cand)) {
            improved = true;
            break;
          }
          if (used >= budget) break;
        }
      }
    }
    if (!improved) {
      step *= 0.5;
      if (++stale_sweeps > 12 || step < 1e-4) {
        stale_sweeps = 0;
        step = 0.25;
        for (long i = 0; i < 32 && used < budget; ++i)
          consider(detail::sample_law(sys.range(), rng, horizon, 4, false));
      }
    }
  }

  res.evaluations = used;
  if (best_d <= ball) {
    // Strict re-verification of the candidate before certifying.
    double strict_d = (sys.solve(from, best, SolveOptions{}) - to).norm();
    if (strict_d <= ball) {
      res.found = true;
      res.law = best;
      res.achieved_distance = strict_d;
      return res;
    }
  }
  res.achieved_distance = best_d;
  return res;
}

// ---------------------------------------------------------------------------
// Seed-family scan + consistency
// ---------------------------------------------------------------------------

struct SeedScan {
  std::vector<SeedCertificate> seeds;  // index 0 is the zero law when it passes
  std::vector<std::string> failures;
  std::vector<std::vector<char>> connected;  // ordered-pair steering verified
  bool all_connected = false;
  std::string note;
};

/// Scan n_laws piecewise-constant laws of duration exactly S anchored at the
/// zero law, drawn in a shrinking neighborhood of 0 with the det-gap filter
/// as the membership proxy; certify each seed and cross-connect all pairs.
inline SeedScan seed_family_scan(const SigmaASystem& sys, double s, int n_laws,
                                 std::uint64_t rng_seed, const AnalysisParams& params = {}) {
  SeedScan scan;
  for (int i = 0; i < n_laws; ++i) {
    Rng rng = Rng::stream(rng_seed, 1000 + static_cast<std::uint64_t>(i));
    bool made = false;
    for (double amplitude : {0.5, 0.25, 0.125, 0.0625}) {
      ControlLaw u = (i == 0) ? ControlLaw::zero(s, sys.channels())
                              : detail::sample_law(sys.range(), rng, s, params.max_pieces,
                                                   true, amplitude);
      try {
        scan.seeds.push_back(seed_finder(sys, u));
        made = true;
        break;
      } catch (const HypothesisError& e) {
        if (i == 0) {
          scan.failures.push_back("law 0: " + std::string(e.what()));
          break;  // zero law is the anchor; no rescaling can fix it
        }
        continue;  // shrink and retry
      } catch (const NumericError& e) {
        scan.failures.push_back("law " + std::to_string(i) + ": " + e.what());
        break;
      }
    }
    if (!made && i != 0 && scan.failures.size() < static_cast<size_t>(n_laws))
      scan.failures.push_back("law " + std::to_string(i) +
                              ": det-gap filter rejected every amplitude");
  }
  if (scan.seeds.empty()) {
    scan.note = "no admissible law passed the det-gap filter (resonant horizon?)";
    return scan;
  }

  const int k = static_cast<int>(scan.seeds.size());
  scan.connected.assign(k, std::vector<char>(k, 0));
  scan.all_connected = true;
  std::vector<std::vector<ControlLaw>> laws(k, std::vector<ControlLaw>(k));
  for (int i = 0; i < k; ++i) scan.connected[i][i] = 1;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      std::vector<ControlLaw> pilots;
      // Transitive pilot: through an already-connected hub.
      for (int h = 0; h < k; ++h)
        if (h != i && h != j && scan.connected[i][h] && scan.connected[h][j])
          pilots.push_back(ControlLaw::concatenate(laws[i][h], laws[h][j]));
      pilots.push_back(scan.seeds[j].law);
      SteeringResult sr = cross_reachability(sys, scan.seeds[i].x_star, scan.seeds[j].x_star,
                                             params.ball, params.budget, params.horizon,
                                             rng_seed + 7919 * (i * k + j + 1), pilots);
      scan.connected[i][j] = sr.found ? 1 : 0;
      if (sr.found)
        laws[i][j] = sr.law;
      else
        scan.all_connected = false;
    }
  scan.note = scan.all_connected
                  ? "all seeds mutually reachable: consistent with the density of "
                    "interior-seed laws (a finite sample can corroborate, not falsify)"
                  : "some seed pairs unverified within budget (evidence, not disconnection)";
  return scan;
}

// ---------------------------------------------------------------------------
// Control-set estimation
// ---------------------------------------------------------------------------

struct ControlSetEstimate {
  std::vector<SeedCertificate> seeds;
  std::vector<Vec> inliers;  // forward-cloud points matched by backward points
  Vec bbox_min, bbox_max;
  std::vector<std::vector<char>> transitions;  // seed pairwise steering table
  bool unique_consistent = false;
  long forward_samples = 0, backward_samples = 0;
};

namespace detail {

/// Nearest-neighbor existence query via a uniform grid at radius r.
class BallMatcher {
 public:
  BallMatcher(const std::vector<Vec>& pts, double r) : r_(r), pts_(pts) {
    for (size_t i = 0; i < pts.size(); ++i) cells_[key(pts[i])].push_back(i);
  }
  bool any_within(const Vec& q) const {
    std::vector<long> k = key(q);
    std::vector<long> probe(k.size());
    return scan(q, k, probe, 0);
  }

 private:
  std::vector<long> key(const Vec& p) const {
    std::vector<long> k(p.size());
    for (int i = 0; i < p.size(); ++i) k[i] = static_cast<long>(std::floor(p(i) / r_));
    return k;
  }
  bool scan(const Vec& q, const std::vector<long>& base, std::vector<long>& probe,
            size_t depth) const {
    if (depth == probe.size()) {
      auto it = cells_.find(probe);
      if (it == cells_.end()) return false;
      for (size_t i : it->second)
        if ((pts_[i] - q).norm() <= r_) return true;
      return false;
    }
    for (long d = -1; d <= 1; ++d) {
      probe[depth] = base[depth] + d;
      if (scan(q, base, probe, depth + 1)) return true;
    }
    return false;
  }

  double r_;
  const std::vector<Vec>& pts_;
  std::map<std::vector<long>, std::vector<size_t>> cells_;
};

}  // namespace detail

/// Forward/backward clouds from every seed; a forward point is an inlier
/// when some backward point sits within r_match (so it approximately
/// returns to a seed). Labeled UNIQUE-CONSISTENT when every ordered seed
/// pair admits a verified steering law.
template <typename System>
ControlSetEstimate control_set_estimate(const System& sys,
                                        const std::vector<SeedCertificate>& seeds,
                                        const std::vector<Vec>& seed_states,
                                        const AnalysisParams& params) {
  if (seed_states.empty()) throw std::invalid_argument("need at least one seed");
  ControlSetEstimate est;
  est.seeds = seeds;

  long per_seed = params.budget / std::max<size_t>(1, seed_states.size());
  std::vector<Vec> fwd, bwd;
  for (size_t i = 0; i < seed_states.size(); ++i) {
    ReachCloud f = reach_sample(sys, seed_states[i], ReachDirection::kForward, per_seed,
                                params.horizon, params.rng_seed + 11 * i, params.max_pieces);
    ReachCloud b = reach_sample(sys, seed_states[i], ReachDirection::kBackward, per_seed,
                                params.horizon, params.rng_seed + 11 * i + 5, params.max_pieces);
    for (const auto& s : f.samples) fwd.push_back(s.point);
    for (const auto& s : b.samples) bwd.push_back(s.point);
  }
  est.forward_samples = static_cast<long>(fwd.size());
  est.backward_samples = static_cast<long>(bwd.size());

  detail::BallMatcher matcher(bwd, params.ball);
  for (const auto& p : fwd)
    if (matcher.any_within(p)) est.inliers.push_back(p);

  if (!est.inliers.empty()) {
    est.bbox_min = est.inliers[0];
    est.bbox_max = est.inliers[0];
    for (const auto& p : est.inliers) {
      est.bbox_min = est.bbox_min.cwiseMin(p);
      est.bbox_max = est.bbox_max.cwiseMax(p);
    }
  }

  const int k = static_cast<int>(seed_states.size());
  est.transitions.assign(k, std::vector<char>(k, 0));
  est.unique_consistent = true;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (i == j) {
        est.transitions[i][j] = 1;
        continue;
      }
      SteeringResult sr =
          cross_reachability(sys, seed_states[i], seed_states[j], params.ball, params.budget,
                             params.horizon, params.rng_seed + 37 * (i * k + j + 1));
      est.transitions[i][j] = sr.found ? 1 : 0;
      if (!sr.found) est.unique_consistent = false;
    }
  return est;
}

// ---------------------------------------------------------------------------
// Fiber closure over the V factor
// ---------------------------------------------------------------------------

struct FiberCoverage {
  std::vector<Vec> grid;
  std::vector<char> verified_both;
  std::vector<std::string> notes;
  double fraction = 0.0;
};

/// For each grid point v: verify (0, x*) -> (v, x*) and back. For v in
/// ker A both directions recenter to searches from (0, x*) via the kernel
/// translation of the product solution.
inline FiberCoverage fiber_closure_check(const ProductSystem& ps, const Vec& x_star,
                                         const std::vector<Vec>& grid,
                                         const AnalysisParams& params) {
  FiberCoverage cov;
  cov.grid = grid;
  Vec base = ps.join(Vec::Zero(ps.v_dim()), x_star);
  int ok = 0;
  for (size_t gi = 0; gi < grid.size(); ++gi) {
    const Vec& v = grid[gi];
    bool in_kernel = ps.v_dim() == 0 || (ps.v_drift() * v).norm() <= 1e-12 * (1.0 + v.norm());
    bool both = false;
    std::string note;
    if (v.norm() == 0.0) {
      both = true;
      note = "trivial";
    } else if (in_kernel) {
      // (0,x*) -> (v,x*), and (v,x*) -> (0,x*) is the shifted search
      // (0,x*) -> (-v,x*).
      SteeringResult go =
          cross_reachability(ps, base, ps.join(v, x_star), params.ball, params.budget,
                             params.horizon, params.rng_seed + 101 * gi + 1);
      SteeringResult back =
          cross_reachability(ps, base, ps.join(Vec(-v), x_star), params.ball, params.budget,
                             params.horizon, params.rng_seed + 101 * gi + 2);
      both = go.found && back.found;
      note = std::string("kernel-recentred: go=") + (go.found ? "ok" : "unverified") +
             " back=" + (back.found ? "ok" : "unverified");
    } else {
      SteeringResult go =
          cross_reachability(ps, base, ps.join(v, x_star), params.ball, params.budget,
                             params.horizon, params.rng_seed + 101 * gi + 1);
      SteeringResult back =
          cross_reachability(ps, ps.join(v, x_star), base, params.ball, params.budget,
                             params.horizon, params.rng_seed + 101 * gi + 2);
      both = go.found && back.found;
      note = std::string("direct: go=") + (go.found ? "ok" : "unverified") +
             " back=" + (back.found ? "ok" : "unverified");
    }
    cov.verified_both.push_back(both ? 1 : 0);
    cov.notes.push_back(note);
    if (both) ++ok;
  }
  cov.fraction = grid.empty() ? 0.0 : static_cast<double>(ok) / grid.size();
  return cov;
}

// ---------------------------------------------------------------------------
// End-to-end pipeline
// ---------------------------------------------------------------------------

struct GuardResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct PipelineReport {
  std::vector<GuardResult> guards;
  bool completed = false;
  std::string stopped_at;

  int dim_g0 = 0, dim_n = 0, dim_n0 = 0;
  CompactnessReport compactness{CompactnessVerdict::kNotCompactInModel, ""};
  std::optional<AccessibilityReport> access;
  std::optional<SeedScan> scan;
  std::optional<ControlSetEstimate> estimate;
  std::optional<FiberCoverage> fiber;
};

/// kernel_split -> compactness -> semidirect reduction -> LARC ->
/// seed scan -> control-set estimate -> fiber closure. Guard failures stop
/// the pipeline and name the hypothesis; a LARC failure only warns.
inline PipelineReport full_pipeline(const SystemConfig& cfg) {
  PipelineReport rep;
  const AnalysisParams& params = cfg.analysis;

  auto stop = [&](const std::string& name, const std::string& detail) {
    rep.guards.push_back({name, false, detail});
    rep.stopped_at = name;
    return rep;
  };

  if (!cfg.algebra.is_solvable()) return stop("solvable", "the algebra is not solvable");
  rep.guards.push_back({"solvable", true, ""});

  if (cfg.control_derivations.empty()) {
    Derivation d(cfg.algebra, cfg.derivation);
    KernelSplit ks = kernel_split(cfg.algebra, d);
    rep.dim_g0 = ks.g0.dim();
    rep.dim_n = ks.n.dim();
    rep.dim_n0 = ks.n0.dim();
    rep.compactness = n0_compactness_criterion(ks.n0);
    if (rep.compactness.verdict != CompactnessVerdict::kCompact)
      return stop("n0-compact", rep.compactness.note);
    rep.guards.push_back({"n0-compact", true, rep.compactness.note});
  }
  ProductSystem ps = build_product(cfg);

  double d0_det = std::abs(ps.inner().drift().determinant());
  if (d0_det <= 1e-12) return stop("d0-invertible", "det D0 = " + std::to_string(d0_det));
  rep.guards.push_back({"d0-invertible", true, "det D0 = " + std::to_string(d0_det)});
  rep.guards.push_back({"a-nilpotent", true, "verified at construction"});

  // LARC at the origin and a few sampled points.
  std::vector<Vec> pts{Vec::Zero(ps.dim())};
  Rng rng(params.rng_seed);
  for (int i = 0; i < 3; ++i) {
    Vec p(ps.dim());
    for (int j = 0; j < ps.dim(); ++j) p(j) = rng.uniform(-0.5, 0.5);
    pts.push_back(p);
  }
  rep.access = larc_check(ps, pts);
  rep.guards.push_back({"larc", rep.access->larc,
                        rep.access->larc ? "" : "rank deficient: seeds are still computed, but "
                                                "the interior claim is not certified"});

  rep.scan = seed_family_scan(ps.inner(), params.seed_time, params.scan_laws, params.rng_seed,
                              params);
  if (rep.scan->seeds.empty()) {
    rep.stopped_at = "seed-scan";
    return rep;
  }

  std::vector<Vec> seed_states;
  for (const auto& s : rep.scan->seeds)
    seed_states.push_back(ps.join(Vec::Zero(ps.v_dim()), s.x_star));
  rep.estimate = control_set_estimate(ps, rep.scan->seeds, seed_states, params);

  if (ps.v_dim() > 0) {
    std::vector<Vec> grid;
    if (ps.v_dim() == 1) {
      for (int i = -2; i <= 2; ++i) grid.push_back(Vec::Constant(1, params.window * i / 2.0));
    } else {
      grid.push_back(Vec::Zero(ps.v_dim()));
      for (int j = 0; j < ps.v_dim(); ++j) {
        grid.push_back(params.window * Vec::Unit(ps.v_dim(), j));
        grid.push_back(-params.window * Vec::Unit(ps.v_dim(), j));
      }
    }
    rep.fiber = fiber_closure_check(ps, rep.scan->seeds[0].x_star, grid, params);
  }

  rep.completed = true;
  return rep;
}

}  // namespace solvctrl
