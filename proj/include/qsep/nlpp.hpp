#pragma once

#include <vector>

#include "qsep/classifiers.hpp"

namespace qsep {

/// min h0(s) subject to h_j(s) <= 0, s in box.
struct NlppProblem {
  ScalarFn objective;
  std::vector<ScalarFn> constraints;
  MapE E;
  MapPsi psi;
  Box box;

  Index dim() const { return box.dim(); }
  void validate() const;
};

/// X = {s in box : h_j(s) <= 0}, with the box as a constraint.
SetSpec feasible_set(const NlppProblem& P);

/// Bundle: E(X) in X, X strongly E-invex, alpha s + E s feasible, every h_j
/// QSEP on X, h0 QSEP and strictly QSEP on X. Certified only when every
/// sub-report is; otherwise HypothesisFailed naming the first failing stage.
/// Throws std::invalid_argument when no sampled point is feasible.
CertReport certify_assumptions(const NlppProblem& P, const SamplingPlan& plan);

struct LocalResult {
  Point start;
  Point minimizer;
  double value = 0.0;
  /// Step of the last probe stencil, none of whose points improved.
  double local_ball_radius = 0.0;
  std::size_t evaluations = 0;
};

/// Compass search: probe +-step along each axis, accept strictly improving
/// feasible probes, halve the step after a failed sweep, stop once the step
/// drops below 1e-8 times the box diameter. Throws on an infeasible start.
LocalResult local_search(const NlppProblem& P, const Point& start, double step0);

/// First `count` feasible points of the Halton sequence (from index 1) mapped
/// into the box.
std::vector<Point> feasible_starts(const NlppProblem& P, int count);

struct NlppResult {
  Point minimizer;
  double value = 0.0;
  double feasibility_residual = 0.0;
  std::size_t starts_used = 0;
  double global_scan_best = 0.0;
  Point global_scan_argmin;
  /// Connected groups of scan points within tolerance of the scan best.
  std::size_t scan_clusters = 0;
  double global_gap = 0.0;
  double local_ball_radius = 0.0;
  std::vector<LocalResult> starts;
  /// Status Certified, or TheoremViolation when the assumptions certify but a
  /// start ends above the scan best. Sub-reports hold the assumption bundle.
  CertReport report;
};

NlppResult solve(const NlppProblem& P, const SamplingPlan& plan, int n_starts = 32);

/// Gap allowed between a local value and the scan best.
double global_tolerance(double value);

void to_json(nlohmann::json& j, const LocalResult& r);
void to_json(nlohmann::json& j, const NlppResult& r);

}  // namespace qsep
