#pragma once

#include <string>

#include "qsep/domain.hpp"
#include "qsep/report.hpp"
#include "qsep/sampling.hpp"

namespace qsep {

/// Whether the alpha quantifier ranges over the plan's values or is pinned to
/// 0 (the E-invex / E-preinvex forms).
enum class AlphaMode { Plan, ZeroOnly };

/// p in S: inside the box (when it is a constraint) and g_k(p) <= tolerance.
bool is_member(const SetSpec& S, const Point& p, double rel_tol = default_tolerance());

/// The strong E-invex path point alpha t + E t + lambda Psi(alpha s + E s, alpha t + E t).
Point strong_path_point(const MapE& E, const MapPsi& psi, const Point& s, const Point& t,
                        double alpha, double lambda);

/// S is strongly E-invex w.r.t. Psi on the sampled quadruples. A witness
/// records the combination point's membership slack as lhs (rhs = 0).
CertReport check_strongly_e_invex(const SetSpec& S, const MapE& E, const MapPsi& psi,
                                  const SamplingPlan& plan, AlphaMode mode = AlphaMode::Plan,
                                  double rel_tol = default_tolerance());

/// The alpha = 0 form: S is E-invex w.r.t. Psi.
CertReport check_e_invex(const SetSpec& S, const MapE& E, const MapPsi& psi,
                         const SamplingPlan& plan, double rel_tol = default_tolerance());

/// E(S) is contained in S on the sampled points (witness s = t, lhs = slack of E s).
CertReport check_e_image_subset(const SetSpec& S, const MapE& E, const SamplingPlan& plan,
                                double rel_tol = default_tolerance());

/// Box-wise intersection with concatenated predicates. Disjoint boxes yield
/// the explicit empty set. The result is a window only if both inputs are.
SetSpec intersect(const SetSpec& a, const SetSpec& b);

/// K_r = {s in universe : h(s) <= r}.
SetSpec sublevel_set(const ScalarFn& h, double r, const SetSpec& universe);

/// Recomputes the membership slack a set-level witness reports.
double recompute_set_witness(const std::string& property, const SetSpec& S, const MapE& E,
                             const MapPsi& psi, const Witness& w);

}  // namespace qsep
