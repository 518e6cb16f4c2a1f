#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qsep/domain.hpp"
#include "qsep/report.hpp"
#include "qsep/sampling.hpp"
#include "qsep/sets.hpp"

namespace qsep {

/// The combination point of a function check left S. Every function-class
/// definition presupposes S is strongly E-invex, so this is an error rather
/// than a skipped sample.
class CombinationOutsideSet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite-difference stencil cannot be placed inside the box.
class GradientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No v-bar with E v-bar = target could be recovered (E not onto as sampled,
/// or not separable and no inverse supplied).
class ConditionAError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// h, E, Psi and S with optional analytic gradient and E inverse.
struct ProblemTriple {
  ScalarFn h;
  std::optional<VectorMap> grad_h;
  MapE E;
  MapPsi psi;
  SetSpec S;
  std::optional<VectorMap> e_inverse;
  /// Combination points must lie in S. Disable when h is defined on all of
  /// R^n and S only says where s and t come from.
  bool closed_domain = true;
  /// Restrict every alpha quantifier to alpha = 0.
  bool pin_alpha_zero = false;

  Index dim() const { return S.dim(); }
  /// Throws std::invalid_argument on any dimension disagreement.
  void validate() const;
};

enum class Property {
  Sep,
  Qsep,
  StrictQsep,
  EPreinvex,
  EPrequasiInvex,
  Sei,
  Qsei,
  Psei,
  ConditionA,
};

std::string_view to_string(Property p);
Property property_from_string(std::string_view name);
bool uses_gradient(Property p);

struct CheckOptions {
  double rel_tol = default_tolerance();
  /// Attach the strong E-invexity report of S as a sub-report for checks that
  /// evaluate h at combination points.
  bool attach_prerequisite = true;
};

struct Sides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = h(alpha t + E t + lambda Psi(alpha s + E s, alpha t + E t)),
/// rhs = max{h(E s), h(E t)}.
Sides qsep_sides(const ProblemTriple& P, const Point& s, const Point& t, double alpha,
                 double lambda);
/// As qsep_sides with rhs = lambda h(E s) + (1 - lambda) h(E t).
Sides sep_sides(const ProblemTriple& P, const Point& s, const Point& t, double alpha,
                double lambda);
/// lhs = grad h(E t) . Psi(alpha s + E s, alpha t + E t), rhs = h(E s) - h(E t).
Sides sei_sides(const ProblemTriple& P, const Point& s, const Point& t, double alpha);

/// Analytic gradient when supplied, else central differences with step
/// cbrt(eps) * max(1, |x_i|), one-sided at Constraint box faces.
Point gradient(const ProblemTriple& P, const Point& x);
/// Finite-difference gradient regardless of grad_h.
Point fd_gradient(const ScalarFn& h, const Point& x, const Box* box = nullptr);

/// Evaluates one sample of `property` from scratch. For ConditionA, lhs is the
/// larger of the A1/A2 residual norms.
SampleOutcome evaluate_sample(Property property, const ProblemTriple& P, const Point& s,
                              const Point& t, double alpha, double lambda,
                              double rel_tol = default_tolerance());

struct ConditionAResiduals {
  Point vbar;
  double a1 = 0.0;
  double a2 = 0.0;
  double a1_threshold = 0.0;
  double a2_threshold = 0.0;
};
ConditionAResiduals condition_a_residuals(const ProblemTriple& P, const Point& s, const Point& t,
                                          double alpha, double lambda, double rel_tol = default_tolerance());
/// v-bar in S with E v-bar = target, via E_inverse or per-axis bracketing and
/// bisection when E is separable.
Point recover_vbar(const ProblemTriple& P, const Point& target, double rel_tol = default_tolerance());

CertReport check(Property property, const ProblemTriple& P, const SamplingPlan& plan,
                 const CheckOptions& options = {});

CertReport check_qsep(const ProblemTriple& P, const SamplingPlan& plan, const CheckOptions& o = {});
CertReport check_strict_qsep(const ProblemTriple& P, const SamplingPlan& plan,
                             const CheckOptions& o = {});
CertReport check_sep(const ProblemTriple& P, const SamplingPlan& plan, const CheckOptions& o = {});
CertReport check_e_preinvex(const ProblemTriple& P, const SamplingPlan& plan,
                            const CheckOptions& o = {});
CertReport check_e_prequasi_invex(const ProblemTriple& P, const SamplingPlan& plan,
                                  const CheckOptions& o = {});
CertReport check_sei(const ProblemTriple& P, const SamplingPlan& plan, const CheckOptions& o = {});
CertReport check_qsei(const ProblemTriple& P, const SamplingPlan& plan, const CheckOptions& o = {});
CertReport check_psei(const ProblemTriple& P, const SamplingPlan& plan, const CheckOptions& o = {});
CertReport check_condition_a(const ProblemTriple& P, const SamplingPlan& plan,
                             const CheckOptions& o = {});

/// Largest-margin violation over the plan (probes included, no probe
/// precedence). With `refine`, a shrinking-step coordinate search around the
/// best sample increases the margin. The returned witness recomputes exactly.
std::optional<Witness> find_counterexample(Property property, const ProblemTriple& P,
                                           const SamplingPlan& plan, bool refine,
                                           double rel_tol = default_tolerance(),
                                           std::size_t* samples_checked = nullptr);

/// Sampling shape of a custom per-sample check run on the same layout and
/// deterministic reduction as the property checks.
struct QuadrupleShape {
  bool alpha_zero = false;
  bool lambda_zero = false;
  /// Keep only s == t grid pairs.
  bool diagonal_only = false;
  SampleRegion region = SampleRegion::Members;
};

using QuadrupleFn =
    std::function<SampleOutcome(const Point& s, const Point& t, double alpha, double lambda)>;

CertReport check_quadruples(std::string property, const SetSpec& S, const SamplingPlan& plan,
                            const QuadrupleShape& shape, const QuadrupleFn& fn,
                            double rel_tol = default_tolerance());

/// Re-evaluates a stored witness.
SampleOutcome recompute_witness(Property property, const ProblemTriple& P, const Witness& w,
                                double rel_tol = default_tolerance());

}  // namespace qsep
