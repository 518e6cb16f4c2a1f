#pragma once

#include <optional>
#include <vector>

#include "qsep/classifiers.hpp"

namespace qsep {

/// Members h_j with optional weights a_j >= 0 and an optional outer g : R -> R.
struct FamilySpec {
  std::vector<ScalarFn> members;
  std::vector<double> weights;
  std::optional<ScalarFn> outer;

  /// Throws std::invalid_argument on negative weights, a weight count that
  /// does not match the members, or a non-scalar outer function.
  void validate(Index n) const;
};

/// F over R^n x R^n, evaluated on the concatenation (s, t).
struct BivariateFn {
  ScalarFn F;
};

/// Suite status: HypothesisFailed when a hypothesis report is not certified
/// (the conclusion is then not run), TheoremViolation when every hypothesis
/// is certified but the conclusion is refuted, Certified otherwise. Hypothesis
/// and conclusion reports are embedded as sub-reports.
CertReport verify_shift_property(const ProblemTriple& P, const SamplingPlan& plan);

CertReport verify_linear_combination(const FamilySpec& fam, const ProblemTriple& base,
                                     const SamplingPlan& plan);

CertReport verify_sup_family(const FamilySpec& fam, const ProblemTriple& base,
                             const SamplingPlan& plan);

/// g o base.h; only the family's outer function is used.
CertReport verify_composition(const FamilySpec& fam, const ProblemTriple& base,
                              const SamplingPlan& plan);

CertReport verify_sep_implies_qsep(const ProblemTriple& P, const SamplingPlan& plan);

/// g(s) = min of F(s, t) over the grid points of `t_grid` drawn from S.
CertReport verify_inf_marginal(const BivariateFn& F, const ProblemTriple& base,
                               const SamplingPlan& t_grid, const SamplingPlan& plan);

CertReport verify_sei_implies_qsei(const ProblemTriple& P, const SamplingPlan& plan);

CertReport verify_sei_conda_implies_sep(const ProblemTriple& P, const SamplingPlan& plan);

CertReport verify_sei_nonneg_dot_implies_psei(const ProblemTriple& P, const SamplingPlan& plan);

/// Every K_r = {s in S : h(s) <= r} strongly E-invex, then h QSEP. Both stages
/// always run; a failing level set gives HypothesisFailed with that stage.
CertReport check_levelsets_imply_qsep(const ProblemTriple& P, const std::vector<double>& r_values,
                                      const SamplingPlan& plan);

/// Each h_j QSEP on the universe and E(S) in S for S = intersection of the
/// zero sublevel sets, then S is strongly E-invex.
CertReport qsep_sublevel_sei(const std::vector<ScalarFn>& h_list, const MapE& E,
                             const MapPsi& psi, const SetSpec& universe,
                             const SamplingPlan& plan);

/// The problem with h replaced.
ProblemTriple with_objective(const ProblemTriple& P, ScalarFn h);

/// Product triple (F, E x E, Psi x Psi, S x S) of dimension 2n.
ProblemTriple product_triple(const ProblemTriple& base, const ScalarFn& F);

}  // namespace qsep
