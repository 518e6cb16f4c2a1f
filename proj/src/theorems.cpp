#include "qsep/theorems.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qsep {

namespace {

constexpr double kHomogeneityFactors[] = {0.5, 1.0, 2.0, 10.0};
constexpr int kOuterPoints = 50;
constexpr int kMonotonePairs = 200;

CertReport start_suite(std::string name, const SamplingPlan& plan) {
  CertReport suite;
  suite.property = std::move(name);
  suite.plan = plan;
  suite.plan.normalize();
  return suite;
}

CertReport renamed(CertReport r, std::string name) {
  r.property = std::move(name);
  return r;
}

// Records a hypothesis report; false (and HypothesisFailed) when it is not
// certified.
bool hypothesis(CertReport& suite, CertReport hyp) {
  const bool ok = hyp.certified();
  if (!ok && suite.status == Status::Certified) {
    suite.status = Status::HypothesisFailed;
    suite.stage = hyp.property;
    suite.witness = hyp.witness;
  }
  suite.sub_reports.push_back(std::move(hyp));
  return ok;
}

void conclusion(CertReport& suite, CertReport concl) {
  if (!concl.certified() && suite.status == Status::Certified) {
    suite.status = Status::TheoremViolation;
    suite.stage = concl.property;
    suite.witness = concl.witness;
    suite.notes.push_back("hypotheses certified but the conclusion is refuted: a sampling gap or "
                          "an implementation error");
  }
  suite.sub_reports.push_back(std::move(concl));
}

void refuse(CertReport& suite) {
  suite.notes.push_back("hypothesis not certified; conclusion not run");
}

QuadrupleShape pair_shape() {
  QuadrupleShape shape;
  shape.alpha_zero = true;
  shape.lambda_zero = true;
  return shape;
}

// h(Es) <= h(Et) on every sampled pair.
CertReport ordered_images(const ProblemTriple& P, const SamplingPlan& plan) {
  return check_quadruples(
      "h_of_E_ordered", P.S, plan, pair_shape(),
      [&](const Point& s, const Point& t, double, double) {
        SampleOutcome o;
        o.lhs = P.h(P.E(s));
        o.rhs = P.h(P.E(t));
        o.margin = o.lhs - o.rhs;
        o.violated = o.margin > violation_threshold(default_tolerance(), o.lhs, o.rhs);
        return o;
      });
}

CertReport nonnegative_on_samples(const ScalarFn& h, const SetSpec& S, const SamplingPlan& plan,
                                  std::string name) {
  QuadrupleShape shape = pair_shape();
  shape.diagonal_only = true;
  return check_quadruples(std::move(name), S, plan, shape,
                          [&](const Point& s, const Point&, double, double) {
                            SampleOutcome o;
                            const double v = h(s);
                            o.lhs = -v;
                            o.rhs = 0.0;
                            o.margin = -v;
                            o.violated = -v > violation_threshold(default_tolerance(), v, 0.0);
                            return o;
                          });
}

std::string member_tag(std::size_t j) { return "[member " + std::to_string(j) + "]"; }

ScalarFn weighted_sum(const FamilySpec& fam, Index n) {
  std::string desc;
  for (std::size_t j = 0; j < fam.members.size(); ++j) {
    if (j) desc += " + ";
    desc += format_real(fam.weights[j]) + "*(" + fam.members[j].description() + ")";
  }
  if (desc.empty()) desc = "0";
  return ScalarFn(
      n,
      [members = fam.members, weights = fam.weights](const Point& x) {
        double sum = 0.0;
        for (std::size_t j = 0; j < members.size(); ++j) sum += weights[j] * members[j](x);
        return sum;
      },
      desc);
}

double outer_at(const ScalarFn& g, double x) {
  Point v(1);
  v[0] = x;
  return g(v);
}

}  // namespace

void FamilySpec::validate(Index n) const {
  if (!weights.empty() && weights.size() != members.size()) {
    throw std::invalid_argument("family has " + std::to_string(members.size()) + " members but " +
                                std::to_string(weights.size()) + " weights");
  }
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (!(weights[j] >= 0.0)) {
      throw std::invalid_argument("weight " + std::to_string(j) + " is negative");
    }
  }
  for (std::size_t j = 0; j < members.size(); ++j) {
    if (members[j].dim() != n) {
      throw std::invalid_argument("member " + std::to_string(j) + " has the wrong dimension");
    }
  }
  if (outer && outer->dim() != 1) throw std::invalid_argument("outer g must be univariate");
}

ProblemTriple with_objective(const ProblemTriple& P, ScalarFn h) {
  ProblemTriple out = P;
  out.h = std::move(h);
  out.grad_h.reset();
  return out;
}

ProblemTriple product_triple(const ProblemTriple& base, const ScalarFn& F) {
  const Index n = base.dim();
  if (F.dim() != 2 * n) throw std::invalid_argument("F must take 2n arguments");
  ProblemTriple out;
  out.h = F;
  const MapE E = base.E;
  out.E = VectorMap(
      2 * n, 2 * n,
      [E, n](const Point& z) { return concat(E(z.head(n)), E(z.tail(n))); },
      "E x E");
  const MapPsi psi = base.psi;
  out.psi = PairMap(VectorMap(
      4 * n, 2 * n,
      [psi, n](const Point& ab) {
        const auto a = ab.head(2 * n);
        const auto b = ab.tail(2 * n);
        return concat(psi(a.head(n), b.head(n)), psi(a.tail(n), b.tail(n)));
      },
      "Psi x Psi"));
  std::vector<ScalarFn> preds;
  for (const ScalarFn& g : base.S.predicates()) {
    preds.emplace_back(2 * n, [g, n](const Point& z) { return g(z.head(n)); },
                       g.description() + " (first factor)");
    preds.emplace_back(2 * n, [g, n](const Point& z) { return g(z.tail(n)); },
                       g.description() + " (second factor)");
  }
  out.S = base.S.is_empty() ? SetSpec::empty_set(2 * n)
                            : SetSpec(product(base.S.box(), base.S.box()), std::move(preds),
                                      base.S.role());
  out.closed_domain = base.closed_domain;
  out.pin_alpha_zero = base.pin_alpha_zero;
  return out;
}

CertReport verify_shift_property(const ProblemTriple& P, const SamplingPlan& plan) {
  CertReport suite = start_suite("shift_property", plan);
  if (!hypothesis(suite, check_qsep(P, plan))) {
    refuse(suite);
    return suite;
  }
  QuadrupleShape shape;
  shape.diagonal_only = true;
  shape.lambda_zero = true;
  shape.alpha_zero = P.pin_alpha_zero;
  conclusion(suite, check_quadruples("shift_inequality", P.S, plan, shape,
                                     [&](const Point&, const Point& t, double alpha, double) {
                                       return evaluate_sample(Property::Qsep, P, t, t, alpha, 0.0);
                                     }));
  return suite;
}

CertReport verify_linear_combination(const FamilySpec& fam_in, const ProblemTriple& base,
                                     const SamplingPlan& plan) {
  if (fam_in.members.empty()) {
    throw std::invalid_argument("linear combination needs at least one member");
  }
  FamilySpec fam = fam_in;
  if (fam.weights.empty()) fam.weights.assign(fam.members.size(), 1.0);
  fam.validate(base.dim());
  CertReport suite = start_suite("linear_combination", plan);
  bool ok = true;
  for (std::size_t j = 0; j < fam.members.size() && ok; ++j) {
    ok = hypothesis(suite, renamed(check_qsep(with_objective(base, fam.members[j]), plan),
                                   "qsep" + member_tag(j)));
    if (ok) {
      ok = hypothesis(suite, nonnegative_on_samples(fam.members[j], base.S, plan,
                                                    "nonnegative" + member_tag(j)));
    }
  }
  if (!ok) {
    refuse(suite);
    return suite;
  }

  // Members QSEP give sum_j a_j h_j(p) <= sum_j a_j max{h_j(Es), h_j(Et)} at
  // every sample; the conclusion needs the right side replaced by the max of
  // the two sums.
  std::vector<ProblemTriple> parts;
  for (const ScalarFn& m : fam.members) parts.push_back(with_objective(base, m));
  QuadrupleShape shape;
  shape.alpha_zero = base.pin_alpha_zero;
  conclusion(suite, check_quadruples(
                        "linear_combination_pointwise", base.S, plan, shape,
                        [&](const Point& s, const Point& t, double alpha, double lambda) {
                          SampleOutcome o;
                          for (std::size_t j = 0; j < fam.members.size(); ++j) {
                            const SampleOutcome m =
                                evaluate_sample(Property::Qsep, parts[j], s, t, alpha, lambda);
                            o.lhs += fam.weights[j] * m.lhs;
                            o.rhs += fam.weights[j] * m.rhs;
                          }
                          o.margin = o.lhs - o.rhs;
                          o.violated = o.margin > violation_threshold(default_tolerance(), o.lhs, o.rhs);
                          return o;
                        }));
  conclusion(suite, check_qsep(with_objective(base, weighted_sum(fam, base.dim())), plan));
  return suite;
}

CertReport verify_sup_family(const FamilySpec& fam, const ProblemTriple& base,
                             const SamplingPlan& plan) {
  fam.validate(base.dim());
  if (fam.members.empty()) throw std::invalid_argument("sup family needs at least one member");
  CertReport suite = start_suite("sup_family", plan);
  for (std::size_t j = 0; j < fam.members.size(); ++j) {
    if (!hypothesis(suite, renamed(check_qsep(with_objective(base, fam.members[j]), plan),
                                   "qsep" + member_tag(j)))) {
      suite.notes.push_back("member " + std::to_string(j) + " (" +
                            fam.members[j].description() + ") is not QSEP");
      refuse(suite);
      return suite;
    }
  }
  std::string desc = "max(";
  for (std::size_t j = 0; j < fam.members.size(); ++j) {
    desc += (j ? ", " : "") + fam.members[j].description();
  }
  desc += ")";
  ScalarFn sup(
      base.dim(),
      [members = fam.members](const Point& x) {
        double v = members.front()(x);
        for (std::size_t j = 1; j < members.size(); ++j) v = std::max(v, members[j](x));
        return v;
      },
      desc);
  suite.notes.push_back("finite family of " + std::to_string(fam.members.size()) +
                        " members stands in for an arbitrary index set");
  conclusion(suite, check_qsep(with_objective(base, std::move(sup)), plan));
  return suite;
}

CertReport verify_composition(const FamilySpec& fam, const ProblemTriple& base,
                              const SamplingPlan& plan) {
  fam.validate(base.dim());
  if (!fam.outer) throw std::invalid_argument("composition needs an outer function g");
  const ScalarFn h = base.h;
  const ScalarFn g = *fam.outer;
  CertReport suite = start_suite("composition", plan);

  // Spot-check range: h over sampled points and their images, plus 0.
  SamplingPlan grid_only = suite.plan;
  grid_only.random_pairs = 0;
  const SampleSet pts = build_sample_set(base.S, grid_only);
  double lo = 0.0, hi = 0.0;
  for (const Point& p : pts.points) {
    for (double v : {h(p), h(base.E(p))}) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (lo == hi) hi = lo + 1.0;
  std::vector<double> xs;
  for (int k = 0; k < kOuterPoints - 1; ++k) xs.push_back(lo + (hi - lo) * k / (kOuterPoints - 2));
  xs.push_back(0.0);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  CertReport homog;
  homog.property = "outer_homogeneous";
  homog.plan = suite.plan;
  for (double x : xs) {
    for (double c : kHomogeneityFactors) {
      const double lhs = outer_at(g, c * x);
      const double rhs = c * outer_at(g, x);
      const double gap = std::abs(lhs - rhs);
      ++homog.samples_checked;
      if (gap > violation_threshold(default_tolerance(), lhs, rhs)) {
        ++homog.violations;
        if (!homog.witness || gap > homog.witness->margin) {
          homog.status = Status::Refuted;
          homog.witness = Witness{Point::Constant(1, x), Point::Constant(1, c), 0.0, 0.0, lhs, rhs,
                                  gap};
        }
      }
    }
  }
  homog.notes.push_back("witness s = x, t = c; lhs = g(c x), rhs = c g(x)");

  CertReport mono;
  mono.property = "outer_monotone";
  mono.plan = suite.plan;
  std::mt19937_64 rng(suite.plan.seed ^ 0xC2B2AE3D27D4EB4FULL);
  for (int k = 0; k < kMonotonePairs; ++k) {
    double x = lo + static_cast<double>(rng() >> 11) * 0x1.0p-53 * (hi - lo);
    double y = lo + static_cast<double>(rng() >> 11) * 0x1.0p-53 * (hi - lo);
    if (y < x) std::swap(x, y);
    const double gx = outer_at(g, x);
    const double gy = outer_at(g, y);
    ++mono.samples_checked;
    if (gx - gy > violation_threshold(default_tolerance(), gx, gy)) {
      ++mono.violations;
      if (!mono.witness || gx - gy > mono.witness->margin) {
        mono.status = Status::Refuted;
        mono.witness =
            Witness{Point::Constant(1, x), Point::Constant(1, y), 0.0, 0.0, gx, gy, gx - gy};
      }
    }
  }
  mono.notes.push_back("witness s = x <= t = y; lhs = g(x), rhs = g(y)");

  const bool ok = hypothesis(suite, std::move(homog)) && hypothesis(suite, std::move(mono)) &&
                  hypothesis(suite, check_qsep(with_objective(base, h), plan));
  if (!ok) {
    refuse(suite);
    return suite;
  }
  ScalarFn gh(
      base.dim(), [g, h](const Point& x) { return outer_at(g, h(x)); },
      g.description() + " o (" + h.description() + ")");
  conclusion(suite, check_qsep(with_objective(base, std::move(gh)), plan));
  return suite;
}

CertReport verify_sep_implies_qsep(const ProblemTriple& P, const SamplingPlan& plan) {
  CertReport suite = start_suite("sep_implies_qsep", plan);
  if (!hypothesis(suite, check_sep(P, plan)) || !hypothesis(suite, ordered_images(P, plan))) {
    refuse(suite);
    return suite;
  }
  suite.notes.push_back("h(Es) <= h(Et) for all pairs forces h o E constant on S");
  conclusion(suite, check_qsep(P, plan));
  return suite;
}

CertReport verify_inf_marginal(const BivariateFn& F, const ProblemTriple& base,
                               const SamplingPlan& t_grid, const SamplingPlan& plan) {
  const ProblemTriple prod = product_triple(base, F.F);
  CertReport suite = start_suite("inf_marginal", plan);
  // Probes live in R^n; the product check runs in R^2n.
  SamplingPlan prod_plan = plan;
  prod_plan.probes.clear();
  if (!hypothesis(suite, renamed(check_qsep(prod, prod_plan), "qsep[E x E]"))) {
    refuse(suite);
    return suite;
  }
  SamplingPlan tp = t_grid;
  tp.normalize();
  tp.random_pairs = 0;
  SampleSet ts = build_sample_set(base.S, tp);
  ts.points.resize(ts.grid_points);
  if (ts.points.empty()) throw std::invalid_argument("t grid has no points in S");
  const Index n = base.dim();
  ScalarFn g(
      n,
      [Fn = F.F, ts = ts.points](const Point& s) {
        double best = Fn(concat(s, ts.front()));
        for (std::size_t k = 1; k < ts.size(); ++k) best = std::min(best, Fn(concat(s, ts[k])));
        return best;
      },
      "min over t of " + F.F.description());
  suite.notes.push_back("g is the minimum of F over " + std::to_string(ts.points.size()) +
                        " grid points of S (grid_per_axis " + std::to_string(tp.grid_per_axis) +
                        "); this grid stands in for the infimum");
  conclusion(suite, check_qsep(with_objective(base, std::move(g)), plan));
  return suite;
}

CertReport verify_sei_implies_qsei(const ProblemTriple& P, const SamplingPlan& plan) {
  CertReport suite = start_suite("sei_implies_qsei", plan);
  if (!hypothesis(suite, check_sei(P, plan)) || !hypothesis(suite, ordered_images(P, plan))) {
    refuse(suite);
    return suite;
  }
  conclusion(suite, check_qsei(P, plan));
  return suite;
}

CertReport verify_sei_conda_implies_sep(const ProblemTriple& P, const SamplingPlan& plan) {
  CertReport suite = start_suite("sei_conda_implies_sep", plan);
  if (!hypothesis(suite, check_sei(P, plan)) || !hypothesis(suite, check_condition_a(P, plan))) {
    refuse(suite);
    return suite;
  }
  conclusion(suite, check_sep(P, plan));
  return suite;
}

CertReport verify_sei_nonneg_dot_implies_psei(const ProblemTriple& P, const SamplingPlan& plan) {
  CertReport suite = start_suite("sei_nonneg_dot_implies_psei", plan);
  if (!hypothesis(suite, check_sei(P, plan))) {
    refuse(suite);
    return suite;
  }
  QuadrupleShape shape;
  shape.lambda_zero = true;
  shape.alpha_zero = P.pin_alpha_zero;
  shape.region = SampleRegion::Interior;
  CertReport dots = check_quadruples(
      "nonnegative_dot", P.S, plan, shape, [&](const Point& s, const Point& t, double alpha, double) {
        const Point Es = P.E(s);
        const Point Et = P.E(t);
        const double dot = gradient(P, Et).dot(P.psi(alpha * s + Es, alpha * t + Et));
        SampleOutcome o;
        o.lhs = -dot;
        o.rhs = 0.0;
        o.margin = -dot;
        o.violated = -dot > violation_threshold(default_tolerance(), dot, 0.0);
        return o;
      });
  if (!hypothesis(suite, std::move(dots))) {
    refuse(suite);
    return suite;
  }
  conclusion(suite, check_psei(P, plan));
  return suite;
}

CertReport check_levelsets_imply_qsep(const ProblemTriple& P, const std::vector<double>& r_values,
                                      const SamplingPlan& plan) {
  if (r_values.empty()) throw std::invalid_argument("levelset suite needs at least one r");
  CertReport suite = start_suite("levelsets_imply_qsep", plan);
  const AlphaMode mode = P.pin_alpha_zero ? AlphaMode::ZeroOnly : AlphaMode::Plan;
  bool ok = true;
  for (double r : r_values) {
    const SetSpec K = sublevel_set(P.h, r, P.S);
    ok = hypothesis(suite, renamed(check_strongly_e_invex(K, P.E, P.psi, plan, mode),
                                   "levelset_sei[r=" + format_real(r) + "]")) &&
         ok;
  }
  // Both stages always run here so the QSEP status is visible either way.
  CertReport q = check_qsep(P, plan);
  if (ok) {
    conclusion(suite, std::move(q));
  } else {
    suite.sub_reports.push_back(std::move(q));
  }
  return suite;
}

CertReport qsep_sublevel_sei(const std::vector<ScalarFn>& h_list, const MapE& E,
                             const MapPsi& psi, const SetSpec& universe,
                             const SamplingPlan& plan) {
  if (h_list.empty()) throw std::invalid_argument("sublevel suite needs at least one h");
  CertReport suite = start_suite("qsep_sublevel_sei", plan);
  SetSpec S = universe;
  for (std::size_t j = 0; j < h_list.size(); ++j) {
    ProblemTriple Pj;
    Pj.h = h_list[j];
    Pj.E = E;
    Pj.psi = psi;
    Pj.S = universe;
    if (!hypothesis(suite, renamed(check_qsep(Pj, plan), "qsep" + member_tag(j)))) {
      refuse(suite);
      return suite;
    }
    S = sublevel_set(h_list[j], 0.0, S);
  }
  if (!hypothesis(suite, check_e_image_subset(S, E, plan))) {
    refuse(suite);
    return suite;
  }
  conclusion(suite, check_strongly_e_invex(S, E, psi, plan));
  return suite;
}

}  // namespace qsep
