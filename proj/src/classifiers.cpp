#include "qsep/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qsep/sampling.hpp"

namespace qsep {

namespace {

constexpr int kScanIntervals = 64;
constexpr double kRecoveryTol = 1e-9;
constexpr int kRefineRounds = 400;

bool alpha_pinned(Property p, const ProblemTriple& P) {
  return P.pin_alpha_zero || p == Property::EPreinvex || p == Property::EPrequasiInvex;
}

std::string describe_quad(const Point& s, const Point& t, double alpha, double lambda) {
  return "s=" + describe_point(s) + ", t=" + describe_point(t) + ", alpha=" + format_real(alpha) +
         ", lambda=" + format_real(lambda);
}

// h at the strong path point, guarded by membership when the domain is closed.
double path_value(const ProblemTriple& P, const Point& s, const Point& t, const Point& Es,
                  const Point& Et, double alpha, double lambda) {
  const Point a = alpha * s + Es;
  const Point b = alpha * t + Et;
  const Point p = b + lambda * P.psi(a, b);
  if (P.closed_domain && !P.S.contains(p)) {
    throw CombinationOutsideSet("combination point " + describe_point(p) +
                                " lies outside S; S is not strongly E-invex here or the box is "
                                "too small");
  }
  return P.h(p);
}

// Every per-sample evaluation funnels through these two kernels, so a cached
// evaluation and a from-scratch one produce identical bits.
SampleOutcome quad_kernel(Property prop, const ProblemTriple& P, const Point& s, const Point& t,
                          const Point& Es, const Point& Et, double hEs, double hEt, double alpha,
                          double lambda, double rel) {
  SampleOutcome o;
  if (prop == Property::StrictQsep) {
    const bool open = lambda > 0.0 && lambda < 1.0;
    if (!open || !(std::abs(hEs - hEt) > violation_threshold(rel, hEs, hEt))) {
      o.eligible = false;
      return o;
    }
  }
  o.lhs = path_value(P, s, t, Es, Et, alpha, lambda);
  const bool convex = prop == Property::Sep || prop == Property::EPreinvex;
  o.rhs = convex ? lambda * hEs + (1.0 - lambda) * hEt : std::max(hEs, hEt);
  if (prop == Property::StrictQsep) {
    o.margin = o.lhs - o.rhs + kStrictMargin;
    o.violated = o.lhs >= o.rhs - kStrictMargin;
  } else {
    o.margin = o.lhs - o.rhs;
    o.violated = o.margin > violation_threshold(rel, o.lhs, o.rhs);
  }
  return o;
}

SampleOutcome grad_kernel(Property prop, const ProblemTriple& P, const Point& s, const Point& t,
                          const Point& Es, const Point& Et, double hEs, double hEt,
                          const Point& gEt, double alpha, double rel) {
  const Point a = alpha * s + Es;
  const Point b = alpha * t + Et;
  const double dot = gEt.dot(P.psi(a, b));
  SampleOutcome o;
  switch (prop) {
    case Property::Sei:
      o.lhs = dot;
      o.rhs = hEs - hEt;
      o.margin = o.lhs - o.rhs;
      o.violated = o.margin > violation_threshold(rel, o.lhs, o.rhs);
      break;
    case Property::Qsei: {
      const bool antecedent = hEs <= hEt + violation_threshold(rel, hEs, hEt);
      o.lhs = dot;
      o.rhs = 0.0;
      o.margin = dot;
      o.violated = antecedent && dot > violation_threshold(rel, dot, 0.0);
      break;
    }
    case Property::Psei: {
      const bool antecedent = dot >= -violation_threshold(rel, dot, 0.0);
      o.lhs = hEt;
      o.rhs = hEs;
      o.margin = hEt - hEs;
      o.violated = antecedent && o.margin > violation_threshold(rel, hEs, hEt);
      break;
    }
    default:
      throw std::logic_error("grad_kernel: not a gradient property");
  }
  return o;
}

SampleOutcome conda_outcome(const ConditionAResiduals& r, int which) {
  SampleOutcome o;
  if (which == 1) {
    o.lhs = r.a1;
    o.violated = r.a1 > r.a1_threshold;
  } else if (which == 2) {
    o.lhs = r.a2;
    o.violated = r.a2 > r.a2_threshold;
  } else {
    o.lhs = std::max(r.a1, r.a2);
    o.violated = r.a1 > r.a1_threshold || r.a2 > r.a2_threshold;
  }
  o.rhs = 0.0;
  o.margin = o.lhs;
  return o;
}

// Sampling layout shared by check() and find_counterexample().
struct Layout {
  SamplingPlan plan;
  SampleSet samples;
  std::vector<double> alphas;
  std::vector<double> lambdas;
  std::vector<Probe> probes;
  std::vector<Point> Es;
  std::vector<double> hEs;
  std::vector<Point> gEs;
  SampleRegion region = SampleRegion::Members;

  std::size_t count() const {
    return probes.size() + samples.pairs.size() * alphas.size() * lambdas.size();
  }
};

Layout make_base_layout(const SetSpec& S, const SamplingPlan& plan_in, const QuadrupleShape& shape) {
  Layout L;
  L.plan = plan_in;
  L.plan.normalize();
  L.region = shape.region;
  L.alphas = shape.alpha_zero ? std::vector<double>{0.0} : L.plan.alpha_values;
  L.lambdas = shape.lambda_zero ? std::vector<double>{0.0} : L.plan.lambda_values;
  for (const Probe& pr : L.plan.probes) {
    if (shape.alpha_zero && pr.alpha != 0.0) continue;
    if (shape.diagonal_only && pr.s != pr.t) continue;
    Probe q = pr;
    if (shape.lambda_zero) q.lambda = 0.0;
    L.probes.push_back(q);
  }
  L.samples = build_sample_set(S, L.plan, L.region);
  if (shape.diagonal_only) {
    auto& pairs = L.samples.pairs;
    pairs.erase(std::remove_if(pairs.begin(), pairs.end(),
                               [](const auto& pr) { return pr[0] != pr[1]; }),
                pairs.end());
  }
  return L;
}

QuadrupleShape shape_for(Property prop, const ProblemTriple& P) {
  QuadrupleShape shape;
  shape.alpha_zero = alpha_pinned(prop, P);
  shape.lambda_zero = uses_gradient(prop);
  shape.region = uses_gradient(prop) ? SampleRegion::Interior : SampleRegion::Members;
  return shape;
}

Layout make_layout(Property prop, const ProblemTriple& P, const SamplingPlan& plan_in) {
  Layout L = make_base_layout(P.S, plan_in, shape_for(prop, P));
  const auto n = L.samples.points.size();
  L.Es.resize(n);
  if (prop != Property::ConditionA) L.hEs.resize(n);
  if (uses_gradient(prop)) L.gEs.resize(n);
  parallel_for(n, [&](std::size_t i) {
    L.Es[i] = P.E(L.samples.points[i]);
    if (prop != Property::ConditionA) L.hEs[i] = P.h(L.Es[i]);
    if (uses_gradient(prop)) L.gEs[i] = gradient(P, L.Es[i]);
  });
  return L;
}

struct Quad {
  Point s, t;
  double alpha = 0.0;
  double lambda = 0.0;
  std::size_t si = 0, ti = 0;
  bool probe = false;
};

Quad unpack(const Layout& L, std::size_t idx) {
  Quad q;
  const std::size_t np = L.probes.size();
  if (idx < np) {
    const Probe& pr = L.probes[idx];
    q.s = pr.s;
    q.t = pr.t;
    q.alpha = pr.alpha;
    q.lambda = pr.lambda;
    q.probe = true;
    return q;
  }
  std::size_t k = idx - np;
  const std::size_t nl = L.lambdas.size();
  const std::size_t na = L.alphas.size();
  const std::size_t l = k % nl;
  k /= nl;
  const std::size_t a = k % na;
  const auto& pair = L.samples.pairs[k / na];
  q.si = pair[0];
  q.ti = pair[1];
  q.s = L.samples.points[q.si];
  q.t = L.samples.points[q.ti];
  q.alpha = L.alphas[a];
  q.lambda = L.lambdas[l];
  return q;
}

bool in_region_of(const SetSpec& S, SampleRegion region, const Point& p) {
  return region == SampleRegion::Members ? S.sample_member(p) : S.interior_member(p);
}

bool in_region(const ProblemTriple& P, SampleRegion region, const Point& p) {
  return in_region_of(P.S, region, p);
}

SampleOutcome eval_layout(Property prop, const ProblemTriple& P, const Layout& L, std::size_t idx,
                          double rel, int conda_part) {
  const Quad q = unpack(L, idx);
  if (q.probe) {
    if (!in_region(P, L.region, q.s) || !in_region(P, L.region, q.t)) {
      SampleOutcome skip;
      skip.eligible = false;
      return skip;
    }
    if (prop == Property::ConditionA) {
      return conda_outcome(condition_a_residuals(P, q.s, q.t, q.alpha, q.lambda, rel), conda_part);
    }
    return evaluate_sample(prop, P, q.s, q.t, q.alpha, q.lambda, rel);
  }
  if (prop == Property::ConditionA) {
    return conda_outcome(condition_a_residuals(P, q.s, q.t, q.alpha, q.lambda, rel), conda_part);
  }
  if (uses_gradient(prop)) {
    return grad_kernel(prop, P, q.s, q.t, L.Es[q.si], L.Es[q.ti], L.hEs[q.si], L.hEs[q.ti],
                       L.gEs[q.ti], q.alpha, rel);
  }
  return quad_kernel(prop, P, q.s, q.t, L.Es[q.si], L.Es[q.ti], L.hEs[q.si], L.hEs[q.ti],
                     q.alpha, q.lambda, rel);
}

CertReport reduce_to_report(Property prop, const ProblemTriple& P, const Layout& L,
                            std::string name, double rel, int conda_part) {
  CertReport report;
  report.property = std::move(name);
  report.tolerance = rel;
  report.plan = L.plan;
  auto eval = [&](std::size_t i) { return eval_layout(prop, P, L, i, rel, conda_part); };
  auto describe = [&](std::size_t i) {
    const Quad q = unpack(L, i);
    return describe_quad(q.s, q.t, q.alpha, q.lambda);
  };
  const SampleReduction red = reduce_samples(L.count(), L.probes.size(), eval, describe);
  report.samples_checked = red.checked;
  report.violations = red.violations;
  if (red.witness_index) {
    const Quad q = unpack(L, *red.witness_index);
    report.status = Status::Refuted;
    report.witness =
        Witness{q.s, q.t, q.alpha, q.lambda, red.witness.lhs, red.witness.rhs, red.witness.margin};
  }
  return report;
}

// First root of f on [lo, hi] found by scanning then bisecting.
std::optional<double> scan_root(const std::function<double(double)>& f, double lo, double hi) {
  double x0 = lo;
  double f0 = f(x0);
  if (f0 == 0.0) return x0;
  for (int k = 1; k <= kScanIntervals; ++k) {
    const double x1 = k == kScanIntervals ? hi : lo + (hi - lo) * k / kScanIntervals;
    const double f1 = f(x1);
    if (f1 == 0.0) return x1;
    if ((f0 < 0.0) != (f1 < 0.0)) {
      double a = x0, b = x1, fa = f0;
      for (;;) {
        const double m = a + (b - a) / 2.0;
        if (m == a || m == b) break;
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm < 0.0) == (fa < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      return std::abs(fa) <= std::abs(f(b)) ? a : b;
    }
    x0 = x1;
    f0 = f1;
  }
  return std::nullopt;
}

}  // namespace

void ProblemTriple::validate() const {
  const Index n = dim();
  if (!h.valid() || !E.valid() || !psi.valid()) {
    throw std::invalid_argument("problem needs h, E and Psi");
  }
  if (h.dim() != n) throw std::invalid_argument("h dimension does not match the set");
  if (E.in_dim() != n || E.out_dim() != n) {
    throw std::invalid_argument("E dimension does not match the set");
  }
  if (psi.dim() != n || psi.joint().in_dim() != 2 * n) {
    throw std::invalid_argument("Psi dimension does not match the set");
  }
  if (grad_h && (grad_h->in_dim() != n || grad_h->out_dim() != n)) {
    throw std::invalid_argument("grad_h must map R^n to R^n");
  }
  if (e_inverse && (e_inverse->in_dim() != n || e_inverse->out_dim() != n)) {
    throw std::invalid_argument("E_inverse must map R^n to R^n");
  }
}

std::string_view to_string(Property p) {
  switch (p) {
    case Property::Sep: return "sep";
    case Property::Qsep: return "qsep";
    case Property::StrictQsep: return "strict_qsep";
    case Property::EPreinvex: return "e_preinvex";
    case Property::EPrequasiInvex: return "e_prequasi_invex";
    case Property::Sei: return "sei";
    case Property::Qsei: return "qsei";
    case Property::Psei: return "psei";
    case Property::ConditionA: return "condition_a";
  }
  return "?";
}

Property property_from_string(std::string_view name) {
  for (Property p : {Property::Sep, Property::Qsep, Property::StrictQsep, Property::EPreinvex,
                     Property::EPrequasiInvex, Property::Sei, Property::Qsei, Property::Psei,
                     Property::ConditionA}) {
    if (to_string(p) == name) return p;
  }
  throw std::invalid_argument("unknown property '" + std::string(name) + "'");
}

bool uses_gradient(Property p) {
  return p == Property::Sei || p == Property::Qsei || p == Property::Psei;
}

Sides qsep_sides(const ProblemTriple& P, const Point& s, const Point& t, double alpha,
                 double lambda) {
  const SampleOutcome o = evaluate_sample(Property::Qsep, P, s, t, alpha, lambda);
  return {o.lhs, o.rhs};
}

Sides sep_sides(const ProblemTriple& P, const Point& s, const Point& t, double alpha,
                double lambda) {
  const SampleOutcome o = evaluate_sample(Property::Sep, P, s, t, alpha, lambda);
  return {o.lhs, o.rhs};
}

Sides sei_sides(const ProblemTriple& P, const Point& s, const Point& t, double alpha) {
  const SampleOutcome o = evaluate_sample(Property::Sei, P, s, t, alpha, 0.0);
  return {o.lhs, o.rhs};
}

Point fd_gradient(const ScalarFn& h, const Point& x, const Box* box) {
  const double eps = std::cbrt(std::numeric_limits<double>::epsilon());
  const bool restrict = box != nullptr && box->contains(x);
  Point g(x.size());
  Point probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double step = eps * std::max(1.0, std::abs(x[i]));
    const double up = x[i] + step;
    const double down = x[i] - step;
    const bool fwd = !restrict || up <= box->hi[i];
    const bool bwd = !restrict || down >= box->lo[i];
    if (fwd && bwd) {
      probe[i] = up;
      const double fu = h(probe);
      probe[i] = down;
      const double fd = h(probe);
      g[i] = (fu - fd) / (up - down);
    } else if (fwd || bwd) {
      const double other = fwd ? up : down;
      probe[i] = other;
      const double fo = h(probe);
      probe[i] = x[i];
      const double f0 = h(probe);
      g[i] = (fo - f0) / (other - x[i]);
    } else {
      throw GradientError("finite-difference stencil leaves the box on both sides of axis " +
                          std::to_string(i) + " at " + describe_point(x));
    }
    probe[i] = x[i];
  }
  return g;
}

Point gradient(const ProblemTriple& P, const Point& x) {
  if (P.grad_h) return (*P.grad_h)(x);
  const bool constrained = P.S.role() == BoxRole::Constraint && !P.S.is_empty();
  return fd_gradient(P.h, x, constrained ? &P.S.box() : nullptr);
}

SampleOutcome evaluate_sample(Property prop, const ProblemTriple& P, const Point& s,
                              const Point& t, double alpha, double lambda, double rel) {
  if (prop == Property::ConditionA) {
    return conda_outcome(condition_a_residuals(P, s, t, alpha, lambda, rel), 0);
  }
  const Point Es = P.E(s);
  const Point Et = P.E(t);
  const double hEs = P.h(Es);
  const double hEt = P.h(Et);
  if (uses_gradient(prop)) {
    return grad_kernel(prop, P, s, t, Es, Et, hEs, hEt, gradient(P, Et), alpha, rel);
  }
  return quad_kernel(prop, P, s, t, Es, Et, hEs, hEt, alpha, lambda, rel);
}

Point recover_vbar(const ProblemTriple& P, const Point& target, double rel_tol) {
  const Index n = P.dim();
  Point v(n);
  if (P.e_inverse) {
    v = (*P.e_inverse)(target);
  } else if (P.E.is_separable()) {
    const Box& box = P.S.box();
    const bool window = P.S.role() == BoxRole::Window;
    Point base = box.center();
    for (Index i = 0; i < n; ++i) {
      const double w = window ? box.hi[i] - box.lo[i] : 0.0;
      const double lo = box.lo[i] - w;
      const double hi = box.hi[i] + w;
      Point x = base;
      auto f = [&](double xi) {
        x[i] = xi;
        return P.E(x)[i] - target[i];
      };
      const auto root = scan_root(f, lo, hi);
      if (!root) {
        if (std::abs(f(base[i])) <= kRecoveryTol * std::max(1.0, std::abs(target[i]))) {
          v[i] = base[i];
          continue;
        }
        throw ConditionAError("no v-bar with E v-bar = " + describe_point(target) +
                              " on axis " + std::to_string(i) + "; E is not onto as sampled");
      }
      v[i] = *root;
    }
  } else {
    throw ConditionAError(
        "Condition A unsupported: E is not separable and no E_inverse was supplied");
  }
  const Point Ev = P.E(v);
  const double scale = std::max(1.0, target.cwiseAbs().maxCoeff());
  if ((Ev - target).cwiseAbs().maxCoeff() > kRecoveryTol * scale) {
    throw ConditionAError("recovered v-bar " + describe_point(v) + " does not satisfy E v-bar = " +
                          describe_point(target));
  }
  if (!P.S.contains(v, rel_tol)) {
    throw ConditionAError("recovered v-bar " + describe_point(v) + " lies outside S");
  }
  return v;
}

ConditionAResiduals condition_a_residuals(const ProblemTriple& P, const Point& s, const Point& t,
                                          double alpha, double lambda, double rel) {
  const Point a = alpha * s + P.E(s);
  const Point b = alpha * t + P.E(t);
  const Point d = P.psi(a, b);
  ConditionAResiduals r;
  r.vbar = recover_vbar(P, b + lambda * d, rel);
  const Point c = alpha * r.vbar + P.E(r.vbar);
  const Point inner = alpha * r.vbar + d;
  const Point l1 = P.psi(b, c);
  const Point r1 = -lambda * inner;
  const Point l2 = P.psi(a, c);
  const Point r2 = (1.0 - lambda) * inner;
  auto norm = [](const Point& p) { return p.size() ? p.cwiseAbs().maxCoeff() : 0.0; };
  r.a1 = norm(l1 - r1);
  r.a2 = norm(l2 - r2);
  r.a1_threshold = violation_threshold(rel, norm(l1), norm(r1));
  r.a2_threshold = violation_threshold(rel, norm(l2), norm(r2));
  return r;
}

CertReport check(Property prop, const ProblemTriple& P, const SamplingPlan& plan,
                 const CheckOptions& options) {
  P.validate();
  const double rel = options.rel_tol;
  const Layout L = make_layout(prop, P, plan);

  CertReport report;
  if (prop == Property::ConditionA) {
    report = reduce_to_report(prop, P, L, "condition_a", rel, 0);
    report.sub_reports.push_back(reduce_to_report(prop, P, L, "condition_a1", rel, 1));
    report.sub_reports.push_back(reduce_to_report(prop, P, L, "condition_a2", rel, 2));
    report.notes.push_back("residuals are infinity norms; v-bar recovered per sample");
  } else {
    std::optional<CertReport> prerequisite;
    if (options.attach_prerequisite && P.closed_domain) {
      const AlphaMode mode = alpha_pinned(prop, P) ? AlphaMode::ZeroOnly : AlphaMode::Plan;
      prerequisite = check_strongly_e_invex(P.S, P.E, P.psi, plan, mode, rel);
    }
    report = reduce_to_report(prop, P, L, std::string(to_string(prop)), rel, 0);
    if (prerequisite) {
      if (!prerequisite->certified()) {
        report.notes.push_back("S is not strongly E-invex on the samples; see the " +
                               prerequisite->property + " sub-report");
      }
      report.sub_reports.push_back(std::move(*prerequisite));
    } else if (!P.closed_domain) {
      report.notes.push_back("h is defined beyond S; combination points are not required to lie in S");
    }
  }
  if (uses_gradient(prop)) {
    report.notes.push_back(P.grad_h ? "analytic gradient" : "finite-difference gradient");
    report.notes.push_back("s and t sampled from the interior of S");
  }
  if (alpha_pinned(prop, P)) report.notes.push_back("alpha pinned to 0");
  report.notes.push_back("certified relative to the sampling box; not a proof");
  return report;
}

CertReport check_qsep(const ProblemTriple& P, const SamplingPlan& plan, const CheckOptions& o) {
  return check(Property::Qsep, P, plan, o);
}
CertReport check_strict_qsep(const ProblemTriple& P, const SamplingPlan& plan,
                             const CheckOptions& o) {
  return check(Property::StrictQsep, P, plan, o);
}
CertReport check_sep(const ProblemTriple& P, const SamplingPlan& plan, const CheckOptions& o) {
  return check(Property::Sep, P, plan, o);
}
CertReport check_e_preinvex(const ProblemTriple& P, const SamplingPlan& plan,
                            const CheckOptions& o) {
  return check(Property::EPreinvex, P, plan, o);
}
CertReport check_e_prequasi_invex(const ProblemTriple& P, const SamplingPlan& plan,
                                  const CheckOptions& o) {
  return check(Property::EPrequasiInvex, P, plan, o);
}
CertReport check_sei(const ProblemTriple& P, const SamplingPlan& plan, const CheckOptions& o) {
  return check(Property::Sei, P, plan, o);
}
CertReport check_qsei(const ProblemTriple& P, const SamplingPlan& plan, const CheckOptions& o) {
  return check(Property::Qsei, P, plan, o);
}
CertReport check_psei(const ProblemTriple& P, const SamplingPlan& plan, const CheckOptions& o) {
  return check(Property::Psei, P, plan, o);
}
CertReport check_condition_a(const ProblemTriple& P, const SamplingPlan& plan,
                             const CheckOptions& o) {
  return check(Property::ConditionA, P, plan, o);
}

CertReport check_quadruples(std::string property, const SetSpec& S, const SamplingPlan& plan,
                            const QuadrupleShape& shape, const QuadrupleFn& fn, double rel_tol) {
  const Layout L = make_base_layout(S, plan, shape);
  CertReport report;
  report.property = std::move(property);
  report.tolerance = rel_tol;
  report.plan = L.plan;
  auto eval = [&](std::size_t i) {
    const Quad q = unpack(L, i);
    if (q.probe && (!in_region_of(S, L.region, q.s) || !in_region_of(S, L.region, q.t))) {
      SampleOutcome skip;
      skip.eligible = false;
      return skip;
    }
    return fn(q.s, q.t, q.alpha, q.lambda);
  };
  auto describe = [&](std::size_t i) {
    const Quad q = unpack(L, i);
    return describe_quad(q.s, q.t, q.alpha, q.lambda);
  };
  const SampleReduction red = reduce_samples(L.count(), L.probes.size(), eval, describe);
  report.samples_checked = red.checked;
  report.violations = red.violations;
  if (red.witness_index) {
    const Quad q = unpack(L, *red.witness_index);
    report.status = Status::Refuted;
    report.witness =
        Witness{q.s, q.t, q.alpha, q.lambda, red.witness.lhs, red.witness.rhs, red.witness.margin};
  }
  report.notes.push_back("certified relative to the sampling box; not a proof");
  return report;
}

SampleOutcome recompute_witness(Property prop, const ProblemTriple& P, const Witness& w,
                                double rel) {
  return evaluate_sample(prop, P, w.s, w.t, w.alpha, w.lambda, rel);
}

std::optional<Witness> find_counterexample(Property prop, const ProblemTriple& P,
                                           const SamplingPlan& plan, bool refine, double rel,
                                           std::size_t* samples_checked) {
  P.validate();
  Layout L = make_layout(prop, P, plan);
  // Probes compete on margin here like any other sample.
  auto eval = [&](std::size_t i) { return eval_layout(prop, P, L, i, rel, 0); };
  auto describe = [&](std::size_t i) {
    const Quad q = unpack(L, i);
    return describe_quad(q.s, q.t, q.alpha, q.lambda);
  };
  const SampleReduction red = reduce_samples(L.count(), 0, eval, describe);
  if (samples_checked) *samples_checked = red.checked;
  if (!red.witness_index) return std::nullopt;

  Quad best = unpack(L, *red.witness_index);
  SampleOutcome best_o = evaluate_sample(prop, P, best.s, best.t, best.alpha, best.lambda, rel);

  if (refine) {
    const Index n = P.dim();
    const Box& box = P.S.box();
    const double cells = std::max(1, L.plan.grid_per_axis - 1);
    const bool move_alpha = !alpha_pinned(prop, P);
    const bool move_lambda = !uses_gradient(prop);
    // Coordinates: s_0..s_{n-1}, t_0..t_{n-1}, alpha, lambda.
    const Index dims = 2 * n + 2;
    std::vector<double> step(static_cast<std::size_t>(dims), 0.0);
    std::vector<double> floor_step(static_cast<std::size_t>(dims), 0.0);
    for (Index i = 0; i < n; ++i) {
      const double w = box.hi[i] - box.lo[i];
      step[static_cast<std::size_t>(i)] = step[static_cast<std::size_t>(n + i)] = w / cells;
      floor_step[static_cast<std::size_t>(i)] = floor_step[static_cast<std::size_t>(n + i)] =
          1e-10 * std::max(1.0, w);
    }
    step[static_cast<std::size_t>(2 * n)] = move_alpha ? 0.25 : 0.0;
    step[static_cast<std::size_t>(2 * n + 1)] = move_lambda ? 0.25 : 0.0;
    floor_step[static_cast<std::size_t>(2 * n)] = floor_step[static_cast<std::size_t>(2 * n + 1)] =
        1e-10;

    auto try_candidate = [&](Quad& q) -> std::optional<SampleOutcome> {
      if (!in_region(P, L.region, q.s) || !in_region(P, L.region, q.t)) return std::nullopt;
      try {
        SampleOutcome o = evaluate_sample(prop, P, q.s, q.t, q.alpha, q.lambda, rel);
        if (o.eligible && o.violated) return o;
      } catch (const std::exception&) {
      }
      return std::nullopt;
    };

    for (int round = 0; round < kRefineRounds; ++round) {
      bool improved = false;
      for (Index c = 0; c < dims; ++c) {
        const double h = step[static_cast<std::size_t>(c)];
        if (h <= 0.0) continue;
        for (double dir : {1.0, -1.0}) {
          Quad q = best;
          if (c < n) {
            q.s[c] = std::clamp(q.s[c] + dir * h, box.lo[c], box.hi[c]);
          } else if (c < 2 * n) {
            const Index i = c - n;
            q.t[i] = std::clamp(q.t[i] + dir * h, box.lo[i], box.hi[i]);
          } else if (c == 2 * n) {
            q.alpha = std::clamp(q.alpha + dir * h, 0.0, 1.0);
          } else {
            q.lambda = std::clamp(q.lambda + dir * h, 0.0, 1.0);
          }
          const auto o = try_candidate(q);
          if (o && o->margin > best_o.margin) {
            best = q;
            best_o = *o;
            improved = true;
          }
        }
      }
      if (improved) continue;
      bool active = false;
      for (std::size_t c = 0; c < step.size(); ++c) {
        step[c] /= 2.0;
        if (step[c] > floor_step[c]) active = true;
      }
      if (!active) break;
    }
  }
  return Witness{best.s, best.t, best.alpha, best.lambda, best_o.lhs, best_o.rhs, best_o.margin};
}

}  // namespace qsep
