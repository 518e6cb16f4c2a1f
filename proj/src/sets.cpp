#include "qsep/sets.hpp"

#include <stdexcept>

namespace qsep {

namespace {

void require_dims(const SetSpec& S, const MapE& E) {
  if (E.in_dim() != S.dim() || E.out_dim() != S.dim()) {
    throw std::invalid_argument("E dimension does not match the set dimension");
  }
}

void require_dims(const SetSpec& S, const MapE& E, const MapPsi& psi) {
  require_dims(S, E);
  if (psi.dim() != S.dim()) throw std::invalid_argument("Psi dimension does not match the set");
}

std::string describe_quad(const Point& s, const Point& t, double alpha, double lambda) {
  return "s=" + describe_point(s) + ", t=" + describe_point(t) + ", alpha=" + format_real(alpha) +
         ", lambda=" + format_real(lambda);
}

SampleOutcome membership_outcome(const SetSpec& S, const Point& p, double rel_tol) {
  SampleOutcome o;
  o.lhs = S.slack(p);
  o.rhs = 0.0;
  o.margin = o.lhs;
  o.violated = o.lhs > membership_threshold(rel_tol, p);
  return o;
}

}  // namespace

bool is_member(const SetSpec& S, const Point& p, double rel_tol) {
  if (p.size() != S.dim()) throw std::invalid_argument("is_member: dimension mismatch");
  return S.contains(p, rel_tol);
}

Point strong_path_point(const MapE& E, const MapPsi& psi, const Point& s, const Point& t,
                        double alpha, double lambda) {
  const Point a = alpha * s + E(s);
  const Point b = alpha * t + E(t);
  return b + lambda * psi(a, b);
}

CertReport check_strongly_e_invex(const SetSpec& S, const MapE& E, const MapPsi& psi,
                                  const SamplingPlan& plan_in, AlphaMode mode, double rel_tol) {
  require_dims(S, E, psi);
  SamplingPlan plan = plan_in;
  plan.normalize();
  CertReport report;
  report.property = mode == AlphaMode::Plan ? "sei_set" : "e_invex_set";
  report.tolerance = rel_tol;
  report.plan = plan;
  report.notes.push_back("certified relative to the sampling box; not a proof");

  const SampleSet samples = build_sample_set(S, plan);
  const std::vector<double> alphas =
      mode == AlphaMode::Plan ? plan.alpha_values : std::vector<double>{0.0};
  const auto& lambdas = plan.lambda_values;

  std::vector<Point> images(samples.points.size());
  parallel_for(samples.points.size(), [&](std::size_t i) { images[i] = E(samples.points[i]); });

  std::vector<Probe> probes;
  for (const auto& pr : plan.probes) {
    if (mode == AlphaMode::ZeroOnly && pr.alpha != 0.0) continue;
    probes.push_back(pr);
  }
  const std::size_t np = probes.size();
  const std::size_t na = alphas.size();
  const std::size_t nl = lambdas.size();
  const std::size_t count = np + samples.pairs.size() * na * nl;

  auto unpack = [&](std::size_t idx, Point& s, Point& t, Point& Es, Point& Et, double& alpha,
                    double& lambda) {
    if (idx < np) {
      const Probe& pr = probes[idx];
      s = pr.s;
      t = pr.t;
      Es = E(s);
      Et = E(t);
      alpha = pr.alpha;
      lambda = pr.lambda;
      return;
    }
    std::size_t k = idx - np;
    const std::size_t l = k % nl;
    k /= nl;
    const std::size_t a = k % na;
    const auto& pair = samples.pairs[k / na];
    s = samples.points[pair[0]];
    t = samples.points[pair[1]];
    Es = images[pair[0]];
    Et = images[pair[1]];
    alpha = alphas[a];
    lambda = lambdas[l];
  };

  auto eval = [&](std::size_t idx) {
    Point s, t, Es, Et;
    double alpha = 0, lambda = 0;
    unpack(idx, s, t, Es, Et, alpha, lambda);
    if (idx < np && (!S.sample_member(s) || !S.sample_member(t))) {
      SampleOutcome skip;
      skip.eligible = false;
      return skip;
    }
    const Point a = alpha * s + Es;
    const Point b = alpha * t + Et;
    const Point p = b + lambda * psi(a, b);
    return membership_outcome(S, p, rel_tol);
  };
  auto describe = [&](std::size_t idx) {
    Point s, t, Es, Et;
    double alpha = 0, lambda = 0;
    unpack(idx, s, t, Es, Et, alpha, lambda);
    return describe_quad(s, t, alpha, lambda);
  };

  const SampleReduction red = reduce_samples(count, np, eval, describe);
  report.samples_checked = red.checked;
  report.violations = red.violations;
  if (red.witness_index) {
    Point s, t, Es, Et;
    double alpha = 0, lambda = 0;
    unpack(*red.witness_index, s, t, Es, Et, alpha, lambda);
    report.status = Status::Refuted;
    report.witness = Witness{s, t, alpha, lambda, red.witness.lhs, red.witness.rhs,
                             red.witness.margin};
  }
  return report;
}

CertReport check_e_invex(const SetSpec& S, const MapE& E, const MapPsi& psi,
                         const SamplingPlan& plan, double rel_tol) {
  return check_strongly_e_invex(S, E, psi, plan, AlphaMode::ZeroOnly, rel_tol);
}

CertReport check_e_image_subset(const SetSpec& S, const MapE& E, const SamplingPlan& plan_in,
                                double rel_tol) {
  require_dims(S, E);
  SamplingPlan plan = plan_in;
  plan.normalize();
  CertReport report;
  report.property = "e_image_subset";
  report.tolerance = rel_tol;
  report.plan = plan;
  report.notes.push_back("certified relative to the sampling box; not a proof");

  const SampleSet samples = build_sample_set(S, plan);
  const auto& pts = samples.points;
  auto eval = [&](std::size_t i) { return membership_outcome(S, E(pts[i]), rel_tol); };
  auto describe = [&](std::size_t i) { return "s=" + describe_point(pts[i]); };
  const SampleReduction red = reduce_samples(pts.size(), 0, eval, describe);
  report.samples_checked = red.checked;
  report.violations = red.violations;
  if (red.witness_index) {
    const Point& s = pts[*red.witness_index];
    report.status = Status::Refuted;
    report.witness = Witness{s, s, 0.0, 0.0, red.witness.lhs, red.witness.rhs, red.witness.margin};
  }
  return report;
}

SetSpec intersect(const SetSpec& a, const SetSpec& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("intersect: dimension mismatch");
  if (a.is_empty() || b.is_empty()) return SetSpec::empty_set(a.dim());
  const Box box = intersect(a.box(), b.box());
  if (box.empty()) return SetSpec::empty_set(a.dim());
  std::vector<ScalarFn> preds = a.predicates();
  preds.insert(preds.end(), b.predicates().begin(), b.predicates().end());
  const BoxRole role = a.role() == BoxRole::Window && b.role() == BoxRole::Window
                           ? BoxRole::Window
                           : BoxRole::Constraint;
  return SetSpec(box, std::move(preds), role);
}

SetSpec sublevel_set(const ScalarFn& h, double r, const SetSpec& universe) {
  if (h.dim() != universe.dim()) throw std::invalid_argument("sublevel_set: dimension mismatch");
  if (universe.is_empty()) return universe;
  ScalarFn g(
      h.dim(), [h, r](const Point& x) { return h(x) - r; },
      "(" + h.description() + ") - " + format_real(r));
  return universe.with_predicate(std::move(g));
}

double recompute_set_witness(const std::string& property, const SetSpec& S, const MapE& E,
                             const MapPsi& psi, const Witness& w) {
  if (property == "e_image_subset") return S.slack(E(w.s));
  if (property == "sei_set" || property == "e_invex_set") {
    return S.slack(strong_path_point(E, psi, w.s, w.t, w.alpha, w.lambda));
  }
  throw std::invalid_argument("not a set-level property: " + property);
}

}  // namespace qsep
