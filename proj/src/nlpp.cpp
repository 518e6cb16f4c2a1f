#include "qsep/nlpp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "qsep/sets.hpp"

namespace qsep {

namespace {

constexpr double kStopFraction = 1e-8;
constexpr double kScanBudget = 200001.0;
constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

double halton(std::size_t index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % static_cast<std::size_t>(base));
    index /= static_cast<std::size_t>(base);
  }
  return r;
}

bool lex_less(const Point& a, const Point& b) {
  for (Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

ProblemTriple triple_on(const NlppProblem& P, const SetSpec& X, const ScalarFn& h) {
  ProblemTriple T;
  T.h = h;
  T.E = P.E;
  T.psi = P.psi;
  T.S = X;
  // The h_j are defined on all of R^n; membership of combination points is
  // the X stage's business.
  T.closed_domain = false;
  return T;
}

CertReport renamed(CertReport r, std::string name) {
  r.property = std::move(name);
  return r;
}

double residual(const SetSpec& X, const Point& p) { return std::max(0.0, X.slack(p)); }

}  // namespace

void NlppProblem::validate() const {
  const Index n = dim();
  if (n == 0 || box.empty()) throw std::invalid_argument("NLPP needs a nonempty box");
  if (!objective.valid() || objective.dim() != n) {
    throw std::invalid_argument("objective dimension does not match the box");
  }
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    if (constraints[j].dim() != n) {
      throw std::invalid_argument("constraint " + std::to_string(j + 1) +
                                  " dimension does not match the box");
    }
  }
  if (!E.valid() || E.in_dim() != n || E.out_dim() != n) {
    throw std::invalid_argument("E dimension does not match the box");
  }
  if (!psi.valid() || psi.dim() != n) throw std::invalid_argument("Psi dimension does not match");
}

SetSpec feasible_set(const NlppProblem& P) {
  return SetSpec(P.box, P.constraints, BoxRole::Constraint);
}

CertReport certify_assumptions(const NlppProblem& P, const SamplingPlan& plan_in) {
  P.validate();
  SamplingPlan plan = plan_in;
  plan.normalize();
  const SetSpec X = feasible_set(P);
  if (build_sample_set(X, plan).points.empty()) {
    throw std::invalid_argument("feasible set X is empty on the samples");
  }

  CertReport bundle;
  bundle.property = "nlpp_assumptions";
  bundle.plan = plan;
  std::vector<CertReport> parts;
  parts.push_back(check_e_image_subset(X, P.E, plan));
  parts.push_back(check_strongly_e_invex(X, P.E, P.psi, plan));

  QuadrupleShape shape;
  shape.diagonal_only = true;
  shape.lambda_zero = true;
  parts.push_back(check_quadruples("shift_feasible", X, plan, shape,
                                   [&](const Point& s, const Point&, double alpha, double) {
                                     SampleOutcome o;
                                     const Point p = alpha * s + P.E(s);
                                     o.lhs = X.slack(p);
                                     o.margin = o.lhs;
                                     o.violated = o.lhs > membership_threshold(default_tolerance(), p);
                                     return o;
                                   }));

  CheckOptions opts;
  opts.attach_prerequisite = false;
  for (std::size_t j = 0; j < P.constraints.size(); ++j) {
    parts.push_back(renamed(check_qsep(triple_on(P, X, P.constraints[j]), plan, opts),
                            "qsep[h" + std::to_string(j + 1) + "]"));
  }
  parts.push_back(renamed(check_qsep(triple_on(P, X, P.objective), plan, opts), "qsep[h0]"));
  parts.push_back(
      renamed(check_strict_qsep(triple_on(P, X, P.objective), plan, opts), "strict_qsep[h0]"));

  for (CertReport& r : parts) {
    if (!r.certified() && bundle.status == Status::Certified) {
      bundle.status = Status::HypothesisFailed;
      bundle.stage = r.property;
      bundle.witness = r.witness;
    }
    bundle.sub_reports.push_back(std::move(r));
  }
  bundle.notes.push_back("certified relative to the sampling box; not a proof");
  return bundle;
}

LocalResult local_search(const NlppProblem& P, const Point& start, double step0) {
  const SetSpec X = feasible_set(P);
  if (start.size() != P.dim()) throw std::invalid_argument("start has the wrong dimension");
  if (!X.contains(start)) {
    throw std::invalid_argument("infeasible start " + describe_point(start));
  }
  LocalResult r;
  r.start = start;
  Point x = start;
  double fx = P.objective(x);
  ++r.evaluations;
  const double stop = kStopFraction * P.box.diameter();
  double step = step0;
  double last_failed = step0;
  while (step >= stop && step > 0.0) {
    bool improved = false;
    for (Index i = 0; i < x.size(); ++i) {
      for (double dir : {1.0, -1.0}) {
        Point c = x;
        c[i] += dir * step;
        if (!X.contains(c)) continue;
        const double fc = P.objective(c);
        ++r.evaluations;
        if (fc < fx) {
          x = std::move(c);
          fx = fc;
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      last_failed = step;
      step /= 2.0;
    }
  }
  r.minimizer = x;
  r.value = fx;
  r.local_ball_radius = last_failed;
  return r;
}

std::vector<Point> feasible_starts(const NlppProblem& P, int count) {
  const Index n = P.dim();
  if (n > static_cast<Index>(std::size(kPrimes))) {
    throw std::invalid_argument("Halton starts support at most 12 dimensions");
  }
  const SetSpec X = feasible_set(P);
  std::vector<Point> out;
  const std::size_t limit = 1000 * static_cast<std::size_t>(std::max(count, 1));
  for (std::size_t k = 1; k <= limit && static_cast<int>(out.size()) < count; ++k) {
    Point p(n);
    for (Index i = 0; i < n; ++i) {
      p[i] = P.box.lo[i] + halton(k, kPrimes[i]) * (P.box.hi[i] - P.box.lo[i]);
    }
    if (X.contains(p)) out.push_back(std::move(p));
  }
  return out;
}

double global_tolerance(double value) { return 1e-6 * std::max(1.0, std::abs(value)); }

NlppResult solve(const NlppProblem& P, const SamplingPlan& plan, int n_starts) {
  P.validate();
  if (n_starts < 1) throw std::invalid_argument("need at least one start");
  const SetSpec X = feasible_set(P);
  NlppResult out;
  CertReport assumptions = certify_assumptions(P, plan);

  const std::vector<Point> starts = feasible_starts(P, n_starts);
  if (starts.empty()) throw std::invalid_argument("no feasible start found");
  const double step0 = 0.25 * P.box.width().maxCoeff();
  out.starts.resize(starts.size());
  parallel_for(starts.size(), [&](std::size_t k) {
    out.starts[k] = local_search(P, starts[k], step0 > 0.0 ? step0 : 1.0);
  });
  out.starts_used = starts.size();

  const LocalResult* best = &out.starts.front();
  for (const LocalResult& r : out.starts) {
    if (r.value < best->value || (r.value == best->value && lex_less(r.minimizer, best->minimizer))) {
      best = &r;
    }
  }
  out.minimizer = best->minimizer;
  out.value = best->value;
  out.local_ball_radius = best->local_ball_radius;
  out.feasibility_residual = residual(X, out.minimizer);

  // Dense scan over the grid of the box.
  const Index n = P.dim();
  const int per_axis =
      std::max(2, static_cast<int>(std::floor(std::pow(kScanBudget, 1.0 / static_cast<double>(n)))));
  std::vector<std::vector<double>> axes;
  std::vector<std::size_t> extent;
  std::size_t total = 1;
  for (Index i = 0; i < n; ++i) {
    axes.push_back(axis_values(P.box.lo[i], P.box.hi[i], per_axis));
    extent.push_back(axes.back().size());
    total *= extent.back();
  }
  auto point_at = [&](std::size_t lin) {
    Point p(n);
    for (Index i = n - 1; i >= 0; --i) {
      const auto u = static_cast<std::size_t>(i);
      p[i] = axes[u][lin % extent[u]];
      lin /= extent[u];
    }
    return p;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> values(total, inf);
  parallel_for(total, [&](std::size_t k) {
    const Point p = point_at(k);
    if (X.contains(p)) values[k] = P.objective(p);
  });
  std::size_t arg = 0;
  for (std::size_t k = 1; k < total; ++k) {
    if (values[k] < values[arg]) arg = k;
  }
  if (values[arg] == inf) throw std::invalid_argument("no feasible scan point");
  out.global_scan_best = values[arg];
  out.global_scan_argmin = point_at(arg);
  out.global_gap = out.value - out.global_scan_best;

  // Face-connected components of near-best scan points.
  const double band = out.global_scan_best + global_tolerance(out.global_scan_best);
  std::unordered_set<std::size_t> near;
  for (std::size_t k = 0; k < total; ++k) {
    if (values[k] <= band) near.insert(k);
  }
  std::vector<std::size_t> stride(static_cast<std::size_t>(n), 1);
  for (Index i = n - 2; i >= 0; --i) {
    const auto u = static_cast<std::size_t>(i);
    stride[u] = stride[u + 1] * extent[u + 1];
  }
  std::unordered_set<std::size_t> seen;
  for (std::size_t k = 0; k < total; ++k) {
    if (!near.count(k) || seen.count(k)) continue;
    ++out.scan_clusters;
    std::deque<std::size_t> queue{k};
    seen.insert(k);
    while (!queue.empty()) {
      const std::size_t cur = queue.front();
      queue.pop_front();
      for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
        const std::size_t coord = (cur / stride[i]) % extent[i];
        for (int d : {-1, 1}) {
          if ((d < 0 && coord == 0) || (d > 0 && coord + 1 == extent[i])) continue;
          const std::size_t nb = d < 0 ? cur - stride[i] : cur + stride[i];
          if (near.count(nb) && seen.insert(nb).second) queue.push_back(nb);
        }
      }
    }
  }

  CertReport& rep = out.report;
  rep.property = "nlpp_solve";
  rep.plan = assumptions.plan;
  rep.samples_checked = out.starts.size();
  const bool assumed = assumptions.certified();
  if (assumed) {
    for (const LocalResult& r : out.starts) {
      const double gap = r.value - out.global_scan_best;
      if (gap > global_tolerance(r.value)) {
        ++rep.violations;
        if (!rep.witness || gap > rep.witness->margin) {
          rep.witness = Witness{r.start, r.minimizer, 0.0, 0.0, r.value, out.global_scan_best, gap};
        }
      }
    }
    if (rep.violations > 0) {
      rep.status = Status::TheoremViolation;
      rep.stage = "global_gap";
      rep.notes.push_back("assumptions certified but a local minimum lies above the scan best; "
                          "witness s = start, t = local minimizer");
    }
    if (out.scan_clusters > 1) {
      rep.notes.push_back("scan finds " + std::to_string(out.scan_clusters) +
                          " separate near-best regions; strictness holds only up to grid "
                          "resolution");
    }
  } else {
    rep.notes.push_back("assumptions not certified (" + assumptions.stage +
                        "); no global assertion made");
  }
  rep.sub_reports.push_back(std::move(assumptions));
  return out;
}

void to_json(nlohmann::json& j, const LocalResult& r) {
  j = nlohmann::json{{"start", point_to_json(r.start)},
                     {"minimizer", point_to_json(r.minimizer)},
                     {"value", r.value},
                     {"local_ball_radius", r.local_ball_radius},
                     {"evaluations", r.evaluations}};
}

void to_json(nlohmann::json& j, const NlppResult& r) {
  j = nlohmann::json{{"minimizer", point_to_json(r.minimizer)},
                     {"value", r.value},
                     {"feasibility_residual", r.feasibility_residual},
                     {"starts_used", r.starts_used},
                     {"global_scan_best", r.global_scan_best},
                     {"global_scan_argmin", point_to_json(r.global_scan_argmin)},
                     {"scan_clusters", r.scan_clusters},
                     {"global_gap", r.global_gap},
                     {"local_ball_radius", r.local_ball_radius},
                     {"starts", r.starts}};
}

}  // namespace qsep
