#include "qsep/domain.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace qsep {

Box::Box(Point lo_, Point hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size()) throw std::invalid_argument("Box: lo/hi dimension mismatch");
}

Box Box::uniform(Index n, double lo, double hi) {
  return Box(Point::Constant(n, lo), Point::Constant(n, hi));
}

bool Box::empty() const { return (lo.array() > hi.array()).any(); }

bool Box::contains(const Point& p) const {
  return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
}

double Box::excess(const Point& p) const {
  return std::max((lo - p).maxCoeff(), (p - hi).maxCoeff());
}

Box intersect(const Box& a, const Box& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("intersect: dimension mismatch");
  return Box(a.lo.cwiseMax(b.lo), a.hi.cwiseMin(b.hi));
}

Box product(const Box& a, const Box& b) { return Box(concat(a.lo, b.lo), concat(a.hi, b.hi)); }

SetSpec::SetSpec(Box box, std::vector<ScalarFn> predicates, BoxRole role)
    : box_(std::move(box)), predicates_(std::move(predicates)), role_(role) {
  if (box_.empty()) throw std::invalid_argument("SetSpec: box must satisfy lo <= hi on every axis");
  for (const auto& g : predicates_) {
    if (g.dim() != box_.dim()) throw std::invalid_argument("SetSpec: predicate dimension mismatch");
  }
}

SetSpec SetSpec::empty_set(Index n) {
  SetSpec s;
  s.box_ = Box(Point::Zero(n), Point::Zero(n));
  s.empty_ = true;
  return s;
}

double membership_threshold(double rel_tol, const Point& p) {
  const double scale = p.size() ? std::max(1.0, p.cwiseAbs().maxCoeff()) : 1.0;
  return rel_tol * scale;
}

double SetSpec::slack(const Point& p) const {
  if (p.size() != dim()) throw std::invalid_argument("SetSpec: dimension mismatch");
  if (empty_) return std::numeric_limits<double>::infinity();
  double worst = role_ == BoxRole::Constraint ? box_.excess(p)
                                              : -std::numeric_limits<double>::infinity();
  for (const auto& g : predicates_) worst = std::max(worst, g(p));
  return worst;
}

bool SetSpec::contains(const Point& p, double rel_tol) const {
  return slack(p) <= membership_threshold(rel_tol, p);
}

bool SetSpec::sample_member(const Point& p, double rel_tol) const {
  if (empty_ || !box_.contains(p)) return false;
  const double threshold = membership_threshold(rel_tol, p);
  return std::all_of(predicates_.begin(), predicates_.end(),
                     [&](const ScalarFn& g) { return g(p) <= threshold; });
}

bool SetSpec::interior_member(const Point& p) const {
  if (empty_ || !box_.contains(p)) return false;
  if (role_ == BoxRole::Constraint &&
      ((p.array() <= box_.lo.array()).any() || (p.array() >= box_.hi.array()).any())) {
    return false;
  }
  return std::all_of(predicates_.begin(), predicates_.end(),
                     [&](const ScalarFn& g) { return g(p) < 0.0; });
}

SetSpec SetSpec::with_predicate(ScalarFn g) const {
  SetSpec out = *this;
  if (g.dim() != dim()) throw std::invalid_argument("SetSpec: predicate dimension mismatch");
  out.predicates_.push_back(std::move(g));
  return out;
}

SetSpec SetSpec::with_role(BoxRole role) const {
  SetSpec out = *this;
  out.role_ = role;
  return out;
}

}  // namespace qsep
