#pragma once

#include <string>
#include <vector>

#include "qsep/function.hpp"
#include "qsep/tolerance.hpp"

namespace qsep {

/// Per-axis closed intervals [lo_i, hi_i].
struct Box {
  Point lo;
  Point hi;

  Box() = default;
  Box(Point lo_, Point hi_);
  static Box uniform(Index n, double lo, double hi);

  Index dim() const { return lo.size(); }
  bool empty() const;
  bool contains(const Point& p) const;
  /// Largest amount by which p leaves the box (<= 0 inside).
  double excess(const Point& p) const;
  Point center() const { return (lo + hi) / 2.0; }
  Point width() const { return hi - lo; }
  double diameter() const { return (hi - lo).norm(); }

  friend bool operator==(const Box& a, const Box& b) { return a.lo == b.lo && a.hi == b.hi; }
};

Box intersect(const Box& a, const Box& b);
Box product(const Box& a, const Box& b);

/// Whether the box bounds the set itself or is only the sampling window of a
/// set that extends beyond it (the set is then given by its predicates alone).
enum class BoxRole { Constraint, Window };

/// S = {p in box : g_k(p) <= 0 for all k}. With BoxRole::Window the box only
/// bounds where s and t are drawn from; membership of other points is decided
/// by the predicates.
class SetSpec {
 public:
  SetSpec() = default;
  explicit SetSpec(Box box, std::vector<ScalarFn> predicates = {},
                   BoxRole role = BoxRole::Constraint);

  /// The explicit empty set of dimension n (every membership is false).
  static SetSpec empty_set(Index n);

  Index dim() const { return box_.dim(); }
  const Box& box() const { return box_; }
  const std::vector<ScalarFn>& predicates() const { return predicates_; }
  BoxRole role() const { return role_; }
  bool is_empty() const { return empty_; }

  /// max over predicates and (for Constraint boxes) box excess; <= 0 inside.
  double slack(const Point& p) const;
  /// Inside when slack(p) <= rel_tol * max(1, |p|_inf).
  bool contains(const Point& p, double rel_tol = default_tolerance()) const;
  /// Candidate for sampling: in the box and satisfying every predicate.
  bool sample_member(const Point& p, double rel_tol = default_tolerance()) const;
  /// Strictly inside: every predicate < 0 and, for Constraint boxes, strictly
  /// inside the box. Used by the gradient-based checks, which need an open set.
  bool interior_member(const Point& p) const;

  SetSpec with_predicate(ScalarFn g) const;
  SetSpec with_role(BoxRole role) const;

 private:
  Box box_;
  std::vector<ScalarFn> predicates_;
  BoxRole role_ = BoxRole::Constraint;
  bool empty_ = false;
};

double membership_threshold(double rel_tol, const Point& p);

}  // namespace qsep
