#pragma once

namespace qsep {

/// Relative violation tolerance: an inequality lhs <= rhs is violated when
/// lhs - rhs > tol * max(1, |lhs|, |rhs|).
inline constexpr double kRelTol = 1e-9;

/// Process-wide tolerance used wherever a caller does not pass one. Starts at
/// kRelTol; the command line may override it.
double default_tolerance();
void set_default_tolerance(double rel_tol);

}  // namespace qsep
