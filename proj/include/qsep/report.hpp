#pragma once

#include <cstddef>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qsep/function.hpp"
#include "qsep/tolerance.hpp"

namespace qsep {

/// Strict QSEP requires lhs < rhs - kStrictMargin on eligible samples.
inline constexpr double kStrictMargin = 1e-6;

inline double violation_threshold(double rel_tol, double lhs, double rhs) {
  double scale = 1.0;
  if (std::abs(lhs) > scale) scale = std::abs(lhs);
  if (std::abs(rhs) > scale) scale = std::abs(rhs);
  return rel_tol * scale;
}

/// A user-pinned quadruple that is evaluated before the generated samples.
struct Probe {
  Point s;
  Point t;
  double alpha = 0.0;
  double lambda = 0.0;
};

/// Discretisation of the quantifiers over s, t in S and alpha, lambda in [0, 1].
///
/// normalize() inserts 0, 1/2 and 1 into both value lists, sorts and dedups
/// them. Grid axes always contain both box ends and 0 when the box straddles
/// it. Identical plans produce identical sample sets.
struct SamplingPlan {
  std::uint64_t seed = 42;
  int grid_per_axis = 21;
  int random_pairs = 2000;
  std::vector<double> alpha_values{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> lambda_values{0.0, 0.25, 0.5, 0.75, 1.0};
  /// Above this many grid pairs only the diagonal plus this many seeded
  /// random grid pairs are used.
  std::size_t max_grid_pairs = 200000;
  std::vector<Probe> probes;

  SamplingPlan& normalize();
};

struct Witness {
  Point s;
  Point t;
  double alpha = 0.0;
  double lambda = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
};

enum class Status {
  Certified,         ///< no violation on the sampled quadruples; never a proof
  Refuted,           ///< witness attached
  TheoremViolation,  ///< hypotheses certified but conclusion refuted
  HypothesisFailed,  ///< a suite refused to run its conclusion
};

std::string_view to_string(Status status);
Status status_from_string(std::string_view text);

struct CertReport {
  std::string property;
  Status status = Status::Certified;
  std::optional<Witness> witness;
  std::size_t samples_checked = 0;
  std::size_t violations = 0;
  double tolerance = default_tolerance();
  SamplingPlan plan;
  /// Failing stage of a multi-stage check (empty when not applicable).
  std::string stage;
  std::vector<std::string> notes;
  std::vector<CertReport> sub_reports;

  bool certified() const { return status == Status::Certified; }
  bool refuted() const { return status == Status::Refuted; }

  /// Depth-first search over this report and its sub-reports.
  const CertReport* find(std::string_view property_name) const;
};

/// Process exit code for a report: 0 certified, 2 refuted or hypothesis
/// failure, 3 theorem violation anywhere in the tree.
int exit_code(const CertReport& report);
bool contains_theorem_violation(const CertReport& report);

void to_json(nlohmann::json& j, const Probe& p);
void from_json(const nlohmann::json& j, Probe& p);
void to_json(nlohmann::json& j, const SamplingPlan& plan);
void from_json(const nlohmann::json& j, SamplingPlan& plan);
void to_json(nlohmann::json& j, const Witness& w);
void from_json(const nlohmann::json& j, Witness& w);
void to_json(nlohmann::json& j, const CertReport& r);
void from_json(const nlohmann::json& j, CertReport& r);

nlohmann::json point_to_json(const Point& p);
Point point_from_json(const nlohmann::json& j);

}  // namespace qsep
