#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsep/domain.hpp"
#include "qsep/report.hpp"

namespace qsep {

/// Evaluation failure at a specific sample; the message identifies it.
class SampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Worker threads used by the checks. 0 selects hardware concurrency.
void set_thread_count(int threads);
int thread_count();

/// Grid values for one axis: grid_per_axis evenly spaced values including
/// both ends, plus 0 when lo < 0 < hi.
std::vector<double> axis_values(double lo, double hi, int grid_per_axis);

enum class SampleRegion { Members, Interior };

/// Points drawn from S and the (s, t) index pairs built over them. Grid points
/// come first in lexicographic index order; seeded random points follow.
struct SampleSet {
  std::vector<Point> points;
  std::vector<std::array<std::uint32_t, 2>> pairs;
  std::size_t grid_points = 0;
};

SampleSet build_sample_set(const SetSpec& S, const SamplingPlan& plan,
                           SampleRegion region = SampleRegion::Members);

/// Outcome of one sample of an inequality check.
struct SampleOutcome {
  bool eligible = true;
  bool violated = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
};

/// Deterministic reduction over sample indices [0, count). Indices below
/// `probe_count` are user probes: the first violating probe wins the witness
/// slot; otherwise the largest margin wins with ties going to the lowest index.
/// The result does not depend on the number of threads.
struct SampleReduction {
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::optional<std::size_t> witness_index;
  SampleOutcome witness;
};

SampleReduction reduce_samples(std::size_t count, std::size_t probe_count,
                               const std::function<SampleOutcome(std::size_t)>& eval,
                               const std::function<std::string(std::size_t)>& describe);

/// Runs fn(i) for every i in [0, count) across the worker threads. If any call
/// throws, the exception of the lowest index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

std::string describe_point(const Point& p);

}  // namespace qsep
