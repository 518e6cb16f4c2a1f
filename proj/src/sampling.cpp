#include "qsep/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <random>
#include <sstream>
#include <thread>

namespace qsep {

namespace {

std::atomic<int> g_threads{0};

constexpr std::size_t kSerialCutoff = 2048;
constexpr std::size_t kMaxGridPoints = 4'000'000;
constexpr int kDrawAttempts = 100;

double unit_real(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct Chunk {
  std::size_t begin;
  std::size_t end;
};

std::vector<Chunk> split(std::size_t count) {
  const std::size_t workers =
      count < kSerialCutoff ? 1 : static_cast<std::size_t>(std::max(1, thread_count()));
  std::vector<Chunk> chunks;
  const std::size_t per = (count + workers - 1) / std::max<std::size_t>(workers, 1);
  for (std::size_t b = 0; b < count; b += per) chunks.push_back({b, std::min(count, b + per)});
  if (chunks.empty()) chunks.push_back({0, 0});
  return chunks;
}

template <typename Body>
void run_chunks(const std::vector<Chunk>& chunks, Body body) {
  if (chunks.size() == 1) {
    body(0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(chunks.size());
  for (std::size_t c = 0; c < chunks.size(); ++c) pool.emplace_back(body, c);
  for (auto& th : pool) th.join();
}

struct Failure {
  std::size_t index = 0;
  std::exception_ptr error;
};

[[noreturn]] void rethrow_lowest(std::vector<std::optional<Failure>>& failures,
                                 const std::function<std::string(std::size_t)>& describe) {
  const Failure* lowest = nullptr;
  for (const auto& f : failures) {
    if (f && (!lowest || f->index < lowest->index)) lowest = &*f;
  }
  try {
    std::rethrow_exception(lowest->error);
  } catch (const SampleError&) {
    throw;
  } catch (const std::exception& e) {
    throw SampleError(std::string(e.what()) + " [" + describe(lowest->index) + "]");
  }
}

}  // namespace

void set_thread_count(int threads) { g_threads = std::max(0, threads); }

int thread_count() {
  const int t = g_threads.load();
  if (t > 0) return t;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<double> axis_values(double lo, double hi, int grid_per_axis) {
  if (lo == hi) return {lo};
  std::vector<double> v;
  const int n = std::max(2, grid_per_axis);
  v.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i < n; ++i) {
    v.push_back(i == n - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / (n - 1));
  }
  if (lo < 0.0 && hi > 0.0) v.push_back(0.0);
  // Snap values that differ from 0 only by rounding.
  for (double& x : v) {
    if (std::abs(x) < 1e-12 * (hi - lo)) x = 0.0;
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

SampleSet build_sample_set(const SetSpec& S, const SamplingPlan& plan, SampleRegion region) {
  SampleSet out;
  if (S.is_empty()) return out;
  const Index n = S.dim();
  const Box& box = S.box();
  auto accept = [&](const Point& p) {
    return region == SampleRegion::Members ? S.sample_member(p) : S.interior_member(p);
  };

  std::vector<std::vector<double>> axes;
  std::size_t total = 1;
  for (Index i = 0; i < n; ++i) {
    axes.push_back(axis_values(box.lo[i], box.hi[i], plan.grid_per_axis));
    total *= axes.back().size();
    if (total > kMaxGridPoints) {
      throw std::invalid_argument("sampling grid exceeds " + std::to_string(kMaxGridPoints) +
                                  " points; lower grid_per_axis");
    }
  }

  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  Point p(n);
  for (std::size_t k = 0; k < total; ++k) {
    for (Index i = 0; i < n; ++i) p[i] = axes[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
    if (accept(p)) out.points.push_back(p);
    for (Index i = n - 1; i >= 0; --i) {
      auto& c = idx[static_cast<std::size_t>(i)];
      if (++c < axes[static_cast<std::size_t>(i)].size()) break;
      c = 0;
    }
  }
  out.grid_points = out.points.size();

  const std::size_t m = out.grid_points;
  if (m * m <= plan.max_grid_pairs) {
    out.pairs.reserve(m * m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        out.pairs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
      }
    }
  } else {
    out.pairs.reserve(m + plan.max_grid_pairs);
    for (std::size_t i = 0; i < m; ++i) {
      out.pairs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i)});
    }
    std::mt19937_64 rng(plan.seed ^ 0x9E3779B97F4A7C15ULL);
    for (std::size_t k = 0; k < plan.max_grid_pairs; ++k) {
      const auto i = static_cast<std::uint32_t>(rng() % m);
      const auto j = static_cast<std::uint32_t>(rng() % m);
      out.pairs.push_back({i, j});
    }
  }

  std::mt19937_64 rng(plan.seed);
  auto draw = [&]() -> std::optional<Point> {
    for (int attempt = 0; attempt < kDrawAttempts; ++attempt) {
      Point q(n);
      for (Index i = 0; i < n; ++i) q[i] = box.lo[i] + unit_real(rng) * (box.hi[i] - box.lo[i]);
      if (accept(q)) return q;
    }
    return std::nullopt;
  };
  for (int r = 0; r < plan.random_pairs; ++r) {
    auto s = draw();
    if (!s) break;
    auto t = draw();
    if (!t) break;
    const auto base = static_cast<std::uint32_t>(out.points.size());
    out.points.push_back(std::move(*s));
    out.points.push_back(std::move(*t));
    out.pairs.push_back({base, base + 1});
  }
  return out;
}

SampleReduction reduce_samples(std::size_t count, std::size_t probe_count,
                               const std::function<SampleOutcome(std::size_t)>& eval,
                               const std::function<std::string(std::size_t)>& describe) {
  struct Local {
    std::size_t checked = 0;
    std::size_t violations = 0;
    std::optional<std::size_t> first_probe;
    SampleOutcome probe_outcome;
    std::optional<std::size_t> best;
    SampleOutcome best_outcome;
  };
  const auto chunks = split(count);
  std::vector<Local> locals(chunks.size());
  std::vector<std::optional<Failure>> failures(chunks.size());

  run_chunks(chunks, [&](std::size_t c) {
    Local& L = locals[c];
    for (std::size_t i = chunks[c].begin; i < chunks[c].end; ++i) {
      SampleOutcome o;
      try {
        o = eval(i);
      } catch (...) {
        failures[c] = Failure{i, std::current_exception()};
        return;
      }
      if (!o.eligible) continue;
      ++L.checked;
      if (!o.violated) continue;
      ++L.violations;
      if (i < probe_count) {
        if (!L.first_probe) {
          L.first_probe = i;
          L.probe_outcome = o;
        }
      } else if (!L.best || o.margin > L.best_outcome.margin) {
        L.best = i;
        L.best_outcome = o;
      }
    }
  });

  if (std::any_of(failures.begin(), failures.end(), [](const auto& f) { return f.has_value(); })) {
    rethrow_lowest(failures, describe);
  }

  SampleReduction out;
  std::optional<std::size_t> probe;
  SampleOutcome probe_outcome;
  for (const Local& L : locals) {
    out.checked += L.checked;
    out.violations += L.violations;
    if (L.first_probe && (!probe || *L.first_probe < *probe)) {
      probe = L.first_probe;
      probe_outcome = L.probe_outcome;
    }
    if (L.best) {
      const bool better = !out.witness_index || L.best_outcome.margin > out.witness.margin ||
                          (L.best_outcome.margin == out.witness.margin &&
                           *L.best < *out.witness_index);
      if (better) {
        out.witness_index = L.best;
        out.witness = L.best_outcome;
      }
    }
  }
  if (probe) {
    out.witness_index = probe;
    out.witness = probe_outcome;
  }
  return out;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const auto chunks = split(count);
  std::vector<std::optional<Failure>> failures(chunks.size());
  run_chunks(chunks, [&](std::size_t c) {
    for (std::size_t i = chunks[c].begin; i < chunks[c].end; ++i) {
      try {
        fn(i);
      } catch (...) {
        failures[c] = Failure{i, std::current_exception()};
        return;
      }
    }
  });
  if (std::any_of(failures.begin(), failures.end(), [](const auto& f) { return f.has_value(); })) {
    rethrow_lowest(failures, [](std::size_t i) { return "item " + std::to_string(i); });
  }
}

std::string describe_point(const Point& p) {
  std::ostringstream os;
  os << '(';
  for (Index i = 0; i < p.size(); ++i) {
    if (i) os << ", ";
    os << format_real(p[i]);
  }
  os << ')';
  return os.str();
}

}  // namespace qsep
