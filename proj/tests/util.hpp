#pragma once

#include <initializer_list>

#include "qsep/problem.hpp"

inline qsep::Point pt(std::initializer_list<double> xs) {
  qsep::Point p(static_cast<qsep::Index>(xs.size()));
  qsep::Index i = 0;
  for (double x : xs) p[i++] = x;
  return p;
}

// Small plans keep the unit tests fast.
inline qsep::SamplingPlan small_plan(int grid = 11, int random_pairs = 200) {
  qsep::SamplingPlan plan;
  plan.grid_per_axis = grid;
  plan.random_pairs = random_pairs;
  return plan;
}
