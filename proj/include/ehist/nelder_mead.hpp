#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ehist {

struct NelderMeadOptions {
  double initial_step = 0.5;
  std::size_t max_evaluations = 5000;
  double f_tolerance = 1e-13;  // stop when simplex values spread below this
  double x_tolerance = 1e-10;  // ... and vertices lie within this of the best
  // Re-run from the best point with a fresh simplex until a pass stops
  // improving; guards against collapsed simplices.
  std::size_t max_restarts = 4;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
};

// Minimizes f with the (non-adaptive) Nelder-Mead simplex method.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> start, const NelderMeadOptions& options = {});

}  // namespace ehist
