#include "ehist/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ehist {

namespace {

struct Pass {
  std::vector<double> x;
  double value;
};

Pass single_pass(const std::function<double(std::span<const double>)>& f, const std::vector<double>& start,
                 const NelderMeadOptions& opt, std::size_t& evals, std::size_t budget) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> simplex(n + 1, start);
  std::vector<double> values(n + 1);
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };
  values[0] = eval(simplex[0]);
  for (std::size_t i = 0; i < n; ++i) {
    simplex[i + 1][i] += opt.initial_step;
    values[i + 1] = eval(simplex[i + 1]);
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  while (evals < budget) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double spread_x = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) spread_x = std::max(spread_x, std::abs(simplex[i][k] - simplex[best][k]));
    }
    if (values[worst] - values[best] <= opt.f_tolerance && spread_x <= opt.x_tolerance) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);
    }
    for (std::size_t k = 0; k < n; ++k) trial[k] = centroid[k] + (centroid[k] - simplex[worst][k]);
    const double fr = eval(trial);

    if (fr < values[best]) {
      for (std::size_t k = 0; k < n; ++k) trial2[k] = centroid[k] + 2.0 * (centroid[k] - simplex[worst][k]);
      const double fe = eval(trial2);
      if (fe < fr) {
        simplex[worst] = trial2;
        values[worst] = fe;
      } else {
        simplex[worst] = trial;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = trial;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    for (std::size_t k = 0; k < n; ++k) {
      trial2[k] = outside ? centroid[k] + 0.5 * (trial[k] - centroid[k])
                          : centroid[k] + 0.5 * (simplex[worst][k] - centroid[k]);
    }
    const double fc = eval(trial2);
    if (fc < std::min(fr, values[worst])) {
      simplex[worst] = trial2;
      values[worst] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k) simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
      values[i] = eval(simplex[i]);
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  return {simplex[static_cast<std::size_t>(it - values.begin())], *it};
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> start, const NelderMeadOptions& options) {
  NelderMeadResult result;
  if (start.empty()) {
    result.value = f(start);
    result.evaluations = 1;
    return result;
  }
  std::size_t evals = 0;
  NelderMeadOptions pass_opt = options;
  Pass best = single_pass(f, start, pass_opt, evals, options.max_evaluations);
  for (std::size_t r = 0; r < options.max_restarts && evals < options.max_evaluations; ++r) {
    pass_opt.initial_step = std::max(pass_opt.initial_step * 0.5, 1e-4);
    Pass next = single_pass(f, best.x, pass_opt, evals, options.max_evaluations);
    const bool improved = next.value < best.value - options.f_tolerance;
    if (next.value < best.value) best = std::move(next);
    if (!improved) break;
  }
  result.x = std::move(best.x);
  result.value = best.value;
  result.evaluations = evals;
  return result;
}

}  // namespace ehist
