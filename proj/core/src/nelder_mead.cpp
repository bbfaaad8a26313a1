#include "scou/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scou/errors.hpp"

namespace scou {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& step,
                             const NelderMeadOptions& options) {
  const std::size_t k = x0.size();
  if (k == 0) throw ValidationError("nelder_mead: empty parameter vector");
  if (step.size() != k) throw ValidationError("nelder_mead: step size mismatch");

  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> simplex(k + 1, x0);
  std::vector<double> values(k + 1);
  for (std::size_t i = 0; i < k; ++i) simplex[i + 1][i] += step[i];
  for (std::size_t i = 0; i <= k; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(k + 1);
  std::vector<double> centroid(k), trial(k), trial2(k);
  bool converged = false;

  auto point = [&](double coef, const std::vector<double>& from, std::vector<double>& out) {
    for (std::size_t j = 0; j < k; ++j) out[j] = centroid[j] + coef * (from[j] - centroid[j]);
  };

  for (;;) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[k - 1];

    if (std::isfinite(values[worst]) &&
        std::abs(values[worst] - values[best]) <=
            options.rel_tol * (std::abs(values[best]) + options.rel_tol)) {
      converged = true;
      break;
    }
    if (evals >= options.max_evals) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= k; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < k; ++j) centroid[j] += simplex[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(k);

    point(-options.reflection, simplex[worst], trial);
    const double f_reflect = eval(trial);

    if (f_reflect < values[best]) {
      point(-options.reflection * options.expansion, simplex[worst], trial2);
      const double f_expand = eval(trial2);
      if (f_expand < f_reflect) {
        simplex[worst] = trial2;
        values[worst] = f_expand;
      } else {
        simplex[worst] = trial;
        values[worst] = f_reflect;
      }
      continue;
    }
    if (f_reflect < values[second]) {
      simplex[worst] = trial;
      values[worst] = f_reflect;
      continue;
    }

    // Contraction: outside if the reflected point beats the worst, inside otherwise.
    const bool outside = f_reflect < values[worst];
    point(outside ? -options.reflection * options.contraction : options.contraction,
          simplex[worst], trial2);
    const double f_contract = eval(trial2);
    if (f_contract < std::min(f_reflect, values[worst])) {
      simplex[worst] = trial2;
      values[worst] = f_contract;
      continue;
    }

    for (std::size_t i = 0; i <= k; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < k; ++j)
        simplex[i][j] = simplex[best][j] + options.shrink * (simplex[i][j] - simplex[best][j]);
      values[i] = eval(simplex[i]);
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  NelderMeadResult result;
  result.x = simplex[static_cast<std::size_t>(best_it - values.begin())];
  result.value = *best_it;
  result.evals = evals;
  result.converged = converged;
  return result;
}

}  // namespace scou
