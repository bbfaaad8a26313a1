#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace scou {

struct NelderMeadOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  // Stop when |f_worst - f_best| <= rel_tol * (|f_best| + rel_tol).
  double rel_tol = 1e-8;
  std::size_t max_evals = 2000;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evals = 0;
  bool converged = false;
};

// Minimizes f starting from the simplex {x0, x0 + step_i * e_i}. Non-finite
// objective values are treated as +inf.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& step,
                             const NelderMeadOptions& options = {});

}  // namespace scou
