#pragma once

#include <cstddef>
#include <functional>

namespace bic {

struct QuadratureOptions {
  double abs_tol = 1e-9;
  int max_depth = 48;
  std::size_t max_evaluations = 2'000'000;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

/// Adaptive Simpson on [a, b] with Richardson correction. Throws
/// QuadratureError when the tolerance cannot be met within max_depth or the
/// evaluation budget.
QuadratureResult adaptive_simpson(const std::function<double(double)>& fn, double a, double b,
                                  const QuadratureOptions& options = {});

}  // namespace bic
