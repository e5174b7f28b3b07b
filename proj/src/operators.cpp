#include "bic/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "bic/detail/fiber.hpp"
#include "bic/summation.hpp"

namespace bic {
namespace {

void check_axis(const FiniteProductSpace& space, std::size_t k) {
  if (k >= space.num_axes()) {
    throw std::out_of_range("axis " + std::to_string(k) + " out of range for " +
                            std::to_string(space.num_axes()) + " axes");
  }
}

void check_point(const FiniteProductSpace& space, std::size_t k, std::size_t y) {
  check_axis(space, k);
  if (y >= space.axis(k).size()) {
    throw std::out_of_range("point " + std::to_string(y) + " out of range on axis " +
                            std::to_string(k));
  }
}

// Structural self-check; compiled in only when requested.
void expect_independent([[maybe_unused]] const TabulatedFunction& f,
                        [[maybe_unused]] std::size_t k) {
#ifdef BIC_FIBER_CHECKS
  if (!independent_of(f, k, 1e-12)) {
    throw std::logic_error("operator output depends on coordinate " + std::to_string(k));
  }
#endif
}

// Builds a table that is constant along k-fibers from a per-fiber value.
template <class FiberValue>
TabulatedFunction fiberwise(const TabulatedFunction& f, std::size_t k, FiberValue&& value) {
  const auto& space = f.space();
  check_axis(space, k);
  const std::size_t stride = space.stride(k);
  const std::size_t size = space.axis(k).size();
  std::vector<double> out(f.size());
  detail::for_each_fiber(space, k, [&](std::size_t base) {
    const double v = value(base);
    for (std::size_t j = 0; j < size; ++j) out[base + j * stride] = v;
  });
  TabulatedFunction result(f.space_ptr(), std::move(out));
  expect_independent(result, k);
  return result;
}

}  // namespace

TabulatedFunction substitute(const TabulatedFunction& f, std::size_t k, std::size_t y) {
  check_point(f.space(), k, y);
  const std::size_t offset = y * f.space().stride(k);
  return fiberwise(f, k, [&](std::size_t base) { return f[base + offset]; });
}

TabulatedFunction difference(const TabulatedFunction& f, std::size_t k, std::size_t y,
                             std::size_t y_prime) {
  check_point(f.space(), k, y);
  check_point(f.space(), k, y_prime);
  const std::size_t stride = f.space().stride(k);
  return fiberwise(f, k, [&](std::size_t base) {
    return f[base + y * stride] - f[base + y_prime * stride];
  });
}

TabulatedFunction cond_expectation(const TabulatedFunction& f, std::size_t k) {
  check_axis(f.space(), k);
  const auto& axis = f.space().axis(k);
  const std::size_t stride = f.space().stride(k);
  return fiberwise(f, k, [&](std::size_t base) {
    CompensatedSum s;
    for (std::size_t j = 0; j < axis.size(); ++j) s.add(axis.weight(j) * f[base + j * stride]);
    return s.value();
  });
}

TabulatedFunction cond_variance(const TabulatedFunction& f, std::size_t k) {
  check_axis(f.space(), k);
  const auto& axis = f.space().axis(k);
  const std::size_t stride = f.space().stride(k);
  auto result = fiberwise(f, k, [&](std::size_t base) {
    CompensatedSum mean;
    for (std::size_t j = 0; j < axis.size(); ++j) mean.add(axis.weight(j) * f[base + j * stride]);
    const double m = mean.value();
    CompensatedSum s;
    for (std::size_t j = 0; j < axis.size(); ++j) {
      const double d = f[base + j * stride] - m;
      s.add(axis.weight(j) * d * d);
    }
    return std::max(0.0, s.value());
  });
#ifdef BIC_FIBER_CHECKS
  const auto pairwise = cond_variance_pairwise(f, k);
  for (std::size_t i = 0; i < result.size(); ++i) {
    if (std::abs(result[i] - pairwise[i]) > 1e-10 * std::max(1.0, std::abs(result[i]))) {
      throw std::logic_error("conditional variance formulas disagree");
    }
  }
#endif
  return result;
}

TabulatedFunction cond_variance_pairwise(const TabulatedFunction& f, std::size_t k) {
  check_axis(f.space(), k);
  const auto& axis = f.space().axis(k);
  const std::size_t stride = f.space().stride(k);
  return fiberwise(f, k, [&](std::size_t base) {
    CompensatedSum s;
    for (std::size_t a = 0; a < axis.size(); ++a) {
      for (std::size_t b = 0; b < axis.size(); ++b) {
        const double d = f[base + a * stride] - f[base + b * stride];
        s.add(axis.weight(a) * axis.weight(b) * d * d);
      }
    }
    return 0.5 * s.value();
  });
}

TabulatedFunction scv(const TabulatedFunction& f) {
  const std::size_t n = f.space().num_axes();
  std::vector<CompensatedSum> acc(f.size());
  for (std::size_t k = 0; k < n; ++k) {
    const auto v = cond_variance(f, k);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i].add(v[i]);
  }
  std::vector<double> out(acc.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = acc[i].value();
  return TabulatedFunction(f.space_ptr(), std::move(out));
}

TabulatedFunction axis_infimum(const TabulatedFunction& g, std::size_t k) {
  check_axis(g.space(), k);
  const std::size_t size = g.space().axis(k).size();
  const std::size_t stride = g.space().stride(k);
  return fiberwise(g, k, [&](std::size_t base) {
    // Strict comparison keeps the lowest point index among ties.
    double best = g[base];
    for (std::size_t j = 1; j < size; ++j) best = std::min(best, g[base + j * stride]);
    return best;
  });
}

TabulatedFunction d_operator(const TabulatedFunction& g) {
  const std::size_t n = g.space().num_axes();
  std::vector<CompensatedSum> acc(g.size());
  for (std::size_t k = 0; k < n; ++k) {
    const auto low = axis_infimum(g, k);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      const double d = g[i] - low[i];
      acc[i].add(d * d);
    }
  }
  std::vector<double> out(acc.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = acc[i].value();
  return TabulatedFunction(g.space_ptr(), std::move(out));
}

TabulatedFunction second_difference(const TabulatedFunction& f, std::size_t k, std::size_t l,
                                    std::size_t y, std::size_t y_prime, std::size_t z,
                                    std::size_t z_prime) {
  if (k == l) throw std::invalid_argument("second_difference: axes k and l must differ");
  auto inner = difference(f, k, y, y_prime);
  auto result = difference(inner, l, z, z_prime);
  expect_independent(result, k);
  return result;
}

bool independent_of(const TabulatedFunction& f, std::size_t k, double tol) {
  check_axis(f.space(), k);
  const std::size_t size = f.space().axis(k).size();
  const std::size_t stride = f.space().stride(k);
  bool ok = true;
  detail::for_each_fiber(f.space(), k, [&](std::size_t base) {
    for (std::size_t j = 1; j < size && ok; ++j) {
      if (std::abs(f[base + j * stride] - f[base]) > tol) ok = false;
    }
  });
  return ok;
}

}  // namespace bic
