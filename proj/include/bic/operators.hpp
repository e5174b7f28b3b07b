#pragma once

#include <cstddef>

#include "bic/core_space.hpp"

// Operator calculus on functions of independent coordinates. Every operator
// materializes a new table; none mutates its argument. Axis indices are
// zero-based, points are indices into the axis.
namespace bic {

/// (S_y^k f)(x) = f(x with x_k replaced by y).
TabulatedFunction substitute(const TabulatedFunction& f, std::size_t k, std::size_t y);

/// D^k_{y,y'} f = S_y^k f - S_{y'}^k f.
TabulatedFunction difference(const TabulatedFunction& f, std::size_t k, std::size_t y,
                             std::size_t y_prime);

/// E_k f: average over coordinate k under mu_k.
TabulatedFunction cond_expectation(const TabulatedFunction& f, std::size_t k);

/// sigma_k^2(f) = E_k[(f - E_k f)^2].
TabulatedFunction cond_variance(const TabulatedFunction& f, std::size_t k);

/// sigma_k^2(f) through the pair form 1/2 E_{(y,y')}[(D^k_{y,y'} f)^2]. Equal to
/// cond_variance up to rounding; kept separate so the two can be compared.
TabulatedFunction cond_variance_pairwise(const TabulatedFunction& f, std::size_t k);

/// Sum of conditional variances Sigma^2(f) = sum_k sigma_k^2(f).
TabulatedFunction scv(const TabulatedFunction& f);

/// inf_{y in Omega_k} S_y^k g, an exact minimum over the finite axis.
TabulatedFunction axis_infimum(const TabulatedFunction& g, std::size_t k);

/// Self-bounding operator Dg = sum_k (g - inf_y S_y^k g)^2.
TabulatedFunction d_operator(const TabulatedFunction& g);

/// D^l_{z,z'} D^k_{y,y'} f. Rejects k == l.
TabulatedFunction second_difference(const TabulatedFunction& f, std::size_t k, std::size_t l,
                                    std::size_t y, std::size_t y_prime, std::size_t z,
                                    std::size_t z_prime);

/// True when f is constant along every k-fiber within `tol`.
bool independent_of(const TabulatedFunction& f, std::size_t k, double tol = 1e-12);

}  // namespace bic
