#pragma once

// Brute-force reference computations. Everything here works on explicit
// Configuration vectors and TabulatedFunction::at, never on strides or the
// library's operators, so the two routes share no code beyond storage.

#include <algorithm>
#include <cmath>
#include <vector>

#include "bic/core_space.hpp"

namespace oracle {

using bic::Configuration;
using bic::TabulatedFunction;

inline void collect(const bic::FiniteProductSpace& space, Configuration& c, std::size_t k,
                    std::vector<Configuration>& out) {
  if (k == space.num_axes()) {
    out.push_back(c);
    return;
  }
  for (std::size_t y = 0; y < space.axis(k).size(); ++y) {
    c[k] = y;
    collect(space, c, k + 1, out);
  }
}

inline std::vector<Configuration> configurations(const bic::FiniteProductSpace& space) {
  std::vector<Configuration> out;
  Configuration c(space.num_axes());
  collect(space, c, 0, out);
  return out;
}

inline long double prob(const bic::FiniteProductSpace& space, const Configuration& c) {
  long double p = 1.0L;
  for (std::size_t k = 0; k < c.size(); ++k) p *= space.axis(k).weight(c[k]);
  return p;
}

inline long double mean(const TabulatedFunction& f) {
  long double s = 0.0L;
  for (const auto& c : configurations(f.space())) s += prob(f.space(), c) * f.at(c);
  return s;
}

inline long double var(const TabulatedFunction& f) {
  const long double m = mean(f);
  long double s = 0.0L;
  for (const auto& c : configurations(f.space())) {
    const long double d = f.at(c) - m;
    s += prob(f.space(), c) * d * d;
  }
  return s;
}

inline Configuration with(Configuration c, std::size_t k, std::size_t y) {
  c[k] = y;
  return c;
}

// sigma_k^2(f)(c) by the mean-deviation formula.
inline long double cond_var(const TabulatedFunction& f, std::size_t k, const Configuration& c) {
  const auto& axis = f.space().axis(k);
  long double m = 0.0L;
  for (std::size_t y = 0; y < axis.size(); ++y) m += axis.weight(y) * f.at(with(c, k, y));
  long double s = 0.0L;
  for (std::size_t y = 0; y < axis.size(); ++y) {
    const long double d = f.at(with(c, k, y)) - m;
    s += axis.weight(y) * d * d;
  }
  return s;
}

inline long double scv_at(const TabulatedFunction& f, const Configuration& c) {
  long double s = 0.0L;
  for (std::size_t k = 0; k < c.size(); ++k) s += cond_var(f, k, c);
  return s;
}

inline long double expected_scv(const TabulatedFunction& f) {
  long double s = 0.0L;
  for (const auto& c : configurations(f.space())) s += prob(f.space(), c) * scv_at(f, c);
  return s;
}

inline long double second_diff(const TabulatedFunction& f, const Configuration& c, std::size_t k,
                               std::size_t l, std::size_t y, std::size_t y2, std::size_t z,
                               std::size_t z2) {
  auto v = [&](std::size_t a, std::size_t b) { return (long double)f.at(with(with(c, k, a), l, b)); };
  return v(y, z) - v(y2, z) - v(y, z2) + v(y2, z2);
}

inline long double j_squared(const TabulatedFunction& f) {
  const auto& space = f.space();
  long double best = 0.0L;
  for (const auto& c : configurations(space)) {
    long double total = 0.0L;
    for (std::size_t k = 0; k < space.num_axes(); ++k) {
      for (std::size_t l = 0; l < space.num_axes(); ++l) {
        if (k == l) continue;
        long double sup = 0.0L;
        for (std::size_t y = 0; y < space.axis(k).size(); ++y)
          for (std::size_t y2 = 0; y2 < space.axis(k).size(); ++y2)
            for (std::size_t z = 0; z < space.axis(l).size(); ++z)
              for (std::size_t z2 = 0; z2 < space.axis(l).size(); ++z2) {
                const long double d = second_diff(f, c, k, l, y, y2, z, z2);
                sup = std::max(sup, d * d);
              }
        total += sup;
      }
    }
    best = std::max(best, total);
  }
  return best;
}

inline long double j_mu(const TabulatedFunction& f) {
  const auto& space = f.space();
  long double best = 0.0L;
  for (const auto& c : configurations(space)) {
    long double total = 0.0L;
    for (std::size_t l = 0; l < space.num_axes(); ++l) {
      long double sup = 0.0L;
      for (std::size_t z = 0; z < space.axis(l).size(); ++z) {
        long double acc = 0.0L;
        for (std::size_t k = 0; k < space.num_axes(); ++k) {
          if (k == l) continue;
          const auto& axis = space.axis(k);
          // h(y) = f(c with x_k = y) - f(c with x_k = y, x_l = z)
          long double m = 0.0L;
          std::vector<long double> h(axis.size());
          for (std::size_t y = 0; y < axis.size(); ++y) {
            const auto cy = with(c, k, y);
            h[y] = (long double)f.at(cy) - f.at(with(cy, l, z));
            m += axis.weight(y) * h[y];
          }
          for (std::size_t y = 0; y < axis.size(); ++y) acc += axis.weight(y) * (h[y] - m) * (h[y] - m);
        }
        sup = std::max(sup, acc);
      }
      total += sup;
    }
    best = std::max(best, total);
  }
  return 2.0L * std::sqrt(best);
}

inline long double log_z(const TabulatedFunction& f, long double beta) {
  long double z = 0.0L;
  for (const auto& c : configurations(f.space())) z += prob(f.space(), c) * std::exp(beta * f.at(c));
  return std::log(z);
}

inline long double tilted_mean(const TabulatedFunction& f, const TabulatedFunction& g, long double beta) {
  long double z = 0.0L, num = 0.0L;
  for (const auto& c : configurations(f.space())) {
    const long double w = prob(f.space(), c) * std::exp(beta * f.at(c));
    z += w;
    num += w * g.at(c);
  }
  return num / z;
}

inline long double entropy(const TabulatedFunction& f, long double beta) {
  return beta * tilted_mean(f, f, beta) - log_z(f, beta);
}

inline long double log_mgf_centered(const TabulatedFunction& f, long double beta) {
  return log_z(f, beta) - beta * mean(f);
}

inline long double tail(const TabulatedFunction& f, long double t) {
  const long double m = mean(f);
  long double p = 0.0L;
  for (const auto& c : configurations(f.space())) {
    if (f.at(c) - m > t) p += prob(f.space(), c);
  }
  return p;
}

}  // namespace oracle
