#include "bic/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>

#include "bic/detail/fiber.hpp"
#include "bic/errors.hpp"
#include "bic/operators.hpp"
#include "bic/quadrature.hpp"
#include "bic/summation.hpp"

namespace bic {
namespace {

using detail::with_coordinate;

// sum over ordered pairs k != l of sup_{y,y',z,z'} (D^l D^k f)^2 at one point.
double j_squared_at(const TabulatedFunction& f, std::size_t x) {
  const auto& space = f.space();
  const std::size_t n = space.num_axes();
  CompensatedSum total;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k + 1; l < n; ++l) {
      const std::size_t sk = space.stride(k), sl = space.stride(l);
      const std::size_t base = with_coordinate(space, with_coordinate(space, x, k, 0), l, 0);
      const std::size_t nk = space.axis(k).size(), nl = space.axis(l).size();
      double best = 0.0;
      for (std::size_t y = 0; y < nk; ++y) {
        for (std::size_t y2 = y + 1; y2 < nk; ++y2) {
          for (std::size_t z = 0; z < nl; ++z) {
            for (std::size_t z2 = z + 1; z2 < nl; ++z2) {
              const double v = f[base + y * sk + z * sl] - f[base + y2 * sk + z * sl] -
                               f[base + y * sk + z2 * sl] + f[base + y2 * sk + z2 * sl];
              best = std::max(best, v * v);
            }
          }
        }
      }
      // The supremum is symmetric in (k, l); both ordered pairs count.
      total.add(2.0 * best);
    }
  }
  return total.value();
}

// sum_l sup_z sum_{k != l} sigma_k^2(f - S_z^l f) at one point.
double j_mu_inner_at(const TabulatedFunction& f, std::size_t x) {
  const auto& space = f.space();
  const std::size_t n = space.num_axes();
  CompensatedSum total;
  std::vector<double> h;
  for (std::size_t l = 0; l < n; ++l) {
    double best = 0.0;
    for (std::size_t z = 0; z < space.axis(l).size(); ++z) {
      CompensatedSum acc;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == l) continue;
        const auto& axis = space.axis(k);
        h.resize(axis.size());
        CompensatedSum mean;
        for (std::size_t j = 0; j < axis.size(); ++j) {
          const std::size_t xj = with_coordinate(space, x, k, j);
          h[j] = f[xj] - f[with_coordinate(space, xj, l, z)];
          mean.add(axis.weight(j) * h[j]);
        }
        const double m = mean.value();
        CompensatedSum var;
        for (std::size_t j = 0; j < axis.size(); ++j) {
          const double d = h[j] - m;
          var.add(axis.weight(j) * d * d);
        }
        acc.add(var.value());
      }
      best = std::max(best, acc.value());
    }
    total.add(best);
  }
  return total.value();
}

ConfigurationSup sup_over_configurations(const TabulatedFunction& f,
                                         const std::function<double(std::size_t)>& objective,
                                         const InteractionOptions& options) {
  const auto& space = f.space();
  const std::size_t count = space.configuration_count();
  std::size_t best_index = 0;
  double best = objective(0);
  bool approximate = false;

  if (count <= options.exact_cap) {
    for (std::size_t i = 1; i < count; ++i) {
      const double v = objective(i);
      if (v > best) {
        best = v;
        best_index = i;
      }
    }
  } else {
    approximate = true;
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<std::size_t> pick(0, count - 1);
    for (std::size_t r = 0; r <= options.restarts; ++r) {
      std::size_t cur = r == 0 ? 0 : pick(rng);
      double cur_v = objective(cur);
      bool improved = true;
      while (improved) {
        improved = false;
        for (std::size_t k = 0; k < space.num_axes(); ++k) {
          for (std::size_t y = 0; y < space.axis(k).size(); ++y) {
            const std::size_t cand = with_coordinate(space, cur, k, y);
            const double v = objective(cand);
            if (v > cur_v) {
              cur_v = v;
              cur = cand;
              improved = true;
            }
          }
        }
      }
      if (cur_v > best || (cur_v == best && cur < best_index)) {
        best = cur_v;
        best_index = cur;
      }
    }
  }
  return {best, space.configuration_at(best_index), approximate};
}

// Entropy of the beta-tilt of a finite distribution; values are centered
// first. For small beta * range the log-partition is formed with expm1/log1p.
double tilted_entropy(std::span<const double> weights, std::span<const double> values,
                      double beta) {
  if (beta == 0.0) return 0.0;
  CompensatedSum mean_acc;
  for (std::size_t i = 0; i < values.size(); ++i) mean_acc.add(weights[i] * values[i]);
  const double mean = mean_acc.value();
  double spread = 0.0;
  for (double v : values) spread = std::max(spread, std::abs(v - mean));

  double s;
  if (beta * spread <= 1.0) {
    CompensatedSum a, b, c;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double v = values[i] - mean;
      const double e = std::expm1(beta * v);
      a.add(weights[i] * e);
      b.add(weights[i] * v * e);
      c.add(weights[i] * v);
    }
    const double z = 1.0 + a.value();
    s = beta * (b.value() + c.value()) / z - std::log1p(a.value());
  } else {
    double top = -spread;
    for (double v : values) top = std::max(top, v - mean);
    CompensatedSum z, num;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double v = values[i] - mean;
      const double e = weights[i] * std::exp(beta * (v - top));
      z.add(e);
      num.add(e * v);
    }
    s = beta * num.value() / z.value() - (beta * top + std::log(z.value()));
  }
  return std::max(0.0, s);
}

}  // namespace

ConfigurationSup interaction_j_squared(const TabulatedFunction& f,
                                       const InteractionOptions& options) {
  return sup_over_configurations(
      f, [&](std::size_t x) { return j_squared_at(f, x); }, options);
}

double interaction_j(const TabulatedFunction& f, const InteractionOptions& options) {
  return std::sqrt(interaction_j_squared(f, options).value);
}

ConfigurationSup interaction_j_mu_inner(const TabulatedFunction& f,
                                        const InteractionOptions& options) {
  return sup_over_configurations(
      f, [&](std::size_t x) { return j_mu_inner_at(f, x); }, options);
}

double interaction_j_mu(const TabulatedFunction& f, const InteractionOptions& options) {
  return 2.0 * std::sqrt(interaction_j_mu_inner(f, options).value);
}

double crude_interaction_bound(const TabulatedFunction& f) {
  const auto& space = f.space();
  const std::size_t n = space.num_axes();
  double best = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k + 1; l < n; ++l) {
      const std::size_t sk = space.stride(k), sl = space.stride(l);
      const std::size_t nk = space.axis(k).size(), nl = space.axis(l).size();
      for (std::size_t x = 0; x < space.configuration_count(); ++x) {
        if (space.coordinate(x, k) != 0 || space.coordinate(x, l) != 0) continue;
        for (std::size_t y = 0; y < nk; ++y) {
          for (std::size_t y2 = y + 1; y2 < nk; ++y2) {
            for (std::size_t z = 0; z < nl; ++z) {
              for (std::size_t z2 = z + 1; z2 < nl; ++z2) {
                const double v = f[x + y * sk + z * sl] - f[x + y2 * sk + z * sl] -
                                 f[x + y * sk + z2 * sl] + f[x + y2 * sk + z2 * sl];
                // Swapping y and y' flips the sign, so the signed max is |v|.
                best = std::max(best, std::abs(v));
              }
            }
          }
        }
      }
    }
  }
  return static_cast<double>(n) * best;
}

InteractionReport interaction_report(const TabulatedFunction& f,
                                     const InteractionOptions& options) {
  const auto j2 = interaction_j_squared(f, options);
  const auto jm = interaction_j_mu_inner(f, options);
  InteractionReport r;
  r.j = std::sqrt(j2.value);
  r.j_mu = 2.0 * std::sqrt(jm.value);
  r.crude = crude_interaction_bound(f);
  r.argmax_config = j2.argmax;
  r.approximate = j2.approximate || jm.approximate;
  return r;
}

nlohmann::json to_json(const InteractionReport& report) {
  return {{"j", report.j},
          {"j_mu", report.j_mu},
          {"crude", report.crude},
          {"argmax_config", report.argmax_config},
          {"approximate", report.approximate}};
}

GibbsState::GibbsState(TabulatedFunction f, double beta) : f_(std::move(f)), beta_(beta) {
  if (!(beta_ >= 0.0) || !std::isfinite(beta_)) {
    throw PreconditionError("gibbs: beta must be finite and nonnegative");
  }
  const auto& space = f_.space();
  const double top = f_.max();
  tilted_.resize(f_.size());
  CompensatedSum z;
  for (std::size_t i = 0; i < f_.size(); ++i) {
    tilted_[i] = space.measure(i) * std::exp(beta_ * (f_[i] - top));
    z.add(tilted_[i]);
  }
  const double zv = z.value();
  for (double& p : tilted_) p /= zv;
  log_z_ = beta_ == 0.0 ? 0.0 : beta_ * top + std::log(zv);
}

GibbsState gibbs(const TabulatedFunction& f, double beta) { return GibbsState(f, beta); }

double gibbs_expectation(const GibbsState& state, const TabulatedFunction& g) {
  require_same_space(state.function(), g);
  CompensatedSum s;
  const auto& p = state.tilted();
  for (std::size_t i = 0; i < g.size(); ++i) s.add(p[i] * g[i]);
  return s.value();
}

double gibbs_variance(const GibbsState& state, const TabulatedFunction& g) {
  const double m = gibbs_expectation(state, g);
  CompensatedSum s;
  const auto& p = state.tilted();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = g[i] - m;
    s.add(p[i] * d * d);
  }
  return std::max(0.0, s.value());
}

double log_mgf_centered(const TabulatedFunction& f, double beta) {
  const auto& space = f.space();
  const double mean = expectation(f);
  double spread = 0.0;
  for (double v : f.values()) spread = std::max(spread, std::abs(v - mean));
  if (std::abs(beta) * spread <= 1.0) {
    CompensatedSum a;
    for (std::size_t i = 0; i < f.size(); ++i) a.add(space.measure(i) * std::expm1(beta * (f[i] - mean)));
    return std::log1p(a.value());
  }
  double top = -std::numeric_limits<double>::infinity();
  for (double v : f.values()) top = std::max(top, beta * (v - mean));
  CompensatedSum z;
  for (std::size_t i = 0; i < f.size(); ++i) z.add(space.measure(i) * std::exp(beta * (f[i] - mean) - top));
  return top + std::log(z.value());
}

double entropy(const TabulatedFunction& f, double beta) {
  if (!(beta >= 0.0)) throw PreconditionError("entropy: beta must be nonnegative");
  return tilted_entropy(f.space().measures(), f.values(), beta);
}

TabulatedFunction conditional_entropy(const TabulatedFunction& f, std::size_t k, double beta) {
  if (!(beta >= 0.0)) throw PreconditionError("conditional_entropy: beta must be nonnegative");
  const auto& space = f.space();
  if (k >= space.num_axes()) throw std::out_of_range("conditional_entropy: axis out of range");
  const auto& axis = space.axis(k);
  const std::size_t stride = space.stride(k);
  std::vector<double> out(f.size()), fiber(axis.size());
  detail::for_each_fiber(space, k, [&](std::size_t base) {
    for (std::size_t j = 0; j < axis.size(); ++j) fiber[j] = f[base + j * stride];
    const double s = tilted_entropy(axis.weights(), fiber, beta);
    for (std::size_t j = 0; j < axis.size(); ++j) out[base + j * stride] = s;
  });
  return TabulatedFunction(f.space_ptr(), std::move(out));
}

double herbst_log_mgf(const TabulatedFunction& f, double beta, double quad_tol) {
  if (!(beta > 0.0)) throw PreconditionError("herbst_log_mgf: beta must be positive");
  const double opening = std::min(1e-3, beta);
  const double limit = 0.5 * variance(f);
  const auto integrand = [&](double g) { return entropy(f, g) / (g * g); };
  // Two-point panel on [0, opening]: the 0/0 at the origin is replaced by its limit.
  double integral = 0.5 * opening * (limit + integrand(opening));
  if (beta > opening) {
    QuadratureOptions opt;
    opt.abs_tol = 0.5 * quad_tol / beta;
    integral += adaptive_simpson(integrand, opening, beta, opt).value;
  }
  return beta * integral;
}

double entropy_fluctuation(const TabulatedFunction& f, double beta, double quad_tol) {
  if (!(beta >= 0.0)) throw PreconditionError("entropy_fluctuation: beta must be nonnegative");
  if (beta == 0.0) return 0.0;
  const auto integrand = [&](double s) { return s * gibbs_variance(gibbs(f, s), f); };
  QuadratureOptions opt;
  opt.abs_tol = quad_tol;
  return adaptive_simpson(integrand, 0.0, beta, opt).value;
}

}  // namespace bic
