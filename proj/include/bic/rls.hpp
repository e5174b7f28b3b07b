#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "bic/core_space.hpp"
#include "bic/rng.hpp"

// Regularized least squares w = argmin (1/n) sum (<w,x_i> - y_i)^2 + lambda |w|^2
// on the unit ball times [-1, 1].
namespace bic::rls {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Example {
  Vector x;
  double y = 0.0;
};

struct RlsProblem {
  std::size_t dim = 1;
  double lambda = 0.5;
  std::vector<Example> sample;

  std::size_t n() const { return sample.size(); }
  /// |x| <= 1 + 1e-12, |y| <= 1, lambda in (0, 1), n >= 1, matching dimensions.
  void validate() const;
};

struct Atom {
  Vector x;
  double y = 0.0;
  double p = 0.0;
};

/// Finite distribution over Z = ball x [-1, 1].
struct Population {
  std::size_t dim = 1;
  std::vector<Atom> atoms;

  /// Probabilities sum to 1 within 1e-12; atoms lie in Z.
  void validate() const;
  std::size_t draw_index(Rng& rng) const;
  Example draw(Rng& rng) const;
  Example example(std::size_t atom) const { return {atoms[atom].x, atoms[atom].y}; }
};

struct RlsSolution {
  Vector w;
  Matrix gram;    ///< G = (1/n) sum x_i x_i^T
  Vector moment;  ///< g = (1/n) sum y_i x_i
  double residual = 0.0;  ///< |(G + lambda) w - g| / max(|g|, 1e-300)
};

/// Cholesky solve of (G + lambda I) w = g. Throws NumericalError when the
/// relative residual exceeds 1e-8.
RlsSolution solve(const RlsProblem& problem);

double empirical_risk(const RlsSolution& solution, const RlsProblem& problem);
/// empirical risk + lambda |w|^2.
double objective(const RlsSolution& solution, const RlsProblem& problem);
double true_risk(const RlsSolution& solution, const Population& population);
/// sum_i (<w, x_i> - y_i)^2.
double residual_sum_of_squares(const RlsSolution& solution, const RlsProblem& problem);

/// R(z) - R_hat(z), one solve.
double generalization_gap(const RlsProblem& problem, const Population& population);

/// (R - R_hat)(z) - (R - R_hat)(z with the k-th example replaced).
double stability_difference(const RlsProblem& problem, std::size_t k, const Example& replacement,
                            const Population& population);

struct DerivativeCheck {
  double first_norm = 0.0;   ///< max over the lattice of |dw/dt|
  double mixed_norm = 0.0;   ///< max over the lattice of |d^2 w / ds dt|
  double first_bound = 0.0;  ///< 8 lambda^{-3/2} / n
  double mixed_bound = 0.0;  ///< 32 lambda^{-5/2} / n^2
  double first_tolerance = 0.0;
  double mixed_tolerance = 0.0;
  double gram_derivative = 0.0;    ///< max |dG/dt|, |dG/ds| (operator norm)
  double moment_derivative = 0.0;  ///< max |dg/dt|, |dg/ds|
  double gram_mixed = 0.0;         ///< max |d^2 G / ds dt|, zero for k != l
  double b_bound = 0.0;            ///< 4 / n
  /// Central differences at h and h/2 disagree by more than 10% above the
  /// rounding floor.
  bool step_unstable = false;

  bool first_ok() const { return first_norm <= first_bound + first_tolerance; }
  bool mixed_ok() const { return mixed_norm <= mixed_bound + mixed_tolerance; }
  bool b_ok() const {
    return gram_derivative <= b_bound + 1e-6 * b_bound && moment_derivative <= b_bound + 1e-6 * b_bound;
  }
  bool ok() const { return first_ok() && mixed_ok() && b_ok(); }
};

/// Finite-difference derivatives of w along z(s, t), where example k moves
/// from zk0 to zk1 as t goes from 0 to 1 and example l from zl0 to zl1 with s.
/// The lattice is ((i + 1/2) / grid, (j + 1/2) / grid); h is the step in t and s.
DerivativeCheck derivative_bound_check(const RlsProblem& problem, std::size_t k, std::size_t l,
                                       const Example& zk0, const Example& zk1,
                                       const Example& zl0, const Example& zl1,
                                       std::size_t grid = 3, double h = 1e-4);

/// exp(-n t^2 / (2 n e_scv + c lambda^{-3} t)).
double theorem6_bound(double e_scv, std::size_t n, double lambda, double c, double t);
/// The t at which theorem6_bound equals delta (positive root of the quadratic).
double theorem6_deviation(double e_scv, std::size_t n, double lambda, double c, double delta);
/// sqrt(2 e_scv ln(1/delta)) + c lambda^{-3} ln(1/delta) / n, which dominates
/// theorem6_deviation.
double theorem6_deviation_simple(double e_scv, std::size_t n, double lambda, double c,
                                 double delta);

struct ScvEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t replications = 0;
};

/// Monte Carlo E[Sigma^2(R - R_hat)]: per replication a sample of size n and,
/// for each k, one independent replacement pair (y, y') contributing
/// (1/2)(D^k_{y,y'} f)^2. Replication r uses stream r of `seed`.
ScvEstimate empirical_scv(const Population& population, std::size_t n, double lambda,
                          std::size_t replications, std::uint64_t seed);

/// R - R_hat as a table over atoms^n with the population's product measure.
TabulatedFunction gap_function(const Population& population, std::size_t n, double lambda,
                               std::size_t cap = kDefaultConfigurationCap);

/// Random problem: x uniform in the unit ball, y uniform in [-1, 1].
RlsProblem random_problem(Rng& rng, std::size_t dim, std::size_t n, double lambda);
/// Random example in Z.
Example random_example(Rng& rng, std::size_t dim);
/// Population with `atoms` random atoms and Dirichlet probabilities.
Population random_population(Rng& rng, std::size_t dim, std::size_t atoms);

/// {"dim": d, "lambda": l, "population": [{"x": [...], "y": v, "p": q}, ...], "n": n}
struct Setup {
  std::size_t dim = 1;
  double lambda = 0.5;
  std::size_t n = 4;
  Population population;
};
Setup setup_from_json(const nlohmann::json& doc);
nlohmann::json setup_to_json(const Setup& setup);

}  // namespace bic::rls
