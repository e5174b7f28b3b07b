#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bic/core_space.hpp"
#include "bic/functionals.hpp"
#include "bic/rng.hpp"

namespace bic {

using WideCount = unsigned __int128;
std::string to_string(WideCount v);

/// C(n, k) exactly. Throws OverflowError when it does not fit 64 bits.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);
/// C(n, k) in 128 bits; throws OverflowError beyond that.
WideCount binomial_wide(std::uint64_t n, std::uint64_t k);

/// Symmetric kernel g: X^m -> [-1, 1] on real-valued points.
struct Kernel {
  std::string name;
  std::size_t m = 2;
  bool symmetric = true;
  std::function<double(std::span<const double>)> fn;

  /// Evaluates g; throws PreconditionError when the value leaves [-1, 1] or the
  /// argument count is not m.
  double operator()(std::span<const double> args) const;
};

/// prod x_i, clipped to [-1, 1].
Kernel product_kernel(std::size_t m);
/// (sum x_i) / m.
Kernel mean_kernel(std::size_t m);
/// +1 when all arguments share a sign, -1 otherwise.
Kernel sign_agreement_kernel(std::size_t m);
/// g given by a table over points^m in row-major order; arguments must be
/// members of `points`.
Kernel tabulated_kernel(std::vector<double> points, std::vector<double> table, std::size_t m);
/// {"points":[...], "table":[...]}; m is inferred from the table length.
Kernel kernel_from_json(const nlohmann::json& doc);
/// "product", "mean-pair" or "sign-agreement".
Kernel builtin_kernel(const std::string& name, std::size_t m);

/// Finite base set X with its distribution.
struct BaseSet {
  std::vector<double> points;
  FiniteAxis measure;

  static BaseSet uniform(std::vector<double> points);
};

struct UStatProblem {
  Kernel kernel;
  std::size_t n = 0;
  BaseSet base;

  /// Throws PreconditionError unless n > m >= 2.
  void validate() const;
};

/// C(n,m)^{-1} sum over increasing index tuples of g(x_j1, ..., x_jm).
double evaluate_u(const Kernel& kernel, std::span<const double> sample);

inline constexpr std::size_t kSigma1ExactCap = 1'000'000;

/// Var_y(E_{x ~ mu^{m-1}} g(y, x)), exact over the base set.
double sigma1_squared(const Kernel& kernel, const BaseSet& base, std::size_t cap = kSigma1ExactCap);

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

/// Unbiased Monte Carlo estimate of sigma_1^2 for a sampler of the base
/// distribution: average of g(y,x1) g(y,x2) - g(y',x3) g(y'',x4).
McEstimate sigma1_squared_mc(const Kernel& kernel, const std::function<double(Rng&)>& sampler,
                             std::size_t samples, std::uint64_t seed);

/// Denominators of the two exponents: Pr <= prefactor * exp(-n t^2 / denominator).
double ustat_denominator(std::size_t n, std::size_t m, double sigma1sq, double t);
double arcones_denominator(std::size_t n, std::size_t m, double sigma1sq, double t);
/// Coefficient of t in the Arcones denominator: 2^{m+2} m^m sqrt((n-1)/n) + 2/(3m).
double arcones_t_coefficient(std::size_t n, std::size_t m);

/// 2 exp(-n t^2 / (2 m^2 s + m^2 (m-1)^2 / (n-m) + 16 m^2 t / 3)).
double ustat_bound(std::size_t n, std::size_t m, double sigma1sq, double t);
/// 4 exp(-n t^2 / (2 m^2 s + (2^{m+2} m^m sqrt((n-1)/n) + 2/(3m)) t)).
double arcones_bound(std::size_t n, std::size_t m, double sigma1sq, double t);

struct Crossover {
  /// Exponent comparison: smallest t in (1e-6, 10) beyond which the first
  /// exponent is at least as strong as Arcones'.
  bool found = false;
  double t = 0.0;
  double product = 0.0;  ///< (n - m) t
  double closed_form_t = 0.0;
  bool monotone = false;
  /// Comparison of the full bounds including the prefactors 2 and 4.
  bool literal_found = false;
  double literal_t = 0.0;
};

Crossover crossover(std::size_t m, double sigma1sq, std::size_t n);

struct IntersectingPairs {
  WideCount exact = 0;  ///< ordered pairs (S, S') of m-subsets with S and S' intersecting
  WideCount subsets = 0;
  double ratio = 0.0;        ///< (C(n,m) - C(n-m,m)) / C(n,m)
  double ratio_bound = 0.0;  ///< m^2 / (n - m)
  bool ratio_bound_ok = false;
  /// exact <= C(n,m) m^2 / (n - m): the count bound without the second factor C(n,m).
  bool unsquared_bound_ok = false;
};

IntersectingPairs intersecting_pairs_count(std::size_t n, std::size_t m);
/// Brute-force count over all pairs of m-subsets; n <= 20.
WideCount intersecting_pairs_enumerated(std::size_t n, std::size_t m);

/// u as a table on X^n with product measure.
TabulatedFunction ustat_as_function(const UStatProblem& problem,
                                    std::size_t cap = kDefaultConfigurationCap);

/// Hypothesis chain behind the U-statistic bound, evaluated exactly.
struct UStatChain {
  double sigma1sq = 0.0;
  double max_deviation = 0.0;  ///< max_k sup(u - E_k u)
  double deviation_bound = 0.0;  ///< 2m/n
  double j = 0.0;
  double j_bound_tight = 0.0;  ///< 4m(m-1)/sqrt(n(n-1))
  double j_bound = 0.0;        ///< 4m^2/n
  double e_scv = 0.0;
  /// (m^2/n) s + m^2 (m-1)^2 / (2 n (n-m)): the bound after dividing by 2.
  double e_scv_halved_bound = 0.0;
  /// (m^2/n) s + m^2 (m-1)^2 / (n (n-m)).
  double e_scv_bound = 0.0;
};

UStatChain ustat_chain_check(const UStatProblem& problem, const InteractionOptions& options = {});

}  // namespace bic
