#pragma once

#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "bic/core_space.hpp"
#include "bic/functionals.hpp"

namespace bic {

enum class Theorem { SupBernstein, Main, VarianceCorollary };

std::string_view to_string(Theorem theorem);

/// A tail bound Pr{f - Ef > t} <= value = exp(-t^2 / denominator), together
/// with the ingredients that produced it. Two-sided reports carry the doubled
/// value.
struct BoundReport {
  Theorem theorem = Theorem::Main;
  double t = 0.0;
  double value = 1.0;
  double denominator = 0.0;
  bool two_sided = false;
  /// Subset of {E_scv, sup_scv, sigma2, b, j, j_mu}.
  std::map<std::string, double> ingredients;
};

nlohmann::json to_json(const BoundReport& report);
/// Column order of to_csv_row.
std::string bound_csv_header();
/// theorem,t,value,two_sided,E_scv,sup_scv,sigma2,b,j,j_mu; absent ingredients are empty.
std::string to_csv_row(const BoundReport& report);

/// psi(t) = t e^t - e^t + 1.
double psi(double t);
/// psi(t) / t^2, continuous at 0 with value 1/2.
double psi_over_square(double t);

/// max_k max_x (f - E_k f)(x): the smallest admissible b.
double upper_deviation(const TabulatedFunction& f);
/// max_k max_x (E_k f - f)(x): the smallest b admissible for -f.
double lower_deviation(const TabulatedFunction& f);

/// sup_x Sigma^2(f)(x).
double sup_scv(const TabulatedFunction& f);
/// E[Sigma^2(f)].
double expected_scv(const TabulatedFunction& f);
/// max_k max_x sup_{y,y'} |D^k_{y,y'} f|(x): the largest change from one coordinate.
double max_coordinate_range(const TabulatedFunction& f);

/// (1/4) sup_x sum_k sup_{y,y'} (D^k_{y,y'} f)^2(x), the bounded-difference
/// variance term.
double bounded_difference_variance_term(const TabulatedFunction& f);

/// exp(-t^2 / (2 sup_x Sigma^2(f) + 2bt/3)). Throws PreconditionError when b is
/// smaller than upper_deviation(f) (1e-12 slack) or t <= 0.
BoundReport sup_bernstein_bound(const TabulatedFunction& f, double b, double t);

/// exp(-t^2 / (2 e_scv + (2b/3 + j_mu) t)).
BoundReport main_bound(double e_scv, double b, double j_mu, double t);

/// exp(-t^2 / (2 sigma2 + j^2/2 + (2b/3 + j_mu) t)).
BoundReport variance_corollary_bound(double sigma2, double j, double j_mu, double b, double t);

/// Ingredients computed exactly from f (b = upper_deviation(f)).
BoundReport main_bound_for(const TabulatedFunction& f, double t,
                           const InteractionOptions& options = {});
BoundReport variance_corollary_bound_for(const TabulatedFunction& f, double t,
                                         const InteractionOptions& options = {});

/// Doubles a report after checking that -f satisfies the hypothesis with the
/// report's b. Throws PreconditionError otherwise.
BoundReport two_sided(BoundReport report, const TabulatedFunction& f);

struct HoudreGap {
  double gap = 0.0;    ///< E[Sigma^2(f)] - sigma^2(f)
  double bound = 0.0;  ///< J(f)^2 / 4
};
HoudreGap houdre_gap(const TabulatedFunction& f, const InteractionOptions& options = {});

/// (1/4) sum over ordered pairs k != i of
/// E[(f(X) - f(X^(i)) - f(X^(k)) + f(X^(k)(i)))^2], where X^(i) replaces X_i by
/// an independent copy. Exact over x, x'_k, x'_i.
double bias_second_difference_bound(const TabulatedFunction& f);

enum class ChatterjeeMethod {
  /// sum_k E[sigma_k^2(E_1 ... E_{k-1} f)], the same expectation after
  /// integrating out the prefix copies.
  Factored,
  /// Literal enumeration over X and an independent copy X' (count^2 terms).
  Enumerated,
};

/// 1/2 sum_k E[(f(X) - f(X^(k))) (f(X^[k-1]) - f(X^[k]))], where X^[k]
/// replaces the first k coordinates by their copies. Equals variance(f).
double chatterjee_variance(const TabulatedFunction& f,
                           ChatterjeeMethod method = ChatterjeeMethod::Factored);

/// sum_k Var_{mu_k}(E[f | X_k]).
double little_lemma_lhs(const TabulatedFunction& f);

struct ComplicatedInequality {
  bool part_i = false;   ///< a sqrt(psi(g)/2) < 1
  bool part_ii = false;  ///< lhs <= rhs
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return part_i && part_ii; }
};

/// Evaluates both parts for a >= 0 and 0 <= gamma < 1/(1/3 + a/2); throws
/// PreconditionError outside that domain.
ComplicatedInequality complicated_inequality(double a, double gamma);
bool complicated_inequality_check(double a, double gamma);

struct OptimizationInfimum {
  double numeric_inf = 0.0;
  double closed_form = 0.0;  ///< -t^2 / (2 (2C + bt))
  double argmin = 0.0;
};

/// inf over beta in [0, 1/b) of -beta t + C beta^2 / (1 - b beta), by
/// golden-section search to a 1e-12 bracket with the pole guarded at 1/b - 1e-9.
OptimizationInfimum optimization_infimum(double C, double b, double t);

}  // namespace bic
