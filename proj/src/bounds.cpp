#include "bic/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bic/detail/fiber.hpp"
#include "bic/errors.hpp"
#include "bic/operators.hpp"
#include "bic/summation.hpp"
#include "bic/table.hpp"

namespace bic {
namespace {

const char* const kIngredientOrder[] = {"E_scv", "sup_scv", "sigma2", "b", "j", "j_mu"};

BoundReport make_report(Theorem theorem, double t, double denominator) {
  BoundReport r;
  r.theorem = theorem;
  r.t = t;
  r.denominator = denominator;
  r.value = denominator > 0.0 ? std::exp(-t * t / denominator) : 0.0;
  return r;
}

void require(bool ok, const char* what) {
  if (!ok) throw PreconditionError(what);
}

void require_finite_nonneg(double v, const char* what) {
  require(std::isfinite(v) && v >= 0.0, what);
}

double max_deviation(const TabulatedFunction& f, bool upper) {
  double best = 0.0;
  for (std::size_t k = 0; k < f.space().num_axes(); ++k) {
    const auto ek = cond_expectation(f, k);
    for (std::size_t i = 0; i < f.size(); ++i) {
      best = std::max(best, upper ? f[i] - ek[i] : ek[i] - f[i]);
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(Theorem theorem) {
  switch (theorem) {
    case Theorem::SupBernstein: return "SUP_BERNSTEIN";
    case Theorem::Main: return "MAIN";
    case Theorem::VarianceCorollary: return "VARIANCE_COROLLARY";
  }
  return "UNKNOWN";
}

nlohmann::json to_json(const BoundReport& report) {
  nlohmann::json ingredients = nlohmann::json::object();
  for (const auto& [k, v] : report.ingredients) ingredients[k] = v;
  return {{"theorem", std::string(to_string(report.theorem))},
          {"t", report.t},
          {"value", report.value},
          {"denominator", report.denominator},
          {"two_sided", report.two_sided},
          {"ingredients", std::move(ingredients)}};
}

std::string bound_csv_header() { return "theorem,t,value,two_sided,E_scv,sup_scv,sigma2,b,j,j_mu"; }

std::string to_csv_row(const BoundReport& report) {
  std::ostringstream out;
  out << to_string(report.theorem) << ',' << format_double(report.t) << ','
      << format_double(report.value) << ',' << (report.two_sided ? "true" : "false");
  for (const char* key : kIngredientOrder) {
    out << ',';
    if (auto it = report.ingredients.find(key); it != report.ingredients.end()) {
      out << format_double(it->second);
    }
  }
  return out.str();
}

double psi(double t) {
  if (std::abs(t) < 1.0) return t * t * psi_over_square(t);
  const double e = std::exp(t);
  return t * e - e + 1.0;
}

double psi_over_square(double t) {
  if (std::abs(t) < 1.0) {
    // sum_n t^n / ((n + 2) n!)
    double term = 1.0, sum = 0.5;
    for (int n = 1; n < 40; ++n) {
      term *= t / n;
      const double add = term / (n + 2);
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return psi(t) / (t * t);
}

double upper_deviation(const TabulatedFunction& f) { return max_deviation(f, true); }
double lower_deviation(const TabulatedFunction& f) { return max_deviation(f, false); }

double sup_scv(const TabulatedFunction& f) { return scv(f).max(); }
double expected_scv(const TabulatedFunction& f) { return expectation(scv(f)); }

double max_coordinate_range(const TabulatedFunction& f) {
  const auto& space = f.space();
  double best = 0.0;
  for (std::size_t k = 0; k < space.num_axes(); ++k) {
    const std::size_t stride = space.stride(k), size = space.axis(k).size();
    detail::for_each_fiber(space, k, [&](std::size_t base) {
      double lo = f[base], hi = f[base];
      for (std::size_t j = 1; j < size; ++j) {
        lo = std::min(lo, f[base + j * stride]);
        hi = std::max(hi, f[base + j * stride]);
      }
      best = std::max(best, hi - lo);
    });
  }
  return best;
}

double bounded_difference_variance_term(const TabulatedFunction& f) {
  const auto& space = f.space();
  std::vector<CompensatedSum> acc(f.size());
  for (std::size_t k = 0; k < space.num_axes(); ++k) {
    const std::size_t stride = space.stride(k), size = space.axis(k).size();
    detail::for_each_fiber(space, k, [&](std::size_t base) {
      double lo = f[base], hi = f[base];
      for (std::size_t j = 1; j < size; ++j) {
        lo = std::min(lo, f[base + j * stride]);
        hi = std::max(hi, f[base + j * stride]);
      }
      const double r2 = (hi - lo) * (hi - lo);
      for (std::size_t j = 0; j < size; ++j) acc[base + j * stride].add(r2);
    });
  }
  double best = 0.0;
  for (const auto& a : acc) best = std::max(best, a.value());
  return 0.25 * best;
}

BoundReport sup_bernstein_bound(const TabulatedFunction& f, double b, double t) {
  require(t > 0.0, "sup_bernstein_bound: t must be positive");
  const double needed = upper_deviation(f);
  if (!(b >= needed - 1e-12)) {
    throw PreconditionError("sup_bernstein_bound: b = " + format_double(b) +
                            " is below max_k sup(f - E_k f) = " + format_double(needed));
  }
  const double s = sup_scv(f);
  auto r = make_report(Theorem::SupBernstein, t, 2.0 * s + 2.0 * b * t / 3.0);
  r.ingredients = {{"sup_scv", s}, {"b", b}};
  return r;
}

BoundReport main_bound(double e_scv, double b, double j_mu, double t) {
  require_finite_nonneg(e_scv, "main_bound: e_scv must be nonnegative");
  require_finite_nonneg(b, "main_bound: b must be nonnegative");
  require_finite_nonneg(j_mu, "main_bound: j_mu must be nonnegative");
  require(t > 0.0, "main_bound: t must be positive");
  auto r = make_report(Theorem::Main, t, 2.0 * e_scv + (2.0 * b / 3.0 + j_mu) * t);
  r.ingredients = {{"E_scv", e_scv}, {"b", b}, {"j_mu", j_mu}};
  return r;
}

BoundReport variance_corollary_bound(double sigma2, double j, double j_mu, double b, double t) {
  require_finite_nonneg(sigma2, "variance_corollary_bound: sigma2 must be nonnegative");
  require_finite_nonneg(j, "variance_corollary_bound: j must be nonnegative");
  require_finite_nonneg(j_mu, "variance_corollary_bound: j_mu must be nonnegative");
  require_finite_nonneg(b, "variance_corollary_bound: b must be nonnegative");
  require(t > 0.0, "variance_corollary_bound: t must be positive");
  auto r = make_report(Theorem::VarianceCorollary, t,
                       2.0 * sigma2 + 0.5 * j * j + (2.0 * b / 3.0 + j_mu) * t);
  r.ingredients = {{"sigma2", sigma2}, {"j", j}, {"j_mu", j_mu}, {"b", b}};
  return r;
}

BoundReport main_bound_for(const TabulatedFunction& f, double t,
                           const InteractionOptions& options) {
  return main_bound(expected_scv(f), upper_deviation(f), interaction_j_mu(f, options), t);
}

BoundReport variance_corollary_bound_for(const TabulatedFunction& f, double t,
                                         const InteractionOptions& options) {
  return variance_corollary_bound(variance(f), interaction_j(f, options),
                                  interaction_j_mu(f, options), upper_deviation(f), t);
}

BoundReport two_sided(BoundReport report, const TabulatedFunction& f) {
  if (report.two_sided) return report;
  const auto it = report.ingredients.find("b");
  if (it == report.ingredients.end()) throw PreconditionError("two_sided: report carries no b");
  const double needed = lower_deviation(f);
  if (!(it->second >= needed - 1e-12)) {
    throw PreconditionError("two_sided: -f needs b >= " + format_double(needed) + ", report has " +
                            format_double(it->second));
  }
  report.value = std::min(1.0, 2.0 * report.value);
  report.two_sided = true;
  return report;
}

HoudreGap houdre_gap(const TabulatedFunction& f, const InteractionOptions& options) {
  const double j = interaction_j(f, options);
  return {expected_scv(f) - variance(f), 0.25 * j * j};
}

double bias_second_difference_bound(const TabulatedFunction& f) {
  const auto& space = f.space();
  const std::size_t n = space.num_axes();
  const std::size_t count = space.configuration_count();
  CompensatedSum total;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = k + 1; i < n; ++i) {
      const auto& ak = space.axis(k);
      const auto& ai = space.axis(i);
      const double work = static_cast<double>(count) * ak.size() * ai.size();
      if (work > static_cast<double>(space.cap())) {
        throw CapacityError("bias_second_difference_bound: " + format_double(work) +
                            " terms exceed cap");
      }
      const std::size_t sk = space.stride(k), si = space.stride(i);
      CompensatedSum pair;
      for (std::size_t x = 0; x < count; ++x) {
        const std::size_t xk = space.coordinate(x, k), xi = space.coordinate(x, i);
        const std::size_t base = x - xk * sk - xi * si;
        for (std::size_t yk = 0; yk < ak.size(); ++yk) {
          for (std::size_t yi = 0; yi < ai.size(); ++yi) {
            const double d = f[x] - f[base + xk * sk + yi * si] - f[base + yk * sk + xi * si] +
                             f[base + yk * sk + yi * si];
            pair.add(space.measure(x) * ak.weight(yk) * ai.weight(yi) * d * d);
          }
        }
      }
      // (k, i) and (i, k) contribute the same expectation.
      total.add(2.0 * pair.value());
    }
  }
  return 0.25 * total.value();
}

double chatterjee_variance(const TabulatedFunction& f, ChatterjeeMethod method) {
  const auto& space = f.space();
  const std::size_t n = space.num_axes();
  if (method == ChatterjeeMethod::Factored) {
    CompensatedSum total;
    TabulatedFunction prefix_mean = f;
    for (std::size_t k = 0; k < n; ++k) {
      total.add(expectation(cond_variance(prefix_mean, k)));
      prefix_mean = cond_expectation(prefix_mean, k);
    }
    return total.value();
  }

  const std::size_t count = space.configuration_count();
  const double pairs = static_cast<double>(count) * static_cast<double>(count);
  if (pairs > static_cast<double>(space.cap())) {
    throw CapacityError("chatterjee_variance: " + format_double(pairs) +
                        " terms exceed cap for literal enumeration");
  }
  CompensatedSum total;
  for (std::size_t x = 0; x < count; ++x) {
    for (std::size_t xc = 0; xc < count; ++xc) {
      const double w = space.measure(x) * space.measure(xc);
      if (w == 0.0) continue;
      // prev = index of X^[k-1]; first k-1 coordinates from the copy.
      std::size_t prev = x;
      for (std::size_t k = 0; k < n; ++k) {
        const std::ptrdiff_t shift =
            (static_cast<std::ptrdiff_t>(space.coordinate(xc, k)) -
             static_cast<std::ptrdiff_t>(space.coordinate(x, k))) *
            static_cast<std::ptrdiff_t>(space.stride(k));
        const std::size_t single = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(x) + shift);
        const std::size_t next = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(prev) + shift);
        total.add(w * (f[x] - f[single]) * (f[prev] - f[next]));
        prev = next;
      }
    }
  }
  return 0.5 * total.value();
}

double little_lemma_lhs(const TabulatedFunction& f) {
  const std::size_t n = f.space().num_axes();
  CompensatedSum total;
  for (std::size_t k = 0; k < n; ++k) {
    TabulatedFunction marginal = f;
    for (std::size_t l = 0; l < n; ++l) {
      if (l != k) marginal = cond_expectation(marginal, l);
    }
    total.add(variance(marginal));
  }
  return total.value();
}

ComplicatedInequality complicated_inequality(double a, double gamma) {
  if (!(a >= 0.0) || !std::isfinite(a)) {
    throw PreconditionError("complicated_inequality: a must be finite and nonnegative");
  }
  const double limit = 1.0 / (1.0 / 3.0 + a / 2.0);
  if (!(gamma >= 0.0 && gamma < limit)) {
    throw PreconditionError("complicated_inequality: gamma must lie in [0, " +
                            format_double(limit) + ")");
  }
  ComplicatedInequality r;
  const double ps = psi(gamma);
  const double root = a * std::sqrt(ps / 2.0);
  r.part_i = root < 1.0;
  const double shrink = 1.0 - (1.0 / 3.0 + a / 2.0) * gamma;
  r.rhs = 1.0 / (2.0 * shrink * shrink);
  if (r.part_i) {
    r.lhs = psi_over_square(gamma) / ((1.0 - root) * (1.0 - root));
    r.part_ii = r.lhs <= r.rhs * (1.0 + 1e-12);
  } else {
    r.lhs = std::numeric_limits<double>::infinity();
  }
  return r;
}

bool complicated_inequality_check(double a, double gamma) {
  return complicated_inequality(a, gamma).holds();
}

OptimizationInfimum optimization_infimum(double C, double b, double t) {
  if (!(C > 0.0 && b > 0.0 && t > 0.0)) {
    throw PreconditionError("optimization_infimum: C, b and t must be positive");
  }
  auto h = [&](double beta) { return -beta * t + C * beta * beta / (1.0 - b * beta); };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = 1.0 / b - 1e-9;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double h1 = h(x1), h2 = h(x2);
  // The iteration cap covers brackets that cannot shrink below 1e-12 in
  // double precision (large 1/b).
  for (int it = 0; it < 400 && hi - lo > 1e-12; ++it) {
    if (h1 <= h2) {
      hi = x2;
      x2 = x1;
      h2 = h1;
      x1 = hi - inv_phi * (hi - lo);
      h1 = h(x1);
    } else {
      lo = x1;
      x1 = x2;
      h1 = h2;
      x2 = lo + inv_phi * (hi - lo);
      h2 = h(x2);
    }
  }
  OptimizationInfimum r;
  r.argmin = 0.5 * (lo + hi);
  r.numeric_inf = std::min({h(r.argmin), h(lo), h(hi), 0.0});
  r.closed_form = -t * t / (2.0 * (2.0 * C + b * t));
  return r;
}

}  // namespace bic
