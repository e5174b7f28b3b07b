#include "bic/ustat.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bic/bounds.hpp"
#include "bic/errors.hpp"
#include "bic/operators.hpp"
#include "bic/summation.hpp"
#include "bic/table.hpp"

namespace bic {
namespace {

void require_orders(std::size_t n, std::size_t m) {
  if (!(m >= 2 && n > m)) {
    throw PreconditionError("U-statistic requires n > m >= 2 (got n=" + std::to_string(n) +
                            ", m=" + std::to_string(m) + ")");
  }
}

// Advances idx (increasing, values < n) to the next combination; false at the end.
bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t m = idx.size();
  std::size_t i = m;
  while (i > 0) {
    --i;
    if (idx[i] < n - m + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < m; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

int sign_class(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

}  // namespace

std::string to_string(WideCount v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

WideCount binomial_wide(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  WideCount r = 1;
  const WideCount limit = std::numeric_limits<WideCount>::max();
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) / i stays integral at every step.
    const WideCount factor = n - k + i;
    if (r > limit / factor) {
      throw OverflowError("C(" + std::to_string(n) + "," + std::to_string(k) +
                          ") exceeds 128-bit range");
    }
    r = r * factor / i;
  }
  return r;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  const WideCount r = binomial_wide(n, k);
  if (r > std::numeric_limits<std::uint64_t>::max()) {
    throw OverflowError("C(" + std::to_string(n) + "," + std::to_string(k) +
                        ") exceeds 64-bit range");
  }
  return static_cast<std::uint64_t>(r);
}

double Kernel::operator()(std::span<const double> args) const {
  if (args.size() != m) {
    throw PreconditionError("kernel '" + name + "' expects " + std::to_string(m) + " arguments");
  }
  const double v = fn(args);
  if (!(v >= -1.0 && v <= 1.0)) {
    throw PreconditionError("kernel '" + name + "' value " + format_double(v) +
                            " outside [-1, 1]");
  }
  return v;
}

Kernel product_kernel(std::size_t m) {
  return {"product", m, true, [](std::span<const double> x) {
            double p = 1.0;
            for (double v : x) p *= v;
            return std::clamp(p, -1.0, 1.0);
          }};
}

Kernel mean_kernel(std::size_t m) {
  return {"mean-pair", m, true, [m](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += v;
            return std::clamp(s / static_cast<double>(m), -1.0, 1.0);
          }};
}

Kernel sign_agreement_kernel(std::size_t m) {
  return {"sign-agreement", m, true, [](std::span<const double> x) {
            const int first = sign_class(x[0]);
            for (double v : x) {
              if (sign_class(v) != first) return -1.0;
            }
            return 1.0;
          }};
}

Kernel tabulated_kernel(std::vector<double> points, std::vector<double> table, std::size_t m) {
  if (points.empty()) throw PreconditionError("tabulated kernel: no points");
  std::size_t expected = 1;
  for (std::size_t i = 0; i < m; ++i) expected *= points.size();
  if (table.size() != expected) {
    throw PreconditionError("tabulated kernel: table has " + std::to_string(table.size()) +
                            " entries, expected " + std::to_string(expected));
  }
  for (double v : table) {
    if (!(v >= -1.0 && v <= 1.0)) throw PreconditionError("tabulated kernel: entry outside [-1, 1]");
  }
  return {"tabulated", m, true,
          [points = std::move(points), table = std::move(table)](std::span<const double> x) {
            std::size_t index = 0;
            for (double v : x) {
              const auto it = std::find(points.begin(), points.end(), v);
              if (it == points.end()) {
                throw PreconditionError("tabulated kernel: argument " + format_double(v) +
                                        " is not a tabulated point");
              }
              index = index * points.size() + static_cast<std::size_t>(it - points.begin());
            }
            return table[index];
          }};
}

Kernel kernel_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw PreconditionError("kernel: expected an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "points" && key != "table") throw PreconditionError("kernel: unknown field '" + key + "'");
  }
  if (!doc.contains("points") || !doc.contains("table")) {
    throw PreconditionError("kernel: 'points' and 'table' are required");
  }
  auto points = doc.at("points").get<std::vector<double>>();
  auto table = doc.at("table").get<std::vector<double>>();
  if (points.size() < 2) throw PreconditionError("kernel: need at least two points");
  std::size_t m = 0, size = 1;
  while (size < table.size()) {
    size *= points.size();
    ++m;
  }
  if (size != table.size() || m < 2) {
    throw PreconditionError("kernel: table length is not |points|^m for any m >= 2");
  }
  return tabulated_kernel(std::move(points), std::move(table), m);
}

Kernel builtin_kernel(const std::string& name, std::size_t m) {
  if (name == "product") return product_kernel(m);
  if (name == "mean-pair") return mean_kernel(m);
  if (name == "sign-agreement") return sign_agreement_kernel(m);
  throw PreconditionError("unknown kernel '" + name + "'");
}

BaseSet BaseSet::uniform(std::vector<double> points) {
  const std::size_t size = points.size();
  return {std::move(points), FiniteAxis::uniform(size)};
}

void UStatProblem::validate() const {
  require_orders(n, kernel.m);
  if (base.points.size() != base.measure.size()) {
    throw PreconditionError("base set: point and weight counts differ");
  }
}

double evaluate_u(const Kernel& kernel, std::span<const double> sample) {
  const std::size_t n = sample.size(), m = kernel.m;
  require_orders(n, m);
  const std::uint64_t count = binomial(n, m);
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  std::vector<double> args(m);
  CompensatedSum sum;
  do {
    for (std::size_t i = 0; i < m; ++i) args[i] = sample[idx[i]];
    sum.add(kernel(args));
  } while (next_combination(idx, n));
  return sum.value() / static_cast<double>(count);
}

double sigma1_squared(const Kernel& kernel, const BaseSet& base, std::size_t cap) {
  const std::size_t size = base.points.size();
  const std::size_t rest = kernel.m - 1;
  double tuples = 1.0;
  for (std::size_t i = 0; i < rest; ++i) tuples *= static_cast<double>(size);
  if (tuples > static_cast<double>(cap)) {
    throw CapacityError("sigma1_squared: |X|^(m-1) = " + format_double(tuples) + " exceeds cap");
  }
  std::vector<double> cond(size);
  std::vector<double> args(kernel.m);
  std::vector<std::size_t> odo(rest);
  for (std::size_t y = 0; y < size; ++y) {
    args[0] = base.points[y];
    std::fill(odo.begin(), odo.end(), 0);
    CompensatedSum acc;
    for (;;) {
      double w = 1.0;
      for (std::size_t i = 0; i < rest; ++i) {
        args[i + 1] = base.points[odo[i]];
        w *= base.measure.weight(odo[i]);
      }
      acc.add(w * kernel(args));
      std::size_t i = rest;
      while (i > 0 && ++odo[i - 1] == size) odo[--i] = 0;
      if (i == 0) break;
    }
    cond[y] = acc.value();
  }
  CompensatedSum mean;
  for (std::size_t y = 0; y < size; ++y) mean.add(base.measure.weight(y) * cond[y]);
  CompensatedSum var;
  for (std::size_t y = 0; y < size; ++y) {
    const double d = cond[y] - mean.value();
    var.add(base.measure.weight(y) * d * d);
  }
  return std::max(0.0, var.value());
}

McEstimate sigma1_squared_mc(const Kernel& kernel, const std::function<double(Rng&)>& sampler,
                             std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw PreconditionError("sigma1_squared_mc: need at least two samples");
  Rng rng = make_stream(seed, 0x51a1);
  const std::size_t m = kernel.m;
  std::vector<double> a(m), b(m), c(m), d(m);
  CompensatedSum sum, sum_sq;
  for (std::size_t s = 0; s < samples; ++s) {
    a[0] = b[0] = sampler(rng);
    c[0] = sampler(rng);
    d[0] = sampler(rng);
    for (std::size_t i = 1; i < m; ++i) {
      a[i] = sampler(rng);
      b[i] = sampler(rng);
      c[i] = sampler(rng);
      d[i] = sampler(rng);
    }
    const double v = kernel(a) * kernel(b) - kernel(c) * kernel(d);
    sum.add(v);
    sum_sq.add(v * v);
  }
  const double nn = static_cast<double>(samples);
  const double mean = sum.value() / nn;
  const double var = std::max(0.0, (sum_sq.value() - nn * mean * mean) / (nn - 1.0));
  return {mean, std::sqrt(var / nn), samples};
}

double ustat_denominator(std::size_t n, std::size_t m, double sigma1sq, double t) {
  require_orders(n, m);
  const double mm = static_cast<double>(m);
  return 2.0 * mm * mm * sigma1sq + mm * mm * (mm - 1.0) * (mm - 1.0) / static_cast<double>(n - m) +
         16.0 * mm * mm * t / 3.0;
}

double arcones_t_coefficient(std::size_t n, std::size_t m) {
  require_orders(n, m);
  const double mm = static_cast<double>(m), nn = static_cast<double>(n);
  // The last term is read as (2/3) m^{-1}.
  return std::ldexp(std::pow(mm, mm), static_cast<int>(m) + 2) * std::sqrt((nn - 1.0) / nn) +
         2.0 / (3.0 * mm);
}

double arcones_denominator(std::size_t n, std::size_t m, double sigma1sq, double t) {
  const double mm = static_cast<double>(m);
  return 2.0 * mm * mm * sigma1sq + arcones_t_coefficient(n, m) * t;
}

double ustat_bound(std::size_t n, std::size_t m, double sigma1sq, double t) {
  if (!(t > 0.0)) throw PreconditionError("ustat_bound: t must be positive");
  return 2.0 * std::exp(-static_cast<double>(n) * t * t / ustat_denominator(n, m, sigma1sq, t));
}

double arcones_bound(std::size_t n, std::size_t m, double sigma1sq, double t) {
  if (!(t > 0.0)) throw PreconditionError("arcones_bound: t must be positive");
  return 4.0 * std::exp(-static_cast<double>(n) * t * t / arcones_denominator(n, m, sigma1sq, t));
}

Crossover crossover(std::size_t m, double sigma1sq, std::size_t n) {
  require_orders(n, m);
  constexpr double lo_t = 1e-6, hi_t = 10.0;
  const double nn = static_cast<double>(n);
  // Positive where the Arcones exponent is stronger.
  auto exponent_gap = [&](double t) {
    return nn * t * t / arcones_denominator(n, m, sigma1sq, t) -
           nn * t * t / ustat_denominator(n, m, sigma1sq, t);
  };
  // Positive where the full first bound is larger than Arcones'.
  auto literal_gap = [&](double t) {
    return std::log(ustat_bound(n, m, sigma1sq, t)) - std::log(arcones_bound(n, m, sigma1sq, t));
  };

  Crossover r;
  const double mm = static_cast<double>(m);
  r.closed_form_t = mm * mm * (mm - 1.0) * (mm - 1.0) /
                    (static_cast<double>(n - m) * (arcones_t_coefficient(n, m) - 16.0 * mm * mm / 3.0));

  constexpr int kGrid = 2000;
  std::vector<double> grid(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i) {
    grid[i] = lo_t * std::pow(hi_t / lo_t, static_cast<double>(i) / kGrid);
  }

  auto locate = [&](const auto& gap, bool& found, double& t_out, bool* monotone) {
    int last_positive = -1, sign_changes = 0;
    bool prev = gap(grid[0]) > 0.0;
    for (int i = 0; i <= kGrid; ++i) {
      const bool pos = gap(grid[i]) > 0.0;
      if (pos) last_positive = i;
      if (pos != prev) ++sign_changes;
      prev = pos;
    }
    if (monotone) *monotone = sign_changes <= 1;
    // Never settling below Arcones, or never above it, both mean no crossover.
    if (last_positive == kGrid || last_positive < 0) return;
    double a = grid[last_positive], b = grid[last_positive + 1];
    while (b - a > 1e-9 * b) {
      const double mid = 0.5 * (a + b);
      (gap(mid) > 0.0 ? a : b) = mid;
    }
    found = true;
    t_out = b;
  };

  locate(exponent_gap, r.found, r.t, &r.monotone);
  if (r.found) r.product = static_cast<double>(n - m) * r.t;
  locate(literal_gap, r.literal_found, r.literal_t, nullptr);
  return r;
}

IntersectingPairs intersecting_pairs_count(std::size_t n, std::size_t m) {
  if (!(m >= 1 && n > m)) throw PreconditionError("intersecting_pairs_count: requires n > m >= 1");
  IntersectingPairs r;
  r.subsets = binomial_wide(n, m);
  const WideCount disjoint_partners = binomial_wide(n - m, m);
  const WideCount partners = r.subsets - disjoint_partners;
  if (partners != 0 && r.subsets > std::numeric_limits<WideCount>::max() / partners) {
    throw OverflowError("intersecting_pairs_count: count exceeds 128-bit range");
  }
  r.exact = r.subsets * partners;
  const double mm = static_cast<double>(m);
  r.ratio = static_cast<double>(partners) / static_cast<double>(r.subsets);
  r.ratio_bound = mm * mm / static_cast<double>(n - m);
  r.ratio_bound_ok = r.ratio <= r.ratio_bound;
  r.unsquared_bound_ok = static_cast<double>(r.exact) <= static_cast<double>(r.subsets) * r.ratio_bound;
  return r;
}

WideCount intersecting_pairs_enumerated(std::size_t n, std::size_t m) {
  if (n > 20) throw CapacityError("intersecting_pairs_enumerated: n must be at most 20");
  std::vector<std::uint32_t> subsets;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) == m) subsets.push_back(mask);
  }
  WideCount count = 0;
  for (auto s : subsets) {
    for (auto t : subsets) count += (s & t) != 0;
  }
  return count;
}

TabulatedFunction ustat_as_function(const UStatProblem& problem, std::size_t cap) {
  problem.validate();
  auto space = FiniteProductSpace::make(std::vector<FiniteAxis>(problem.n, problem.base.measure), cap);
  std::vector<double> sample(problem.n);
  return TabulatedFunction::from(space, [&](const Configuration& c) {
    for (std::size_t i = 0; i < c.size(); ++i) sample[i] = problem.base.points[c[i]];
    return evaluate_u(problem.kernel, sample);
  });
}

UStatChain ustat_chain_check(const UStatProblem& problem, const InteractionOptions& options) {
  const auto u = ustat_as_function(problem);
  const double n = static_cast<double>(problem.n), m = static_cast<double>(problem.kernel.m);
  UStatChain r;
  r.sigma1sq = sigma1_squared(problem.kernel, problem.base);
  r.max_deviation = upper_deviation(u);
  r.deviation_bound = 2.0 * m / n;
  r.j = interaction_j(u, options);
  r.j_bound_tight = 4.0 * m * (m - 1.0) / std::sqrt(n * (n - 1.0));
  r.j_bound = 4.0 * m * m / n;
  r.e_scv = expected_scv(u);
  const double lead = m * m / n * r.sigma1sq;
  const double pairs = m * m * (m - 1.0) * (m - 1.0) / (n * (n - m));
  r.e_scv_halved_bound = lead + 0.5 * pairs;
  r.e_scv_bound = lead + pairs;
  return r;
}

}  // namespace bic
