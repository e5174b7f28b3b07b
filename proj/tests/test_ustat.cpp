#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bic/errors.hpp"
#include "bic/operators.hpp"
#include "bic/ustat.hpp"
#include "oracles.hpp"

using namespace bic;

namespace {

Kernel product_pair() { return product_kernel(2); }

double two_sided_tail(const TabulatedFunction& f, double t) {
  const long double m = oracle::mean(f);
  long double p = 0.0L;
  for (const auto& c : oracle::configurations(f.space()))
    if (std::abs(f.at(c) - m) > t) p += oracle::prob(f.space(), c);
  return double(p);
}

// Subsets of {0..n-1} of size m as index vectors.
void subsets(std::size_t n, std::size_t m, std::size_t start, std::vector<std::size_t>& cur,
             std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() == m) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < n; ++i) {
    cur.push_back(i);
    subsets(n, m, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

TEST_CASE("binomials") {
  CHECK(binomial(10, 3) == 120);
  CHECK(binomial(5, 0) == 1);
  CHECK(binomial(3, 5) == 0);
  CHECK(binomial(62, 31) == 465428353255261088ULL);
  CHECK_THROWS_AS(binomial(70, 35), OverflowError);
  CHECK(to_string(binomial_wide(70, 35)) == "112186277816662845432");
  CHECK_THROWS_AS(binomial_wide(140, 70), OverflowError);
  CHECK(to_string(WideCount(0)) == "0");
}

TEST_CASE("kernels") {
  const auto g = product_pair();
  std::vector<double> a{0.5, -0.5};
  CHECK(g(a) == doctest::Approx(-0.25));
  const auto mean = mean_kernel(3);
  std::vector<double> b{1.0, 0.0, -0.5};
  CHECK(mean(b) == doctest::Approx(1.0 / 6.0));
  const auto sign = sign_agreement_kernel(2);
  std::vector<double> same{1.0, 2.0}, diff{1.0, -2.0};
  CHECK(sign(same) == 1.0);
  CHECK(sign(diff) == -1.0);
  CHECK_THROWS_AS(g(b), PreconditionError);
  CHECK_THROWS_AS(tabulated_kernel({0.0, 1.0}, {0.0, 2.0, 2.0, 0.0}, 2)(a), PreconditionError);

  const auto tab = kernel_from_json(nlohmann::json{{"points", {-1, 1}}, {"table", {1, -1, -1, 1}}});
  CHECK(tab.m == 2);
  std::vector<double> pm{-1.0, 1.0};
  CHECK(tab(pm) == -1.0);
  CHECK_THROWS(kernel_from_json(nlohmann::json{{"points", {-1, 1}}, {"table", {1, -1, 1}}}));
  CHECK_THROWS(kernel_from_json(nlohmann::json{{"points", {-1, 1}}, {"table", {1, 1, 1, 1}}, {"extra", 1}}));
  CHECK(builtin_kernel("mean-pair", 2).name == "mean-pair");
  CHECK_THROWS(builtin_kernel("nope", 2));

  // Symmetry under permutations.
  std::vector<double> args{0.3, -0.7, 0.9};
  for (const auto& k : {product_kernel(3), mean_kernel(3), sign_agreement_kernel(3)}) {
    const double ref = k(args);
    std::vector<double> p = args;
    std::sort(p.begin(), p.end());
    do {
      CHECK(k(p) == doctest::Approx(ref).epsilon(1e-15));
    } while (std::next_permutation(p.begin(), p.end()));
  }
}

TEST_CASE("evaluate_u") {
  const auto g = product_pair();
  std::vector<double> ones{1, 1, 1}, mixed{1, -1, 1};
  CHECK(evaluate_u(g, ones) == 1.0);
  CHECK(evaluate_u(g, mixed) == doctest::Approx(-1.0 / 3.0));
  const auto c = tabulated_kernel({-1.0, 1.0}, {0.4, 0.4, 0.4, 0.4}, 2);
  CHECK(evaluate_u(c, mixed) == doctest::Approx(0.4));
  std::vector<double> one{1.0};
  CHECK_THROWS_AS(evaluate_u(g, one), PreconditionError);
}

TEST_CASE("sigma1 squared") {
  const auto base = BaseSet::uniform({-1.0, 1.0});
  CHECK(sigma1_squared(product_pair(), base) == doctest::Approx(0.0));
  CHECK(sigma1_squared(mean_kernel(2), base) == doctest::Approx(0.25));
  CHECK(sigma1_squared(tabulated_kernel({-1.0, 1.0}, {0.3, 0.3, 0.3, 0.3}, 2), base) == doctest::Approx(0.0));
  CHECK_THROWS_AS(sigma1_squared(mean_kernel(4), BaseSet::uniform({-1.0, 0.0, 1.0}), 10), CapacityError);

  auto sampler = [](Rng& rng) { return uniform01(rng) < 0.5 ? -1.0 : 1.0; };
  const auto mc = sigma1_squared_mc(mean_kernel(2), sampler, 200000, 7);
  CHECK(mc.samples == 200000);
  CHECK(std::abs(mc.mean - 0.25) <= 4.0 * mc.stderr_);
  const auto mc0 = sigma1_squared_mc(product_pair(), sampler, 200000, 7);
  CHECK(std::abs(mc0.mean) <= 4.0 * mc0.stderr_);
}

TEST_CASE("tail bounds") {
  CHECK(ustat_bound(10, 2, 0.25, 0.5) == doctest::Approx(2.0 * std::exp(-2.5 / (2.0 + 0.5 + 32.0 / 3.0))).epsilon(1e-14));
  CHECK(ustat_bound(10, 2, 0.25, 0.5) == doctest::Approx(1.6542).epsilon(1e-4));
  CHECK(ustat_bound(10, 2, 0.25, 1e-9) == doctest::Approx(2.0));
  CHECK(arcones_bound(10, 2, 0.25, 1e-9) == doctest::Approx(4.0));
  const double coeff = 64.0 * std::sqrt(0.9) + 1.0 / 3.0;
  CHECK(arcones_t_coefficient(10, 2) == doctest::Approx(coeff).epsilon(1e-15));
  CHECK(arcones_bound(10, 2, 0.25, 0.5) == doctest::Approx(4.0 * std::exp(-2.5 / (2.0 + coeff * 0.5))).epsilon(1e-14));
  CHECK(arcones_t_coefficient(100000000, 2) == doctest::Approx(64.0 + 1.0 / 3.0).epsilon(1e-8));
  // sigma1sq = 0, m = 2: the denominator tends to 16 m^2 t / 3, so exponent / n -> -3t/64.
  const std::size_t n = 100000000;
  const double t = 0.2;
  CHECK(-t * t / ustat_denominator(n, 2, 0.0, t) == doctest::Approx(-3.0 * t / 64.0).epsilon(1e-6));
}

TEST_CASE("exact U-statistic tails respect the bound") {
  for (std::size_t m : {2u, 3u}) {
    for (const auto& kernel : {product_kernel(m), mean_kernel(m), sign_agreement_kernel(m)}) {
      UStatProblem problem{kernel, 6, BaseSet::uniform({-1.0, 0.5, 1.0})};
      const auto u = ustat_as_function(problem);
      const double s = sigma1_squared(kernel, problem.base);
      for (double t : {0.05, 0.1, 0.2, 0.4, 0.8})
        CHECK(two_sided_tail(u, t) <= ustat_bound(problem.n, m, s, t) + 1e-12);
    }
  }
}

TEST_CASE("crossover") {
  const double quoted[] = {0.0, 0.0, 0.12, 6e-2, 1e-2};
  for (std::size_t m : {2u, 3u, 4u}) {
    for (std::size_t n : {10u, 50u, 200u}) {
      for (double s : {0.0, 0.25}) {
        const auto c = crossover(m, s, n);
        REQUIRE(c.found);
        CHECK(c.monotone);
        CHECK(c.product == doctest::Approx((n - m) * c.t));
        CHECK(c.t == doctest::Approx(c.closed_form_t).epsilon(1e-6));
        CHECK(c.product >= quoted[m] / 2.0);
        CHECK(c.product <= quoted[m] * 2.0);
        // Beyond the crossover the first exponent is the stronger one.
        CHECK(ustat_denominator(n, m, s, 2 * c.t) <= arcones_denominator(n, m, s, 2 * c.t));
        CHECK(ustat_denominator(n, m, s, 0.5 * c.t) > arcones_denominator(n, m, s, 0.5 * c.t));
        // The full bounds, prefactors included, do not cross on the grid.
        CHECK_FALSE(c.literal_found);
      }
    }
  }
}

TEST_CASE("intersecting pairs") {
  const auto p4 = intersecting_pairs_count(4, 2);
  CHECK(to_string(p4.exact) == "30");
  CHECK(p4.ratio == doctest::Approx(5.0 / 6.0));
  CHECK(p4.ratio_bound == doctest::Approx(2.0));
  CHECK(p4.ratio_bound_ok);
  // The count bound without the squared binomial fails here: 30 > 6 * 4 / 2.
  CHECK_FALSE(p4.unsquared_bound_ok);
  const auto p5 = intersecting_pairs_count(5, 2);
  CHECK(to_string(p5.exact) == "70");
  CHECK(p5.ratio == doctest::Approx(0.7));
  CHECK(p5.ratio_bound_ok);

  for (std::size_t m : {2u, 3u}) {
    for (std::size_t n = m + 1; n <= 8; ++n) {
      std::vector<std::vector<std::size_t>> all;
      std::vector<std::size_t> cur;
      subsets(n, m, 0, cur, all);
      std::uint64_t count = 0;
      for (const auto& a : all)
        for (const auto& b : all) {
          bool meet = false;
          for (auto i : a) meet = meet || std::find(b.begin(), b.end(), i) != b.end();
          count += meet;
        }
      CHECK(intersecting_pairs_count(n, m).exact == WideCount(count));
      CHECK(intersecting_pairs_enumerated(n, m) == WideCount(count));
      CHECK(intersecting_pairs_count(n, m).ratio_bound_ok);
    }
  }
}

TEST_CASE("hypothesis chain on finite base sets") {
  for (std::size_t m : {2u, 3u}) {
    for (const auto& points : {std::vector<double>{-1.0, 1.0}, std::vector<double>{-1.0, 0.2, 1.0}}) {
      for (const auto& kernel : {product_kernel(m), mean_kernel(m), sign_agreement_kernel(m)}) {
        for (std::size_t n = m + 1; n <= 7; ++n) {
          UStatProblem problem{kernel, n, BaseSet::uniform(points)};
          const auto c = ustat_chain_check(problem);
          CHECK(c.max_deviation <= c.deviation_bound + 1e-12);
          CHECK(c.j <= c.j_bound_tight + 1e-10);
          CHECK(c.j_bound_tight <= c.j_bound + 1e-12);
          CHECK(c.e_scv <= c.e_scv_bound + 1e-10);
        }
      }
    }
  }
}

TEST_CASE("halved variance bound fails for the degenerate product kernel") {
  // u = mean of x_i x_j on uniform {-1,1}^n has E[Sigma^2(u)] = 4/(n(n-1)),
  // above 2/(n(n-2)) for n >= 4.
  for (std::size_t n = 4; n <= 7; ++n) {
    UStatProblem problem{product_pair(), n, BaseSet::uniform({-1.0, 1.0})};
    const auto c = ustat_chain_check(problem);
    CHECK(c.e_scv == doctest::Approx(4.0 / (n * (n - 1.0))).epsilon(1e-12));
    CHECK(c.e_scv_halved_bound == doctest::Approx(2.0 / (n * (n - 2.0))).epsilon(1e-12));
    CHECK(c.e_scv > c.e_scv_halved_bound);
    CHECK(c.e_scv <= c.e_scv_bound);
  }
}

TEST_CASE("problem validation") {
  UStatProblem bad{product_pair(), 2, BaseSet::uniform({-1.0, 1.0})};
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  UStatProblem ok{product_pair(), 3, BaseSet::uniform({-1.0, 1.0})};
  CHECK_NOTHROW(ok.validate());
}
