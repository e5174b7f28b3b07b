#include <doctest.h>

#include <cmath>

#include "bic/operators.hpp"
#include "bic/rng.hpp"
#include "oracles.hpp"

using namespace bic;

namespace {

SpacePtr binary2() { return FiniteProductSpace::uniform(2, 2); }

TabulatedFunction from(const SpacePtr& s, double (*fn)(const Configuration&)) {
  return TabulatedFunction::from(s, fn);
}

double x1(const Configuration& c) { return double(c[0]); }
double x2(const Configuration& c) { return double(c[1]); }
double x1_plus_x2(const Configuration& c) { return double(c[0] + c[1]); }
double x1_times_x2(const Configuration& c) { return double(c[0] * c[1]); }

void check_equal(const TabulatedFunction& a, const TabulatedFunction& b, double tol = 1e-12) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= tol);
}

SpacePtr random_space(Rng& rng) {
  std::vector<FiniteAxis> axes;
  const auto n = uniform_index(rng, 2, 4);
  for (std::size_t k = 0; k < n; ++k) axes.emplace_back(dirichlet_weights(rng, uniform_index(rng, 2, 4)));
  return FiniteProductSpace::make(std::move(axes));
}

TabulatedFunction random_function(Rng& rng, const SpacePtr& space) {
  std::vector<double> v(space->configuration_count());
  for (auto& x : v) x = uniform(rng, -1.0, 1.0);
  return TabulatedFunction(space, std::move(v));
}

}  // namespace

TEST_CASE("substitute") {
  auto s = binary2();
  auto f = from(s, x1_times_x2);
  check_equal(substitute(f, 1, 1), from(s, x1));
  auto g = from(s, x1);
  check_equal(substitute(g, 1, 0), g);
  check_equal(substitute(substitute(f, 0, 1), 0, 0), substitute(f, 0, 1));
  CHECK_THROWS_AS(substitute(f, 2, 0), std::out_of_range);
  CHECK_THROWS_AS(substitute(f, 0, 2), std::out_of_range);
}

TEST_CASE("difference") {
  auto s = binary2();
  auto f = from(s, x1_times_x2);
  check_equal(difference(f, 0, 1, 0), from(s, x2));
  check_equal(difference(f, 0, 1, 1), TabulatedFunction::constant(s, 0.0));
  check_equal(difference(from(s, x2), 0, 1, 0), TabulatedFunction::constant(s, 0.0));
  check_equal(difference(f, 1, 0, 1), difference(f, 1, 1, 0) * -1.0);
}

TEST_CASE("conditional expectation") {
  auto s = binary2();
  auto e = cond_expectation(from(s, x1_plus_x2), 0);
  check_equal(e, from(s, x2) + 0.5);
  auto c = TabulatedFunction::constant(s, 2.5);
  check_equal(cond_expectation(c, 1), c);

  Rng rng = make_stream(1, 0);
  for (int trial = 0; trial < 20; ++trial) {
    auto space = random_space(rng);
    auto f = random_function(rng, space);
    check_equal(cond_expectation(cond_expectation(f, 0), 1), cond_expectation(cond_expectation(f, 1), 0));
    check_equal(cond_expectation(cond_expectation(f, 0), 0), cond_expectation(f, 0));
    CHECK(independent_of(cond_expectation(f, 1), 1));
  }
}

TEST_CASE("conditional variance examples") {
  auto s = binary2();
  check_equal(cond_variance(from(s, x1_times_x2), 0), from(s, x2) * 0.25);
  check_equal(cond_variance(from(s, x2), 0), TabulatedFunction::constant(s, 0.0));
  check_equal(cond_variance(from(s, x1_plus_x2), 0), TabulatedFunction::constant(s, 0.25));
}

TEST_CASE("both conditional variance formulas agree with the oracle") {
  Rng rng = make_stream(2, 0);
  for (int trial = 0; trial < 50; ++trial) {
    auto space = random_space(rng);
    auto f = random_function(rng, space);
    for (std::size_t k = 0; k < space->num_axes(); ++k) {
      const auto a = cond_variance(f, k);
      const auto b = cond_variance_pairwise(f, k);
      for (const auto& c : enumerate(*space)) {
        const auto i = space->index_of(c);
        CHECK(a[i] >= 0.0);
        CHECK(std::abs(a[i] - b[i]) <= 1e-10);
        CHECK(std::abs(a[i] - (double)oracle::cond_var(f, k, c)) <= 1e-13);
      }
      check_equal(substitute(a, k, 0), a, 0.0);
    }
  }
}

TEST_CASE("scv") {
  auto s = binary2();
  check_equal(scv(from(s, x1_plus_x2)), TabulatedFunction::constant(s, 0.5));
  check_equal(scv(from(s, x1_times_x2)), from(s, x1_plus_x2) * 0.25);
  check_equal(scv(TabulatedFunction::constant(s, 3.0)), TabulatedFunction::constant(s, 0.0));
}

TEST_CASE("d_operator") {
  auto s = binary2();
  check_equal(d_operator(from(s, x1_plus_x2) * 0.25), from(s, x1_plus_x2) * (1.0 / 16.0));
  check_equal(d_operator(TabulatedFunction::constant(s, 1.0)), TabulatedFunction::constant(s, 0.0));
  check_equal(d_operator(from(s, x1)), from(s, x1));  // x1^2 = x1 on {0,1}
}

TEST_CASE("second difference") {
  auto s = binary2();
  check_equal(second_difference(from(s, x1_times_x2), 0, 1, 1, 0, 1, 0), TabulatedFunction::constant(s, 1.0));
  check_equal(second_difference(from(s, x1_plus_x2), 0, 1, 1, 0, 1, 0), TabulatedFunction::constant(s, 0.0));
  check_equal(second_difference(from(s, x1), 0, 1, 1, 0, 1, 0), TabulatedFunction::constant(s, 0.0));
  CHECK_THROWS_AS(second_difference(from(s, x1), 0, 0, 1, 0, 1, 0), std::invalid_argument);

  Rng rng = make_stream(3, 0);
  for (int trial = 0; trial < 20; ++trial) {
    auto space = random_space(rng);
    auto f = random_function(rng, space);
    const auto a = second_difference(f, 0, 1, 1, 0, 1, 0);
    const auto b = second_difference(f, 1, 0, 1, 0, 1, 0);
    check_equal(a, b);
    CHECK(independent_of(a, 0));
    CHECK(independent_of(a, 1));
  }
}

TEST_CASE("commutation of operators on different axes") {
  Rng rng = make_stream(4, 0);
  for (int trial = 0; trial < 30; ++trial) {
    auto space = random_space(rng);
    auto f = random_function(rng, space);
    const std::size_t k = 0, l = 1;
    const std::size_t y = uniform_index(rng, 0, space->axis(k).size() - 1);
    const std::size_t z = uniform_index(rng, 0, space->axis(l).size() - 1);
    check_equal(substitute(substitute(f, k, y), l, z), substitute(substitute(f, l, z), k, y));
    check_equal(substitute(cond_expectation(f, l), k, y), cond_expectation(substitute(f, k, y), l));
    check_equal(substitute(cond_variance(f, l), k, y), cond_variance(substitute(f, k, y), l));
  }
}

TEST_CASE("Efron-Stein and equality for sums") {
  Rng rng = make_stream(5, 0);
  for (int trial = 0; trial < 50; ++trial) {
    auto space = random_space(rng);
    auto f = random_function(rng, space);
    CHECK(variance(f) <= expectation(scv(f)) + 1e-12);
    CHECK(std::abs(expectation(scv(f)) - (double)oracle::expected_scv(f)) <= 1e-13);

    std::vector<std::vector<double>> parts(space->num_axes());
    for (std::size_t k = 0; k < parts.size(); ++k)
      for (std::size_t y = 0; y < space->axis(k).size(); ++y) parts[k].push_back(uniform(rng, -1, 1));
    auto g = TabulatedFunction::from(space, [&](const Configuration& c) {
      double s = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) s += parts[k][c[k]];
      return s;
    });
    CHECK(std::abs(variance(g) - expectation(scv(g))) <= 1e-10);
  }
}
