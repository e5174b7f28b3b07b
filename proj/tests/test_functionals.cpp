#include <doctest.h>

#include <cmath>

#include "bic/errors.hpp"
#include "bic/functionals.hpp"
#include "bic/operators.hpp"
#include "bic/quadrature.hpp"
#include "bic/rng.hpp"
#include "oracles.hpp"

using namespace bic;

namespace {

SpacePtr binary(std::size_t n) { return FiniteProductSpace::uniform(n, 2); }

TabulatedFunction x1(const SpacePtr& s) {
  return TabulatedFunction::from(s, [](const Configuration& c) { return double(c[0]); });
}
TabulatedFunction sum(const SpacePtr& s) {
  return TabulatedFunction::from(s, [](const Configuration& c) {
    double v = 0.0;
    for (auto y : c) v += double(y);
    return v;
  });
}
TabulatedFunction product(const SpacePtr& s) {
  return TabulatedFunction::from(s, [](const Configuration& c) { return double(c[0] * c[1]); });
}

SpacePtr random_space(Rng& rng, std::size_t max_axes = 4) {
  std::vector<FiniteAxis> axes;
  const auto n = uniform_index(rng, 2, max_axes);
  for (std::size_t k = 0; k < n; ++k) axes.emplace_back(dirichlet_weights(rng, uniform_index(rng, 2, 3)));
  return FiniteProductSpace::make(std::move(axes));
}

TabulatedFunction random_function(Rng& rng, const SpacePtr& space) {
  std::vector<double> v(space->configuration_count());
  for (auto& x : v) x = uniform(rng, -1.0, 1.0);
  return TabulatedFunction(space, std::move(v));
}

}  // namespace

TEST_CASE("interaction functionals on small examples") {
  auto s = binary(2);
  CHECK(interaction_j(sum(s)) == doctest::Approx(0.0));
  CHECK(interaction_j_mu(sum(s)) == doctest::Approx(0.0));
  CHECK(crude_interaction_bound(sum(s)) == doctest::Approx(0.0));

  CHECK(interaction_j(product(s)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(interaction_j_mu(product(s)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(crude_interaction_bound(product(s)) == doctest::Approx(2.0));

  CHECK(interaction_j(product(s) * 3.0) == doctest::Approx(3.0 * interaction_j(product(s))));
  CHECK(interaction_j(product(s) * -3.0) == doctest::Approx(3.0 * interaction_j(product(s))));

  const auto report = interaction_report(product(s));
  CHECK_FALSE(report.approximate);
  CHECK(report.argmax_config.size() == 2);
  const auto doc = to_json(report);
  for (const char* key : {"j", "j_mu", "crude", "argmax_config", "approximate"}) CHECK(doc.contains(key));
}

TEST_CASE("interaction functionals match brute force") {
  Rng rng = make_stream(11, 0);
  for (int trial = 0; trial < 40; ++trial) {
    auto space = random_space(rng);
    auto f = random_function(rng, space);
    const double j2 = interaction_j_squared(f).value;
    CHECK(std::abs(j2 - (double)oracle::j_squared(f)) <= 1e-12);
    CHECK(std::abs(interaction_j_mu(f) - (double)oracle::j_mu(f)) <= 1e-12);
    const auto r = interaction_report(f);
    CHECK(r.j_mu <= r.j + 1e-10);
    CHECK(r.j <= r.crude + 1e-10);
    const double a = uniform(rng, 0.1, 5.0);
    CHECK(std::abs(interaction_j(f * a) - a * r.j) <= 1e-10 * std::max(1.0, a * r.j));
    CHECK(std::abs(interaction_j_mu(f * a) - a * r.j_mu) <= 1e-10 * std::max(1.0, a * r.j_mu));
  }
}

TEST_CASE("approximate supremum above the exact cap") {
  Rng rng = make_stream(12, 0);
  auto space = FiniteProductSpace::uniform(5, 3);
  auto f = random_function(rng, space);
  InteractionOptions options;
  options.exact_cap = 10;
  const auto approx = interaction_j_squared(f, options);
  const auto exact = interaction_j_squared(f);
  CHECK(approx.approximate);
  CHECK_FALSE(exact.approximate);
  CHECK(approx.value <= exact.value + 1e-12);
  CHECK(approx.value > 0.0);
  // Same seed, same answer.
  CHECK(interaction_j_squared(f, options).value == approx.value);
}

TEST_CASE("self-bounding of the sum of conditional variances") {
  Rng rng = make_stream(13, 0);
  for (int trial = 0; trial < 30; ++trial) {
    auto space = random_space(rng);
    auto f = random_function(rng, space);
    const auto sigma = scv(f);
    const auto d = d_operator(sigma);
    const double jm = interaction_j_mu(f);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] <= jm * jm * sigma[i] + 1e-10);
  }
}

TEST_CASE("gibbs state") {
  auto s = binary(1);
  auto f = x1(s);
  CHECK(gibbs(f, 0.0).log_z() == 0.0);
  CHECK(gibbs(TabulatedFunction::constant(s, 2.0), 1.5).log_z() == doctest::Approx(3.0));
  const auto g = gibbs(f, 1.0);
  CHECK(g.log_z() == doctest::Approx(std::log((1.0 + std::exp(1.0)) / 2.0)).epsilon(1e-15));
  CHECK(gibbs_expectation(g, f) == doctest::Approx(std::exp(1.0) / (1.0 + std::exp(1.0))).epsilon(1e-15));
  CHECK(gibbs_expectation(g, TabulatedFunction::constant(s, 4.0)) == doctest::Approx(4.0));
  CHECK(gibbs_expectation(gibbs(f, 0.0), f) == doctest::Approx(0.5));
  CHECK_THROWS_AS(gibbs(f, -1.0), PreconditionError);
  CHECK_THROWS_AS(gibbs_expectation(g, x1(binary(2))), std::invalid_argument);

  // Large beta stays finite.
  const auto hot = gibbs(f * 1000.0, 5.0);
  CHECK(std::isfinite(hot.log_z()));
  CHECK(gibbs_expectation(hot, f) == doctest::Approx(1.0));
}

TEST_CASE("entropy") {
  auto s = binary(1);
  auto f = x1(s);
  const double e = std::exp(1.0);
  CHECK(entropy(f, 0.0) == 0.0);
  CHECK(entropy(TabulatedFunction::constant(s, 7.0), 2.0) == doctest::Approx(0.0));
  CHECK(entropy(f, 1.0) == doctest::Approx(e / (1 + e) - std::log((1 + e) / 2)).epsilon(1e-13));

  Rng rng = make_stream(14, 0);
  for (int trial = 0; trial < 20; ++trial) {
    auto space = random_space(rng);
    auto g = random_function(rng, space);
    for (double beta : {0.25, 0.5, 1.0, 2.0}) {
      const double v = entropy(g, beta);
      CHECK(v >= 0.0);
      CHECK(std::abs(v - (double)oracle::entropy(g, beta)) <= 1e-12);
      CHECK(std::abs(log_mgf_centered(g, beta) - (double)oracle::log_mgf_centered(g, beta)) <= 1e-12);
      CHECK(std::abs(entropy_fluctuation(g, beta) - v) <= 1e-7);
    }
  }
}

TEST_CASE("conditional entropy") {
  auto s = binary(2);
  auto zero = TabulatedFunction::constant(s, 0.0);
  auto f = product(s);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto c = conditional_entropy(TabulatedFunction::constant(s, 1.0), k, 1.0);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(0.0));
    const auto z = conditional_entropy(f, k, 0.0);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(z[i] == 0.0);
    const auto h = conditional_entropy(f, k, 1.5);
    CHECK(independent_of(h, k));
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(h[i] >= 0.0);
  }
  const auto indep = conditional_entropy(x1(s), 1, 2.0);
  for (std::size_t i = 0; i < indep.size(); ++i) CHECK(indep[i] == doctest::Approx(0.0));
  CHECK_THROWS_AS(conditional_entropy(f, 2, 1.0), std::out_of_range);
}

TEST_CASE("Herbst integral") {
  auto s = binary(1);
  CHECK(herbst_log_mgf(TabulatedFunction::constant(s, 3.0), 1.0) == doctest::Approx(0.0));
  const double direct = std::log((std::exp(-0.5) + std::exp(0.5)) / 2.0);
  CHECK(std::abs(herbst_log_mgf(x1(s), 1.0) - direct) <= 1e-8);
  CHECK_THROWS_AS(herbst_log_mgf(x1(s), 0.0), PreconditionError);

  Rng rng = make_stream(15, 0);
  auto cube = binary(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = random_function(rng, cube);
    for (double beta : {0.5, 1.0, 2.0})
      CHECK(std::abs(herbst_log_mgf(f, beta) - (double)oracle::log_mgf_centered(f, beta)) <= 1e-6);
  }
}

TEST_CASE("adaptive Simpson") {
  const auto r = adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 1.0);
  CHECK(std::abs(r.value - (std::exp(1.0) - 1.0)) <= 1e-10);
  CHECK_THROWS_AS(adaptive_simpson([](double) { return std::nan(""); }, 0.0, 1.0), QuadratureError);
  QuadratureOptions tight;
  tight.abs_tol = 1e-14;
  tight.max_evaluations = 50;
  CHECK_THROWS_AS(adaptive_simpson([](double x) { return std::sqrt(x); }, 0.0, 1.0, tight), QuadratureError);
}
