#include <doctest.h>

#include <cmath>

#include "bic/core_space.hpp"
#include "bic/errors.hpp"
#include "bic/rng.hpp"
#include "oracles.hpp"

using namespace bic;

namespace {

SpacePtr uniform_space(std::vector<std::size_t> sizes) {
  std::vector<FiniteAxis> axes;
  for (auto s : sizes) axes.push_back(FiniteAxis::uniform(s));
  return FiniteProductSpace::make(std::move(axes));
}

TabulatedFunction random_function(Rng& rng, const SpacePtr& space) {
  std::vector<double> v(space->configuration_count());
  for (auto& x : v) x = uniform(rng, -1.0, 1.0);
  return TabulatedFunction(space, std::move(v));
}

}  // namespace

TEST_CASE("enumeration is row-major with the last axis fastest") {
  auto s22 = uniform_space({2, 2});
  std::vector<Configuration> seen;
  for (const auto& c : enumerate(*s22)) seen.push_back(c);
  CHECK(seen == std::vector<Configuration>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});

  auto s3 = uniform_space({3});
  seen.clear();
  for (const auto& c : enumerate(*s3)) seen.push_back(c);
  CHECK(seen == std::vector<Configuration>{{0}, {1}, {2}});

  auto s232 = uniform_space({2, 3, 2});
  seen.clear();
  for (const auto& c : enumerate(*s232)) seen.push_back(c);
  REQUIRE(seen.size() == 12);
  CHECK(seen.front() == Configuration{0, 0, 0});
  CHECK(seen.back() == Configuration{1, 2, 1});
  CHECK(seen == oracle::configurations(*s232));
  for (std::size_t i = 0; i < seen.size(); ++i) {
    CHECK(s232->index_of(seen[i]) == i);
    CHECK(s232->configuration_at(i) == seen[i]);
  }
}

TEST_CASE("configuration cap") {
  CHECK_THROWS_AS(FiniteProductSpace(std::vector<FiniteAxis>(3, FiniteAxis::uniform(10)), 999),
                  CapacityError);
  CHECK_NOTHROW(FiniteProductSpace(std::vector<FiniteAxis>(3, FiniteAxis::uniform(10)), 1000));
  CHECK(FiniteProductSpace(std::vector<FiniteAxis>(1, FiniteAxis::uniform(2))).cap() ==
        kDefaultConfigurationCap);
}

TEST_CASE("axis validation") {
  CHECK_THROWS(FiniteAxis({0.5, 0.6}));
  CHECK_THROWS(FiniteAxis({-0.1, 1.1}));
  CHECK_THROWS(FiniteAxis(std::vector<double>{}));
  CHECK_NOTHROW(FiniteAxis({0.25, 0.75}));
}

TEST_CASE("measure_of") {
  auto u = uniform_space({2, 2});
  for (const auto& c : enumerate(*u)) CHECK(measure_of(*u, c) == doctest::Approx(0.25));

  auto w = FiniteProductSpace::make({FiniteAxis({0.3, 0.7}), FiniteAxis({0.5, 0.5})});
  CHECK(measure_of(*w, {1, 0}) == doctest::Approx(0.35).epsilon(1e-15));

  auto single = FiniteProductSpace::make({FiniteAxis({1.0})});
  CHECK(measure_of(*single, {0}) == 1.0);
  CHECK_THROWS_AS(measure_of(*w, {2, 0}), std::out_of_range);
  CHECK_THROWS_AS(measure_of(*w, {0}), std::out_of_range);
}

TEST_CASE("measures sum to one on random spaces") {
  Rng rng = make_stream(42, 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<FiniteAxis> axes;
    const auto n = uniform_index(rng, 1, 4);
    for (std::size_t k = 0; k < n; ++k) axes.emplace_back(dirichlet_weights(rng, uniform_index(rng, 1, 4)));
    auto space = FiniteProductSpace::make(std::move(axes));
    double total = 0.0;
    for (std::size_t i = 0; i < space->configuration_count(); ++i) total += space->measure(i);
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("expectation and variance examples") {
  auto s = uniform_space({2, 2});
  auto sum = TabulatedFunction::from(s, [](const Configuration& c) { return double(c[0] + c[1]); });
  auto prod = TabulatedFunction::from(s, [](const Configuration& c) { return double(c[0] * c[1]); });
  auto five = TabulatedFunction::constant(s, 5.0);
  CHECK(expectation(sum) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(expectation(five) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(expectation(prod) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(variance(prod) == doctest::Approx(3.0 / 16.0).epsilon(1e-15));
  CHECK(variance(five) == 0.0);
  CHECK(variance(sum) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("variance against the oracle and under affine maps") {
  Rng rng = make_stream(7, 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<FiniteAxis> axes;
    const auto n = uniform_index(rng, 1, 4);
    for (std::size_t k = 0; k < n; ++k) axes.emplace_back(dirichlet_weights(rng, uniform_index(rng, 2, 4)));
    auto space = FiniteProductSpace::make(std::move(axes));
    auto f = random_function(rng, space);
    CHECK(std::abs(expectation(f) - (double)oracle::mean(f)) <= 1e-14);
    CHECK(std::abs(variance(f) - (double)oracle::var(f)) <= 1e-14);
    const double a = uniform(rng, -3.0, 3.0), b = uniform(rng, -3.0, 3.0);
    CHECK(std::abs(variance(f * a + b) - a * a * variance(f)) <= 1e-10);
  }
}

TEST_CASE("relabeling points leaves expectation and variance unchanged") {
  Rng rng = make_stream(8, 0);
  auto space = FiniteProductSpace::make({FiniteAxis({0.1, 0.2, 0.7}), FiniteAxis({0.4, 0.6})});
  auto f = random_function(rng, space);
  // Swap points 0 and 2 on axis 0.
  auto relabeled_space = FiniteProductSpace::make({FiniteAxis({0.7, 0.2, 0.1}), FiniteAxis({0.4, 0.6})});
  auto g = TabulatedFunction::from(relabeled_space, [&](const Configuration& c) {
    Configuration d = c;
    d[0] = 2 - c[0];
    return f.at(d);
  });
  CHECK(expectation(g) == doctest::Approx(expectation(f)).epsilon(1e-14));
  CHECK(variance(g) == doctest::Approx(variance(f)).epsilon(1e-14));
}

TEST_CASE("function values must be finite and sized") {
  auto s = uniform_space({2});
  CHECK_THROWS(TabulatedFunction(s, {1.0}));
  CHECK_THROWS(TabulatedFunction(s, {1.0, std::nan("")}));
  CHECK_THROWS(TabulatedFunction(s, {1.0, INFINITY}));
}

TEST_CASE("JSON round trip and unknown fields") {
  auto doc = nlohmann::json::parse(R"({"axes":[{"weights":[0.5,0.5]},{"weights":[0.25,0.75]}],
                                       "values":[1,2,3,4]})");
  auto f = function_from_json(doc);
  CHECK(f.space().num_axes() == 2);
  CHECK(f.at({1, 0}) == 3.0);
  auto again = function_from_json(function_to_json(f));
  CHECK(again.space().same_as(f.space()));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(again[i] == f[i]);

  auto bad = doc;
  bad["extra"] = 1;
  CHECK_THROWS(function_from_json(bad));
  auto bad_len = doc;
  bad_len["values"] = {1, 2, 3};
  CHECK_THROWS(function_from_json(bad_len));
}
