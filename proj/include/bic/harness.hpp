#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bic/core_space.hpp"
#include "bic/rng.hpp"
#include "bic/table.hpp"

namespace bic::harness {

enum class ValueDistribution { Uniform, Sparse, SumPlusPerturbation };
enum class WeightDistribution { Uniform, Dirichlet };

std::string to_string(ValueDistribution v);
std::string to_string(WeightDistribution w);
ValueDistribution parse_value_distribution(const std::string& s);
WeightDistribution parse_weight_distribution(const std::string& s);

struct SizeRange {
  std::size_t lo = 1;
  std::size_t hi = 1;
};

struct RandomInstanceSpec {
  SizeRange n_axes{1, 4};
  SizeRange axis_size{2, 4};
  ValueDistribution values = ValueDistribution::Uniform;
  /// Perturbation size for SumPlusPerturbation.
  double epsilon = 0.1;
  /// Probability that an entry is nonzero for Sparse.
  double density = 0.3;
  WeightDistribution weights = WeightDistribution::Uniform;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Instance {
  std::uint64_t seed = 0;
  TabulatedFunction f;
};

/// Pure function of `spec`, including its seed. Values lie in [-1, 1].
/// SumPlusPerturbation yields (sum_k g_k(x_k) + epsilon h(x)) / (1 + epsilon).
Instance generate_instance(const RandomInstanceSpec& spec);
/// Seed of instance `index` in a suite rooted at `root`.
std::uint64_t instance_seed(std::uint64_t root, std::size_t index);

/// Pr{f - Ef > t}, or Pr{|f - Ef| > t} when two_sided.
double exact_tail(const TabulatedFunction& f, double t, bool two_sided = false);

struct TailEstimate {
  double t = 0.0;
  std::optional<double> exact;
  std::optional<double> mc_estimate;
  std::optional<double> mc_stderr;
  std::size_t n_samples = 0;
};

/// Monte Carlo estimate of Pr{value - center > t} over `n_samples` draws
/// from `draw` (stream 0 of `seed`). stderr = sqrt(p(1-p)/N).
TailEstimate mc_tail(const std::function<double(Rng&)>& draw, double center, double t,
                     std::size_t n_samples, std::uint64_t seed);
/// As mc_tail, with one set of draws shared by every t in the grid.
std::vector<TailEstimate> mc_tail_grid(const std::function<double(Rng&)>& draw, double center,
                                       const std::vector<double>& ts, std::size_t n_samples,
                                       std::uint64_t seed);
/// Draws configurations from the product measure and evaluates f.
TailEstimate mc_tail(const TabulatedFunction& f, double t, std::size_t n_samples,
                     std::uint64_t seed);

struct Tolerances {
  double identity = 1e-10;    ///< relative
  double inequality = 1e-10;  ///< absolute
  double quadrature = 1e-6;
};

struct SuiteOptions {
  /// Instances that also run the entropy and quadrature checks.
  std::size_t entropy_instances = 50;
  std::vector<double> betas{0.25, 0.5, 1.0, 2.0};
  std::size_t t_grid = 20;
  std::size_t optimization_samples = 100;
  Tolerances tolerances;
  /// Replaces the Efron-Stein check by its negation, to exercise failure reporting.
  bool inject_bug = false;
  /// Restricts the run to these check groups; empty runs all.
  std::vector<std::string> groups;
};

struct CheckResult {
  std::string name;
  std::string group;
  std::size_t instances = 0;
  std::size_t evaluations = 0;
  /// Largest observed excess of the checked quantity over its target; a check
  /// passes when this stays within the tolerance.
  std::optional<double> max_excess;
  double tolerance = 0.0;
  std::size_t failures = 0;
  std::optional<std::uint64_t> witness_seed;

  bool passed() const { return failures == 0; }
};

struct SuiteReport {
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::vector<CheckResult> checks;

  bool passed() const;
  const CheckResult* find(const std::string& name) const;
  nlohmann::json to_json() const;
  Table to_table() const;
};

/// Check names in report order, with their groups.
std::vector<std::pair<std::string, std::string>> registered_checks();

/// Runs every registered check on `count` instances derived from spec.seed.
/// count == 0 yields an empty report.
SuiteReport run_property_suite(const RandomInstanceSpec& spec, std::size_t count,
                               const SuiteOptions& options = {});

}  // namespace bic::harness
