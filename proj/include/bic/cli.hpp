#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bic/core_space.hpp"
#include "bic/harness.hpp"

namespace bic::cli {

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitConfig = 2;

struct VerifyParams {
  std::size_t count = 200;
  harness::RandomInstanceSpec spec;
  std::size_t entropy_instances = 50;
  std::size_t t_grid = 20;
  bool inject_bug = false;
  std::vector<std::string> groups;
};

struct UStatParams {
  /// Built-in kernel name; ignored when kernel_file is set.
  std::string kernel = "product";
  std::string kernel_file;
  std::vector<std::size_t> orders{2, 3, 4};
  std::vector<std::size_t> sizes{10, 50, 200};
  std::vector<double> points{-1.0, 1.0};
  std::vector<double> weights;  ///< empty means uniform
  std::vector<double> ts{0.01, 0.05, 0.1, 0.2, 0.5};
  std::vector<double> crossover_sigma1sq{0.0, 0.25};
  std::size_t mc_samples = 2000;
  /// Skip Monte Carlo tails that need more kernel evaluations than this.
  double mc_budget = 5e7;
};

struct RlsParams {
  /// Setup JSON; empty selects the built-in two-atom demo.
  std::string setup_file;
  double c = 1.0;
  std::size_t t_grid = 20;
  std::size_t mc_samples = 100000;
  std::size_t scv_replications = 200;
  std::vector<double> lambda_sweep{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t derivative_grid = 3;
};

struct BoundsTableParams {
  std::size_t instances = 10;
  harness::RandomInstanceSpec spec;
  std::size_t t_grid = 5;
};

struct NormalLimitParams {
  /// "sum" (J = 0) or "bounded-interaction".
  std::string instance = "sum";
  std::vector<std::size_t> sizes{2, 4, 8, 12, 16};
  double t = 1.0;
};

struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  std::string output_path;
  std::string format = "csv";
  std::size_t cap = kDefaultConfigurationCap;
  VerifyParams verify;
  UStatParams ustat;
  RlsParams rls;
  BoundsTableParams bounds_table;
  NormalLimitParams normal_limit;
};

/// Reads a config document into `config`; unknown fields are rejected.
void apply_config(const nlohmann::json& doc, RunConfig& config);

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_ustat(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_rls(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_bounds_table(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_normal_limit_demo(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command line: subcommand plus --config, --seed, --out, --format,
/// --count, --cap. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bic::cli
