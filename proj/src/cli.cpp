#include "bic/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "bic/bounds.hpp"
#include "bic/errors.hpp"
#include "bic/functionals.hpp"
#include "bic/operators.hpp"
#include "bic/rls.hpp"
#include "bic/summation.hpp"
#include "bic/table.hpp"
#include "bic/ustat.hpp"

namespace bic::cli {
namespace {

// Reads the fields of one JSON object and rejects anything it was not asked for.
class Block {
 public:
  Block(const nlohmann::json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError("field '" + label() + "': expected an object");
  }

  template <class T>
  void read(const std::string& key, T& target) {
    seen_.insert(key);
    if (!doc_.contains(key)) return;
    try {
      target = doc_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("field '" + name(key) + "': wrong type");
    }
  }

  void read_range(const std::string& key, harness::SizeRange& target) {
    std::vector<std::size_t> v{target.lo, target.hi};
    read(key, v);
    if (v.size() != 2 || v[0] > v[1]) throw ConfigError("field '" + name(key) + "': expected [lo, hi]");
    target = {v[0], v[1]};
  }

  Block child(const std::string& key) {
    seen_.insert(key);
    return Block(doc_.at(key), name(key));
  }
  bool has(const std::string& key) const { return doc_.contains(key); }
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, _] : doc_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown field '" + name(key) + "'");
    }
  }

 private:
  std::string label() const { return path_.empty() ? "<root>" : path_; }

  const nlohmann::json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_spec(Block& b, harness::RandomInstanceSpec& spec) {
  b.read_range("n_axes", spec.n_axes);
  b.read_range("axis_size", spec.axis_size);
  std::string values = harness::to_string(spec.values), weights = harness::to_string(spec.weights);
  b.read("values", values);
  b.read("weights", weights);
  b.read("epsilon", spec.epsilon);
  b.read("density", spec.density);
  try {
    spec.values = harness::parse_value_distribution(values);
  } catch (const PreconditionError&) {
    throw ConfigError("field '" + b.name("values") + "': unknown distribution '" + values + "'");
  }
  try {
    spec.weights = harness::parse_weight_distribution(weights);
  } catch (const PreconditionError&) {
    throw ConfigError("field '" + b.name("weights") + "': unknown distribution '" + weights + "'");
  }
}

void emit(const RunConfig& config, const std::vector<Table>& tables,
          const nlohmann::json* json_doc, std::ostream& out) {
  std::ostringstream body;
  if (config.format == "json") {
    body << (json_doc ? *json_doc : tables_to_json(tables)).dump(2) << '\n';
  } else {
    write_csv(body, tables);
  }
  if (config.output_path.empty()) {
    out << body.str();
    return;
  }
  std::ofstream file(config.output_path, std::ios::binary);
  if (!file) throw ConfigError("field 'output_path': cannot open '" + config.output_path + "'");
  file << body.str();
  for (const auto& t : tables) {
    out << "[" << t.name << "]\n";
    write_text(out, t);
  }
}

std::vector<double> t_grid(double span, std::size_t count) {
  if (!(span > 0.0)) span = 1.0;
  std::vector<double> ts;
  for (std::size_t i = 1; i <= count; ++i) {
    ts.push_back(span * static_cast<double>(i) / static_cast<double>(count + 1));
  }
  return ts;
}

// E g over X^m, which equals E u.
double kernel_mean(const Kernel& kernel, const BaseSet& base) {
  const std::size_t size = base.points.size();
  std::vector<std::size_t> odo(kernel.m, 0);
  std::vector<double> args(kernel.m);
  CompensatedSum acc;
  for (;;) {
    double w = 1.0;
    for (std::size_t i = 0; i < kernel.m; ++i) {
      args[i] = base.points[odo[i]];
      w *= base.measure.weight(odo[i]);
    }
    acc.add(w * kernel(args));
    std::size_t i = kernel.m;
    while (i > 0 && ++odo[i - 1] == size) odo[--i] = 0;
    if (i == 0) break;
  }
  return acc.value();
}

rls::Setup demo_setup() {
  rls::Setup s;
  s.dim = 1;
  s.lambda = 0.5;
  s.n = 8;
  s.population.dim = 1;
  rls::Atom a, b;
  a.x = rls::Vector::Constant(1, 1.0);
  a.y = 1.0;
  a.p = 0.5;
  b.x = rls::Vector::Constant(1, 0.5);
  b.y = -1.0;
  b.p = 0.5;
  s.population.atoms = {a, b};
  return s;
}

nlohmann::json read_json_file(const std::string& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ConfigError("field '" + field + "': cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("field '" + field + "': malformed JSON in '" + path + "'");
  }
}

}  // namespace

void apply_config(const nlohmann::json& doc, RunConfig& config) {
  Block root(doc, "");
  root.read("command", config.command);
  root.read("seed", config.seed);
  root.read("output_path", config.output_path);
  root.read("format", config.format);
  root.read("cap", config.cap);
  if (root.has("verify")) {
    auto b = root.child("verify");
    auto& v = config.verify;
    b.read("count", v.count);
    read_spec(b, v.spec);
    b.read("entropy_instances", v.entropy_instances);
    b.read("t_grid", v.t_grid);
    b.read("inject_bug", v.inject_bug);
    b.read("groups", v.groups);
    b.finish();
  }
  if (root.has("ustat")) {
    auto b = root.child("ustat");
    auto& u = config.ustat;
    b.read("kernel", u.kernel);
    b.read("kernel_file", u.kernel_file);
    b.read("orders", u.orders);
    b.read("sizes", u.sizes);
    b.read("points", u.points);
    b.read("weights", u.weights);
    b.read("ts", u.ts);
    b.read("crossover_sigma1sq", u.crossover_sigma1sq);
    b.read("mc_samples", u.mc_samples);
    b.read("mc_budget", u.mc_budget);
    b.finish();
  }
  if (root.has("rls")) {
    auto b = root.child("rls");
    auto& r = config.rls;
    b.read("setup_file", r.setup_file);
    b.read("c", r.c);
    b.read("t_grid", r.t_grid);
    b.read("mc_samples", r.mc_samples);
    b.read("scv_replications", r.scv_replications);
    b.read("lambda_sweep", r.lambda_sweep);
    b.read("derivative_grid", r.derivative_grid);
    b.finish();
  }
  if (root.has("bounds-table")) {
    auto b = root.child("bounds-table");
    auto& t = config.bounds_table;
    b.read("instances", t.instances);
    read_spec(b, t.spec);
    b.read("t_grid", t.t_grid);
    b.finish();
  }
  if (root.has("normal-limit-demo")) {
    auto b = root.child("normal-limit-demo");
    auto& d = config.normal_limit;
    b.read("instance", d.instance);
    b.read("sizes", d.sizes);
    b.read("t", d.t);
    b.finish();
  }
  root.finish();
}

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream&) {
  const auto& v = config.verify;
  auto spec = v.spec;
  spec.seed = config.seed;
  harness::SuiteOptions options;
  options.entropy_instances = v.entropy_instances;
  options.t_grid = v.t_grid;
  options.inject_bug = v.inject_bug;
  options.groups = v.groups;
  const auto report = harness::run_property_suite(spec, v.count, options);
  const auto doc = report.to_json();
  emit(config, {report.to_table()}, &doc, out);
  return report.passed() ? kExitOk : kExitViolation;
}

int cmd_ustat(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto& p = config.ustat;
  BaseSet base = p.weights.empty() ? BaseSet::uniform(p.points)
                                   : BaseSet{p.points, FiniteAxis(p.weights)};
  if (base.points.size() != base.measure.size()) {
    throw ConfigError("field 'ustat.weights': length differs from ustat.points");
  }
  std::vector<Kernel> kernels;
  if (!p.kernel_file.empty()) {
    kernels.push_back(kernel_from_json(read_json_file(p.kernel_file, "ustat.kernel_file")));
  } else {
    for (std::size_t m : p.orders) kernels.push_back(builtin_kernel(p.kernel, m));
  }

  Table bounds{"ustat_bounds",
               {"m", "n", "t", "sigma1sq", "ustat_bound", "arcones_bound", "tail", "tail_stderr",
                "tail_mode"},
               {}};
  Table cross{"crossover",
              {"m", "n", "sigma1sq", "t", "product", "closed_form_product", "monotone",
               "full_bound_crossover", "full_bound_t"},
              {}};
  Table notes{"notes", {"item", "value"}, {}};
  notes.add_row({std::string("arcones_t_term"), std::string("(2/3) * m^-1")});
  notes.add_row({std::string("crossover_basis"),
                 std::string("exponent denominators; full bounds include prefactors 2 and 4")});
  std::size_t run_index = 0;
  for (const auto& kernel : kernels) {
    const std::size_t m = kernel.m;
    const double s1 = sigma1_squared(kernel, base);
    const double mean = kernel_mean(kernel, base);
    for (std::size_t n : p.sizes) {
      if (n <= m) continue;
      const auto i64 = [](std::size_t v) { return static_cast<std::int64_t>(v); };
      std::vector<std::optional<double>> tails(p.ts.size()), stderrs(p.ts.size());
      std::string mode = "skipped";
      const double configs = std::pow(static_cast<double>(base.points.size()), static_cast<double>(n));
      if (configs <= static_cast<double>(config.cap)) {
        mode = "exact";
        const auto u = ustat_as_function({kernel, n, base}, config.cap);
        for (std::size_t i = 0; i < p.ts.size(); ++i) tails[i] = harness::exact_tail(u, p.ts[i], true);
      } else if (static_cast<double>(binomial_wide(n, m)) * static_cast<double>(p.mc_samples) <=
                 p.mc_budget) {
        mode = "monte-carlo";
        std::vector<double> weights(base.measure.weights().begin(), base.measure.weights().end());
        std::vector<double> sample(n);
        auto draw = [&](Rng& rng) {
          for (auto& x : sample) x = base.points[draw_index(rng, weights)];
          return std::abs(evaluate_u(kernel, sample) - mean);
        };
        const auto est = harness::mc_tail_grid(draw, 0.0, p.ts, p.mc_samples,
                                               config.seed + run_index);
        for (std::size_t i = 0; i < p.ts.size(); ++i) {
          tails[i] = est[i].mc_estimate;
          stderrs[i] = est[i].mc_stderr;
        }
      }
      if (mode == "skipped") {
        notes.add_row({std::string("warning"), "tail skipped for m=" + std::to_string(m) +
                                                   " n=" + std::to_string(n) +
                                                   ": exact and Monte Carlo budgets exceeded"});
        err << "warning: tail skipped for m=" << m << " n=" << n << '\n';
      } else if (mode == "monte-carlo") {
        notes.add_row({std::string("warning"), "exact tail over capacity for m=" + std::to_string(m) +
                                                   " n=" + std::to_string(n) + "; Monte Carlo used"});
      }
      ++run_index;
      for (std::size_t i = 0; i < p.ts.size(); ++i) {
        const double t = p.ts[i];
        bounds.add_row({i64(m), i64(n), t, s1, ustat_bound(n, m, s1, t), arcones_bound(n, m, s1, t),
                        tails[i] ? Cell(*tails[i]) : Cell(std::monostate{}),
                        stderrs[i] ? Cell(*stderrs[i]) : Cell(std::monostate{}), mode});
      }
      std::vector<double> sigmas = p.crossover_sigma1sq;
      if (std::find(sigmas.begin(), sigmas.end(), s1) == sigmas.end()) sigmas.push_back(s1);
      for (double s : sigmas) {
        const auto c = crossover(m, s, n);
        cross.add_row({i64(m), i64(n), s, c.found ? Cell(c.t) : Cell(std::monostate{}),
                       c.found ? Cell(c.product) : Cell(std::monostate{}),
                       static_cast<double>(n - m) * c.closed_form_t, c.monotone, c.literal_found,
                       c.literal_found ? Cell(c.literal_t) : Cell(std::monostate{})});
      }
    }
  }
  emit(config, {bounds, cross, notes}, nullptr, out);
  return kExitOk;
}

int cmd_rls(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto& p = config.rls;
  const rls::Setup setup = p.setup_file.empty()
                               ? demo_setup()
                               : rls::setup_from_json(read_json_file(p.setup_file, "rls.setup_file"));
  const auto& pop = setup.population;
  const std::size_t n = setup.n;
  const auto i64 = [](std::size_t v) { return static_cast<std::int64_t>(v); };
  std::size_t violations = 0;

  Rng rng = make_stream(config.seed, 1);
  rls::RlsProblem problem{setup.dim, setup.lambda, {}};
  for (std::size_t i = 0; i < n; ++i) problem.sample.push_back(pop.draw(rng));
  const auto sol = rls::solve(problem);
  Table solution{"solution",
                 {"n", "dim", "lambda", "w_norm", "w_norm_bound", "rss", "rss_bound", "objective",
                  "residual"},
                 {}};
  solution.add_row({i64(n), i64(setup.dim), setup.lambda, sol.w.norm(), 1.0 / std::sqrt(setup.lambda),
                    rls::residual_sum_of_squares(sol, problem), static_cast<double>(n),
                    rls::objective(sol, problem), sol.residual});

  Table deriv{"derivatives",
              {"first_norm", "first_bound", "mixed_norm", "mixed_bound", "gram_derivative",
               "moment_derivative", "b_bound", "gram_mixed", "step_unstable", "ok"},
              {}};
  if (n >= 2) {
    const auto d = rls::derivative_bound_check(problem, 0, 1, problem.sample[0], pop.draw(rng),
                                               problem.sample[1], pop.draw(rng), p.derivative_grid);
    deriv.add_row({d.first_norm, d.first_bound, d.mixed_norm, d.mixed_bound, d.gram_derivative,
                   d.moment_derivative, d.b_bound, d.gram_mixed, d.step_unstable, d.ok()});
    if (!d.ok()) ++violations;
  }

  const auto f = rls::gap_function(pop, n, setup.lambda, config.cap);
  const double e_scv = expected_scv(f);
  const double b_emp = max_coordinate_range(f);
  const double j_emp = crude_interaction_bound(f);
  const double mean = expectation(f);
  const auto scv_mc = rls::empirical_scv(pop, n, setup.lambda, p.scv_replications, config.seed + 2);
  Table scv_table{"scv", {"exact", "mc_mean", "mc_stderr", "replications", "b_emp", "j_emp"}, {}};
  scv_table.add_row({e_scv, scv_mc.mean, scv_mc.stderr_, i64(scv_mc.replications), b_emp, j_emp});

  const auto ts = t_grid(f.max() - mean, p.t_grid);
  auto draw = [&](Rng& r) {
    rls::RlsProblem sample{setup.dim, setup.lambda, {}};
    for (std::size_t i = 0; i < n; ++i) sample.sample.push_back(pop.draw(r));
    return rls::generalization_gap(sample, pop);
  };
  const auto mc = harness::mc_tail_grid(draw, mean, ts, p.mc_samples, config.seed + 3);
  Table curve{"bound_curve",
              {"t", "measured_bound", "theorem6_bound", "exact_tail", "mc_tail", "mc_stderr",
               "violation"},
              {}};
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double t = ts[i];
    const double measured = main_bound(e_scv, b_emp, j_emp, t).value;
    const double t6 = rls::theorem6_bound(e_scv, n, setup.lambda, p.c, t);
    const bool bad = *mc[i].mc_estimate - 4.0 * *mc[i].mc_stderr > measured;
    if (bad) ++violations;
    curve.add_row({t, measured, t6, harness::exact_tail(f, t), *mc[i].mc_estimate,
                   *mc[i].mc_stderr, bad});
  }

  Table sweep{"lambda_sweep", {"lambda", "e_scv", "b_emp", "crude_j", "j", "j_mu"}, {}};
  for (double lam : p.lambda_sweep) {
    const auto g = rls::gap_function(pop, n, lam, config.cap);
    sweep.add_row({lam, expected_scv(g), max_coordinate_range(g), crude_interaction_bound(g),
                   interaction_j(g), interaction_j_mu(g)});
  }
  emit(config, {solution, deriv, scv_table, curve, sweep}, nullptr, out);
  if (violations > 0) err << "rls: " << violations << " check(s) violated\n";
  return violations == 0 ? kExitOk : kExitViolation;
}

int cmd_bounds_table(const RunConfig& config, std::ostream& out, std::ostream&) {
  const auto& p = config.bounds_table;
  Table table{"bounds_table",
              {"instance", "seed", "t", "bounded_difference_term", "sup_scv", "E_scv",
               "sigma2_plus_quarter_j2", "sum_sigma_k2", "theorem1", "theorem2", "corollary4",
               "exact_tail"},
              {}};
  for (std::size_t i = 0; i < p.instances; ++i) {
    auto spec = p.spec;
    spec.seed = harness::instance_seed(config.seed, i);
    const auto inst = harness::generate_instance(spec);
    const auto& f = inst.f;
    const double var = variance(f), e_scv = expected_scv(f), sup_s = sup_scv(f);
    const double bd = bounded_difference_variance_term(f);
    const double j = interaction_j(f), j_mu = interaction_j_mu(f), b = upper_deviation(f);
    double sum_marginal = 0.0;
    for (std::size_t k = 0; k < f.space().num_axes(); ++k) sum_marginal += expectation(cond_variance(f, k));
    for (double t : t_grid(f.max() - expectation(f), p.t_grid)) {
      table.add_row({static_cast<std::int64_t>(i), std::to_string(inst.seed), t, bd, sup_s, e_scv,
                     var + 0.25 * j * j, sum_marginal, sup_bernstein_bound(f, b, t).value,
                     main_bound(e_scv, b, j_mu, t).value,
                     variance_corollary_bound(var, j, j_mu, b, t).value, harness::exact_tail(f, t)});
    }
  }
  emit(config, {table}, nullptr, out);
  return kExitOk;
}

int cmd_normal_limit_demo(const RunConfig& config, std::ostream& out, std::ostream&) {
  const auto& p = config.normal_limit;
  if (p.instance != "sum" && p.instance != "bounded-interaction") {
    throw ConfigError("field 'normal-limit-demo.instance': expected 'sum' or 'bounded-interaction'");
  }
  Table table{"normal_limit",
              {"n", "t", "sigma2", "b", "j_mu", "linear_coefficient", "bound_exponent",
               "gaussian_exponent", "bound", "normal_tail", "exact_tail"},
              {}};
  for (std::size_t n : p.sizes) {
    if (n < 1) throw ConfigError("field 'normal-limit-demo.sizes': sizes must be positive");
    auto space = FiniteProductSpace::make(std::vector<FiniteAxis>(n, FiniteAxis::uniform(2)), config.cap);
    const double root_n = std::sqrt(static_cast<double>(n));
    const bool pairs = p.instance == "bounded-interaction";
    const auto f = TabulatedFunction::from(space, [&](const Configuration& c) {
      double s = 0.0, pair = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double xk = c[k] == 0 ? -1.0 : 1.0;
        s += xk;
        if (pairs) {
          for (std::size_t l = k + 1; l < n; ++l) pair += xk * (c[l] == 0 ? -1.0 : 1.0);
        }
      }
      return (s + pair / static_cast<double>(n)) / root_n;
    });
    const double sigma2 = expected_scv(f), b = upper_deviation(f), j_mu = interaction_j_mu(f);
    const auto r = main_bound(sigma2, b, j_mu, p.t);
    table.add_row({static_cast<std::int64_t>(n), p.t, sigma2, b, j_mu, 2.0 * b / 3.0 + j_mu,
                   p.t * p.t / r.denominator, p.t * p.t / (2.0 * sigma2), r.value,
                   0.5 * std::erfc(p.t / std::sqrt(2.0 * sigma2)), harness::exact_tail(f, p.t)});
  }
  emit(config, {table}, nullptr, out);
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Concentration bounds for functions of bounded interaction"};
  app.require_subcommand(1);
  std::string config_path, out_path, format;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> count, cap;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"verify", "Run the inequality property suite"},
      {"ustat", "U-statistic bounds, Arcones comparison and crossover"},
      {"rls", "Ridge regression stability experiment"},
      {"bounds-table", "Variance terms and tail bounds side by side"},
      {"normal-limit-demo", "Bound exponent against the normal tail across n"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", seed, "Root seed");
    sub->add_option("--out", out_path, "Output path (stdout when absent)");
    sub->add_option("--format", format, "csv or json");
    sub->add_option("--count", count, "Instance count");
    sub->add_option("--cap", cap, "Configuration cap for exact enumeration");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig config;
  try {
    if (!config_path.empty()) apply_config(read_json_file(config_path, "--config"), config);
    if (!config.command.empty() && config.command != command) {
      throw ConfigError("field 'command': config is for '" + config.command + "', not '" + command + "'");
    }
    config.command = command;
    if (seed) config.seed = *seed;
    if (!out_path.empty()) config.output_path = out_path;
    if (!format.empty()) config.format = format;
    if (config.format != "csv" && config.format != "json") {
      throw ConfigError("field 'format': expected 'csv' or 'json', got '" + config.format + "'");
    }
    if (cap) config.cap = *cap;
    if (count) {
      config.verify.count = *count;
      config.bounds_table.instances = *count;
    }
    config.verify.spec.validate();
    config.bounds_table.spec.validate();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const PreconditionError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (command == "verify") return cmd_verify(config, out, err);
    if (command == "ustat") return cmd_ustat(config, out, err);
    if (command == "rls") return cmd_rls(config, out, err);
    if (command == "bounds-table") return cmd_bounds_table(config, out, err);
    return cmd_normal_limit_demo(config, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const PreconditionError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CapacityError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitViolation;
  }
}

}  // namespace bic::cli
