#include "bic/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "bic/bounds.hpp"
#include "bic/errors.hpp"
#include "bic/functionals.hpp"
#include "bic/operators.hpp"
#include "bic/summation.hpp"

namespace bic::harness {
namespace {

const std::vector<std::pair<std::string, std::string>> kChecks = {
    {"efron_stein", "inequalities"},
    {"sum_equality", "inequalities"},
    {"houdre_bound", "inequalities"},
    {"bias_lower", "inequalities"},
    {"bias_upper", "inequalities"},
    {"chatterjee_factored", "inequalities"},
    {"chatterjee_enumerated", "inequalities"},
    {"little_lemma", "inequalities"},
    {"j_mu_le_j", "inequalities"},
    {"j_le_crude", "inequalities"},
    {"self_bounding", "inequalities"},
    {"homogeneity_j", "inequalities"},
    {"homogeneity_j_mu", "inequalities"},
    {"selfbound_mgf", "inequalities"},
    {"variance_term_ordering", "inequalities"},
    {"herbst_identity", "entropy"},
    {"fluctuation_identity", "entropy"},
    {"entropy_subadditivity", "entropy"},
    {"bennett_entropy", "entropy"},
    {"entropy_upper_d", "entropy"},
    {"decoupling", "entropy"},
    {"complicated_inequality", "scalar"},
    {"optimization_lemma", "scalar"},
    {"theorem1_tail", "tails"},
    {"theorem2_tail", "tails"},
    {"theorem2_tail_with_j", "tails"},
    {"theorem2_tail_with_crude", "tails"},
    {"corollary4_tail", "tails"},
    {"concentration_proposition", "tails"},
    {"bernstein_reduction", "tails"},
};

class Recorder {
 public:
  Recorder(const SuiteOptions& options) {
    for (const auto& [name, group] : kChecks) {
      if (!options.groups.empty() &&
          std::find(options.groups.begin(), options.groups.end(), group) == options.groups.end()) {
        continue;
      }
      CheckResult r;
      r.name = name;
      r.group = group;
      index_[name] = results_.size();
      results_.push_back(std::move(r));
    }
  }

  bool enabled_group(const std::string& group) const {
    for (const auto& r : results_) {
      if (r.group == group) return true;
    }
    return false;
  }

  // Records one evaluation; the check fails when excess > tolerance.
  void record(const std::string& name, double excess, double tolerance, std::uint64_t seed,
              std::size_t instance) {
    const auto it = index_.find(name);
    if (it == index_.end()) return;
    auto& r = results_[it->second];
    r.tolerance = tolerance;
    ++r.evaluations;
    if (last_instance_[name] != instance + 1) {
      ++r.instances;
      last_instance_[name] = instance + 1;
    }
    if (std::isnan(excess)) excess = std::numeric_limits<double>::infinity();
    if (!r.max_excess || excess > *r.max_excess) r.max_excess = excess;
    if (excess > tolerance) {
      if (r.failures == 0) r.witness_seed = seed;
      ++r.failures;
    }
  }

  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  std::vector<CheckResult> results_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, std::size_t> last_instance_;
};

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// E[f | X_k] as a table: integrate out every other coordinate.
TabulatedFunction marginal_mean(const TabulatedFunction& f, std::size_t k) {
  TabulatedFunction g = f;
  for (std::size_t l = 0; l < f.space().num_axes(); ++l) {
    if (l != k) g = cond_expectation(g, l);
  }
  return g;
}

// ln E[e^g] with a max shift.
double log_mean_exp(const TabulatedFunction& g) { return log_mgf_centered(g, 1.0) + expectation(g); }

void run_instance_checks(const Instance& inst, std::size_t index, bool with_entropy,
                         const SuiteOptions& options, Recorder& rec) {
  const auto& f = inst.f;
  const auto& tol = options.tolerances;
  const std::uint64_t seed = inst.seed;
  auto record = [&](const std::string& name, double excess, double tolerance) {
    rec.record(name, excess, tolerance, seed, index);
  };

  const double var = variance(f);
  const auto sigma2 = scv(f);
  const double e_scv = expectation(sigma2);
  const double sup_s = sigma2.max();
  const double j = interaction_j(f);
  const double j_mu = interaction_j_mu(f);
  const double crude = crude_interaction_bound(f);
  const double b = upper_deviation(f);

  if (rec.enabled_group("inequalities")) {
    if (options.inject_bug) {
      record("efron_stein", e_scv - var, tol.inequality);
    } else {
      record("efron_stein", var - e_scv, tol.inequality);
    }

    // Additive part Ef + sum_k (E[f|X_k] - Ef): a sum of one-coordinate functions.
    const double mean = expectation(f);
    std::vector<double> additive(f.size(), mean);
    for (std::size_t k = 0; k < f.space().num_axes(); ++k) {
      const auto mk = marginal_mean(f, k);
      for (std::size_t i = 0; i < f.size(); ++i) additive[i] += mk[i] - mean;
    }
    const TabulatedFunction f_add(f.space_ptr(), std::move(additive));
    record("sum_equality", relative_gap(expected_scv(f_add), variance(f_add)), tol.identity);

    const double gap = e_scv - var;
    const double quarter_j2 = 0.25 * j * j;
    record("houdre_bound", gap - quarter_j2, tol.inequality);
    const double bias = bias_second_difference_bound(f);
    record("bias_lower", gap - bias, tol.inequality);
    record("bias_upper", bias - quarter_j2, tol.inequality);
    record("chatterjee_factored", relative_gap(chatterjee_variance(f, ChatterjeeMethod::Factored), var),
           tol.identity);
    const double count = static_cast<double>(f.size());
    if (count * count <= static_cast<double>(f.space().cap())) {
      record("chatterjee_enumerated",
             relative_gap(chatterjee_variance(f, ChatterjeeMethod::Enumerated), var), tol.identity);
    }
    record("little_lemma", little_lemma_lhs(f) - var, tol.inequality);
    record("j_mu_le_j", j_mu - j, tol.inequality);
    record("j_le_crude", j - crude, tol.inequality);

    const auto d_sigma = d_operator(sigma2);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, d_sigma[i] - j_mu * j_mu * sigma2[i]);
    record("self_bounding", worst, tol.inequality);

    Rng rng = make_stream(seed, 3);
    const double c = std::exp(uniform(rng, std::log(0.1), std::log(10.0)));
    const auto scaled = f * c;
    record("homogeneity_j", relative_gap(interaction_j(scaled), c * j), tol.identity);
    record("homogeneity_j_mu", relative_gap(interaction_j_mu(scaled), c * j_mu), tol.identity);

    // The bound needs beta < 2 / J_mu^2; sample the admissible range.
    const double a2 = j_mu * j_mu;
    std::vector<double> mgf_betas = options.betas;
    if (a2 > 0.0) mgf_betas = {0.1 * 2.0 / a2, 0.5 * 2.0 / a2, 0.9 * 2.0 / a2};
    for (double beta : mgf_betas) {
      const double lhs = log_mgf_centered(sigma2, beta) + beta * e_scv;
      const double rhs = beta * e_scv / (1.0 - a2 * beta / 2.0);
      record("selfbound_mgf", lhs - rhs, tol.inequality);
    }

    const double bd = bounded_difference_variance_term(f);
    record("variance_term_ordering", std::max(e_scv - sup_s, sup_s - bd), tol.inequality);
  }

  if (with_entropy && rec.enabled_group("entropy")) {
    Rng rng = make_stream(seed, 7);
    std::vector<double> noise(f.size());
    for (auto& v : noise) v = uniform(rng, -1.0, 1.0);
    const TabulatedFunction g_random(f.space_ptr(), std::move(noise));
    const auto d_f = d_operator(f);
    const double log_e_sigma = log_mean_exp(sigma2), log_e_random = log_mean_exp(g_random);

    for (double beta : options.betas) {
      const double s = entropy(f, beta);
      record("herbst_identity", std::abs(herbst_log_mgf(f, beta) - log_mgf_centered(f, beta)),
             tol.quadrature);
      record("fluctuation_identity", std::abs(entropy_fluctuation(f, beta) - s), tol.quadrature);

      const auto state = gibbs(f, beta);
      std::vector<double> local_sum(f.size(), 0.0);
      for (std::size_t k = 0; k < f.space().num_axes(); ++k) {
        const auto sk = conditional_entropy(f, k, beta);
        for (std::size_t i = 0; i < f.size(); ++i) local_sum[i] += sk[i];
      }
      const TabulatedFunction local(f.space_ptr(), std::move(local_sum));
      record("entropy_subadditivity", s - gibbs_expectation(state, local), tol.inequality);

      if (b > 0.0) {
        const auto g = f * (1.0 / b);
        const auto g_state = gibbs(g, beta);
        record("bennett_entropy", entropy(g, beta) - psi(beta) * gibbs_expectation(g_state, scv(g)),
               tol.inequality);
      }
      record("entropy_upper_d", s - 0.5 * beta * beta * gibbs_expectation(state, d_f),
             tol.inequality);
      record("decoupling", gibbs_expectation(state, sigma2) - s - log_e_sigma, tol.inequality);
      record("decoupling", gibbs_expectation(state, g_random) - s - log_e_random, tol.inequality);
    }
  }

  if (rec.enabled_group("tails")) {
    const double span = f.max() - expectation(f);
    if (span > 0.0) {
      const double sigma2_var = var;
      const auto d_sigma = d_operator(sigma2);
      bool self_bounded = true;
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (d_sigma[i] > j_mu * j_mu * sigma2[i] + tol.inequality) self_bounded = false;
      }
      for (std::size_t i = 1; i <= options.t_grid; ++i) {
        const double t = span * static_cast<double>(i) / static_cast<double>(options.t_grid + 1);
        const double tail = exact_tail(f, t);
        record("theorem1_tail", tail - sup_bernstein_bound(f, b, t).value, tol.inequality);
        const double main = main_bound(e_scv, b, j_mu, t).value;
        record("theorem2_tail", tail - main, tol.inequality);
        record("theorem2_tail_with_j", tail - main_bound(e_scv, b, j, t).value, tol.inequality);
        record("theorem2_tail_with_crude", tail - main_bound(e_scv, b, crude, t).value,
               tol.inequality);
        record("corollary4_tail", tail - variance_corollary_bound(sigma2_var, j, j_mu, b, t).value,
               tol.inequality);
        if (self_bounded) record("concentration_proposition", tail - main, tol.inequality);
      }
    }

    // Bernstein reduction on the additive part of f.
    const double mean = expectation(f);
    std::vector<double> additive(f.size(), mean);
    double sum_var = 0.0;
    for (std::size_t k = 0; k < f.space().num_axes(); ++k) {
      const auto mk = marginal_mean(f, k);
      sum_var += variance(mk);
      for (std::size_t i = 0; i < f.size(); ++i) additive[i] += mk[i] - mean;
    }
    const TabulatedFunction f_add(f.space_ptr(), std::move(additive));
    const double add_span = f_add.max() - mean;
    if (add_span > 0.0) {
      const double b_add = upper_deviation(f_add);
      const double e_add = expected_scv(f_add), j_mu_add = interaction_j_mu(f_add);
      for (std::size_t i = 1; i <= options.t_grid; ++i) {
        const double t = add_span * static_cast<double>(i) / static_cast<double>(options.t_grid + 1);
        const double v = main_bound(e_add, b_add, j_mu_add, t).value;
        const double classical = std::exp(-t * t / (2.0 * sum_var + 2.0 * b_add * t / 3.0));
        record("bernstein_reduction", std::abs(v - classical) / std::max(classical, 1e-300), 1e-12);
      }
    }
  }
}

void run_scalar_checks(std::uint64_t seed, const SuiteOptions& options, Recorder& rec) {
  if (!rec.enabled_group("scalar")) return;
  std::size_t index = 0;
  for (double a : {0.0, 0.1, 1.0, 10.0}) {
    const double limit = 1.0 / (1.0 / 3.0 + a / 2.0);
    for (int i = 1; i <= 99; ++i) {
      const double gamma = limit * i / 100.0;
      const auto r = complicated_inequality(a, gamma);
      const double excess = r.part_i ? (r.lhs - r.rhs) / r.rhs : 1.0;
      rec.record("complicated_inequality", excess, options.tolerances.inequality, seed, index++);
    }
  }
  Rng rng = make_stream(seed, 11);
  auto log_uniform = [&](double lo, double hi) {
    return std::exp(uniform(rng, std::log(lo), std::log(hi)));
  };
  for (std::size_t i = 0; i < options.optimization_samples; ++i) {
    const double C = log_uniform(0.01, 10.0), b = log_uniform(0.01, 10.0), t = log_uniform(0.01, 10.0);
    const auto r = optimization_infimum(C, b, t);
    rec.record("optimization_lemma", r.numeric_inf - r.closed_form, options.tolerances.inequality,
               seed, i);
  }
}

}  // namespace

std::string to_string(ValueDistribution v) {
  switch (v) {
    case ValueDistribution::Uniform: return "uniform";
    case ValueDistribution::Sparse: return "sparse";
    case ValueDistribution::SumPlusPerturbation: return "sum-plus-perturbation";
  }
  return "uniform";
}

std::string to_string(WeightDistribution w) {
  return w == WeightDistribution::Uniform ? "uniform" : "dirichlet";
}

ValueDistribution parse_value_distribution(const std::string& s) {
  if (s == "uniform") return ValueDistribution::Uniform;
  if (s == "sparse") return ValueDistribution::Sparse;
  if (s == "sum-plus-perturbation") return ValueDistribution::SumPlusPerturbation;
  throw PreconditionError("unknown value distribution '" + s + "'");
}

WeightDistribution parse_weight_distribution(const std::string& s) {
  if (s == "uniform") return WeightDistribution::Uniform;
  if (s == "dirichlet") return WeightDistribution::Dirichlet;
  throw PreconditionError("unknown weight distribution '" + s + "'");
}

void RandomInstanceSpec::validate() const {
  if (n_axes.lo < 1 || n_axes.hi < n_axes.lo) throw PreconditionError("spec: invalid n_axes range");
  if (axis_size.lo < 1 || axis_size.hi < axis_size.lo) {
    throw PreconditionError("spec: invalid axis_size range");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw PreconditionError("spec: epsilon must be >= 0");
  if (!(density >= 0.0 && density <= 1.0)) throw PreconditionError("spec: density must lie in [0, 1]");
}

std::uint64_t instance_seed(std::uint64_t root, std::size_t index) {
  Rng rng = make_stream(root, index);
  return rng();
}

Instance generate_instance(const RandomInstanceSpec& spec) {
  spec.validate();
  Rng rng = make_stream(spec.seed, 0);
  const std::size_t n = uniform_index(rng, spec.n_axes.lo, spec.n_axes.hi);
  std::vector<FiniteAxis> axes;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t size = uniform_index(rng, spec.axis_size.lo, spec.axis_size.hi);
    axes.push_back(spec.weights == WeightDistribution::Uniform ? FiniteAxis::uniform(size)
                                                               : FiniteAxis(dirichlet_weights(rng, size)));
  }
  auto space = FiniteProductSpace::make(std::move(axes));
  std::vector<double> values(space->configuration_count());
  switch (spec.values) {
    case ValueDistribution::Uniform:
      for (auto& v : values) v = uniform(rng, -1.0, 1.0);
      break;
    case ValueDistribution::Sparse:
      for (auto& v : values) {
        const bool nonzero = uniform01(rng) < spec.density;
        const double x = uniform(rng, -1.0, 1.0);
        v = nonzero ? x : 0.0;
      }
      break;
    case ValueDistribution::SumPlusPerturbation: {
      const double scale = 1.0 / static_cast<double>(n);
      std::vector<std::vector<double>> parts(n);
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t y = 0; y < space->axis(k).size(); ++y) {
          parts[k].push_back(uniform(rng, -scale, scale));
        }
      }
      for (std::size_t i = 0; i < values.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += parts[k][space->coordinate(i, k)];
        const double h = uniform(rng, -1.0, 1.0);
        values[i] = (s + spec.epsilon * h) / (1.0 + spec.epsilon);
      }
      break;
    }
  }
  return {spec.seed, TabulatedFunction(space, std::move(values))};
}

double exact_tail(const TabulatedFunction& f, double t, bool two_sided) {
  const double mean = expectation(f);
  CompensatedSum p;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = f[i] - mean;
    if (d > t || (two_sided && -d > t)) p.add(f.space().measure(i));
  }
  return std::min(1.0, p.value());
}

std::vector<TailEstimate> mc_tail_grid(const std::function<double(Rng&)>& draw, double center,
                                       const std::vector<double>& ts, std::size_t n_samples,
                                       std::uint64_t seed) {
  if (n_samples < 1) throw PreconditionError("mc_tail: n_samples must be positive");
  Rng rng = make_stream(seed, 0);
  std::vector<std::size_t> hits(ts.size(), 0);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const double d = draw(rng) - center;
    for (std::size_t i = 0; i < ts.size(); ++i) hits[i] += d > ts[i];
  }
  std::vector<TailEstimate> out;
  const double nn = static_cast<double>(n_samples);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    TailEstimate e;
    e.t = ts[i];
    e.n_samples = n_samples;
    const double p = static_cast<double>(hits[i]) / nn;
    e.mc_estimate = p;
    e.mc_stderr = std::sqrt(p * (1.0 - p) / nn);
    out.push_back(e);
  }
  return out;
}

TailEstimate mc_tail(const std::function<double(Rng&)>& draw, double center, double t,
                     std::size_t n_samples, std::uint64_t seed) {
  return mc_tail_grid(draw, center, {t}, n_samples, seed).front();
}

TailEstimate mc_tail(const TabulatedFunction& f, double t, std::size_t n_samples,
                     std::uint64_t seed) {
  const auto& space = f.space();
  std::vector<std::vector<double>> weights(space.num_axes());
  for (std::size_t k = 0; k < space.num_axes(); ++k) {
    const auto w = space.axis(k).weights();
    weights[k].assign(w.begin(), w.end());
  }
  auto draw = [&](Rng& rng) {
    std::size_t index = 0;
    for (std::size_t k = 0; k < space.num_axes(); ++k) index += draw_index(rng, weights[k]) * space.stride(k);
    return f[index];
  };
  auto e = mc_tail(draw, expectation(f), t, n_samples, seed);
  e.exact = exact_tail(f, t);
  return e;
}

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed(); });
}

const CheckResult* SuiteReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

nlohmann::json SuiteReport::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : checks) {
    list.push_back({{"name", c.name},
                    {"group", c.group},
                    {"instances", c.instances},
                    {"evaluations", c.evaluations},
                    {"max_excess", c.max_excess ? nlohmann::json(*c.max_excess) : nlohmann::json()},
                    {"tolerance", c.tolerance},
                    {"failures", c.failures},
                    {"witness_seed", c.witness_seed ? nlohmann::json(*c.witness_seed) : nlohmann::json()},
                    {"passed", c.passed()}});
  }
  return {{"seed", seed}, {"count", count}, {"passed", passed()}, {"checks", std::move(list)}};
}

Table SuiteReport::to_table() const {
  Table t;
  t.name = "suite";
  t.columns = {"check",      "group",     "instances", "evaluations", "max_excess",
               "tolerance",  "failures",  "witness_seed", "passed"};
  for (const auto& c : checks) {
    t.add_row({c.name, c.group, static_cast<std::int64_t>(c.instances),
               static_cast<std::int64_t>(c.evaluations),
               c.max_excess ? Cell(*c.max_excess) : Cell(std::monostate{}), c.tolerance,
               static_cast<std::int64_t>(c.failures),
               c.witness_seed ? Cell(std::to_string(*c.witness_seed)) : Cell(std::monostate{}),
               c.passed()});
  }
  return t;
}

std::vector<std::pair<std::string, std::string>> registered_checks() { return kChecks; }

SuiteReport run_property_suite(const RandomInstanceSpec& spec, std::size_t count,
                               const SuiteOptions& options) {
  spec.validate();
  SuiteReport report;
  report.seed = spec.seed;
  report.count = count;
  if (count == 0) return report;
  Recorder rec(options);
  for (std::size_t i = 0; i < count; ++i) {
    RandomInstanceSpec instance_spec = spec;
    instance_spec.seed = instance_seed(spec.seed, i);
    const auto inst = generate_instance(instance_spec);
    run_instance_checks(inst, i, i < options.entropy_instances, options, rec);
  }
  run_scalar_checks(spec.seed, options, rec);
  report.checks = rec.take();
  return report;
}

}  // namespace bic::harness
