#include "bic/rls.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bic/errors.hpp"
#include "bic/summation.hpp"

namespace bic::rls {
namespace {

void check_point(const Vector& x, double y, std::size_t dim, const std::string& what) {
  if (static_cast<std::size_t>(x.size()) != dim) {
    throw PreconditionError(what + ": x has dimension " + std::to_string(x.size()) + ", expected " +
                            std::to_string(dim));
  }
  if (!x.allFinite() || !std::isfinite(y)) throw PreconditionError(what + ": non-finite value");
  if (x.norm() > 1.0 + 1e-12) throw PreconditionError(what + ": |x| exceeds 1");
  if (std::abs(y) > 1.0) throw PreconditionError(what + ": |y| exceeds 1");
}

Example interpolate(const Example& a, const Example& b, double tau) {
  return {(1.0 - tau) * a.x + tau * b.x, (1.0 - tau) * a.y + tau * b.y};
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Vector uniform_ball(Rng& rng, std::size_t dim) {
  Vector x(static_cast<Eigen::Index>(dim));
  do {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = uniform(rng, -1.0, 1.0);
  } while (x.squaredNorm() > 1.0);
  return x;
}

}  // namespace

void RlsProblem::validate() const {
  if (dim < 1) throw PreconditionError("rls: dim must be at least 1");
  if (!(lambda > 0.0 && lambda < 1.0)) throw PreconditionError("rls: lambda must lie in (0, 1)");
  if (sample.empty()) throw PreconditionError("rls: empty sample");
  for (std::size_t i = 0; i < sample.size(); ++i) {
    check_point(sample[i].x, sample[i].y, dim, "rls sample " + std::to_string(i));
  }
}

void Population::validate() const {
  if (atoms.empty()) throw PreconditionError("population: no atoms");
  CompensatedSum total;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    check_point(atoms[i].x, atoms[i].y, dim, "population atom " + std::to_string(i));
    if (!(atoms[i].p >= 0.0)) throw PreconditionError("population: negative probability");
    total.add(atoms[i].p);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) {
    throw PreconditionError("population: probabilities must sum to 1");
  }
}

std::size_t Population::draw_index(Rng& rng) const {
  std::vector<double> p(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) p[i] = atoms[i].p;
  return bic::draw_index(rng, p);
}

Example Population::draw(Rng& rng) const { return example(draw_index(rng)); }

RlsSolution solve(const RlsProblem& problem) {
  problem.validate();
  const auto d = static_cast<Eigen::Index>(problem.dim);
  const double inv_n = 1.0 / static_cast<double>(problem.n());
  RlsSolution s;
  s.gram = Matrix::Zero(d, d);
  s.moment = Vector::Zero(d);
  for (const auto& e : problem.sample) {
    s.gram.noalias() += e.x * e.x.transpose();
    s.moment += e.y * e.x;
  }
  s.gram *= inv_n;
  s.moment *= inv_n;
  const Matrix a = s.gram + problem.lambda * Matrix::Identity(d, d);
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalError("rls: Cholesky factorization failed");
  s.w = llt.solve(s.moment);
  const double scale = std::max(s.moment.norm(), 1e-300);
  s.residual = (a * s.w - s.moment).norm() / scale;
  if (s.moment.norm() == 0.0) s.residual = (a * s.w).norm();
  if (!(s.residual <= 1e-8)) {
    throw NumericalError("rls: linear solve residual " + std::to_string(s.residual) +
                         " exceeds 1e-8");
  }
  return s;
}

double residual_sum_of_squares(const RlsSolution& solution, const RlsProblem& problem) {
  CompensatedSum s;
  for (const auto& e : problem.sample) {
    const double r = solution.w.dot(e.x) - e.y;
    s.add(r * r);
  }
  return s.value();
}

double empirical_risk(const RlsSolution& solution, const RlsProblem& problem) {
  return residual_sum_of_squares(solution, problem) / static_cast<double>(problem.n());
}

double objective(const RlsSolution& solution, const RlsProblem& problem) {
  return empirical_risk(solution, problem) + problem.lambda * solution.w.squaredNorm();
}

double true_risk(const RlsSolution& solution, const Population& population) {
  population.validate();
  CompensatedSum s;
  for (const auto& a : population.atoms) {
    const double r = solution.w.dot(a.x) - a.y;
    s.add(a.p * r * r);
  }
  return s.value();
}

double generalization_gap(const RlsProblem& problem, const Population& population) {
  const auto sol = solve(problem);
  return true_risk(sol, population) - empirical_risk(sol, problem);
}

double stability_difference(const RlsProblem& problem, std::size_t k, const Example& replacement,
                            const Population& population) {
  if (k >= problem.n()) throw std::out_of_range("stability_difference: k out of range");
  RlsProblem moved = problem;
  moved.sample[k] = replacement;
  return generalization_gap(problem, population) - generalization_gap(moved, population);
}

DerivativeCheck derivative_bound_check(const RlsProblem& problem, std::size_t k, std::size_t l,
                                       const Example& zk0, const Example& zk1,
                                       const Example& zl0, const Example& zl1, std::size_t grid,
                                       double h) {
  problem.validate();
  if (k == l) throw PreconditionError("derivative_bound_check: k and l must differ");
  if (k >= problem.n() || l >= problem.n()) {
    throw std::out_of_range("derivative_bound_check: index out of range");
  }
  if (grid < 1) throw PreconditionError("derivative_bound_check: grid must be positive");
  if (!(h > 0.0 && 2.0 * h * grid <= 1.0)) {
    throw PreconditionError("derivative_bound_check: step leaves the unit square");
  }
  for (const Example* e : {&zk0, &zk1, &zl0, &zl1}) check_point(e->x, e->y, problem.dim, "endpoint");

  RlsProblem moved = problem;
  auto at = [&](double s, double t) {
    moved.sample[k] = interpolate(zk0, zk1, t);
    moved.sample[l] = interpolate(zl0, zl1, s);
    return solve(moved);
  };

  const double n = static_cast<double>(problem.n()), lam = problem.lambda;
  DerivativeCheck r;
  r.first_bound = 8.0 * std::pow(lam, -1.5) / n;
  r.mixed_bound = 32.0 * std::pow(lam, -2.5) / (n * n);
  r.b_bound = 4.0 / n;
  double first_disagreement = 0.0, mixed_disagreement = 0.0;

  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      const double s = (static_cast<double>(i) + 0.5) / static_cast<double>(grid);
      const double t = (static_cast<double>(j) + 0.5) / static_cast<double>(grid);
      double first[2], mixed[2];
      for (int level = 0; level < 2; ++level) {
        const double step = level == 0 ? h : h / 2.0;
        const auto tp = at(s, t + step), tm = at(s, t - step);
        const auto sp = at(s + step, t), sm = at(s - step, t);
        const auto pp = at(s + step, t + step), pm = at(s + step, t - step);
        const auto mp = at(s - step, t + step), mm = at(s - step, t - step);
        first[level] = std::max(((tp.w - tm.w) / (2.0 * step)).norm(),
                                ((sp.w - sm.w) / (2.0 * step)).norm());
        mixed[level] = ((pp.w - pm.w - mp.w + mm.w) / (4.0 * step * step)).norm();
        if (level == 0) {
          r.gram_derivative = std::max({r.gram_derivative,
                                        operator_norm((tp.gram - tm.gram) / (2.0 * step)),
                                        operator_norm((sp.gram - sm.gram) / (2.0 * step))});
          r.moment_derivative = std::max({r.moment_derivative,
                                          ((tp.moment - tm.moment) / (2.0 * step)).norm(),
                                          ((sp.moment - sm.moment) / (2.0 * step)).norm()});
          r.gram_mixed = std::max(
              r.gram_mixed,
              operator_norm((pp.gram - pm.gram - mp.gram + mm.gram) / (4.0 * step * step)));
        }
      }
      r.first_norm = std::max(r.first_norm, first[0]);
      r.mixed_norm = std::max(r.mixed_norm, mixed[0]);
      const double df = std::abs(first[0] - first[1]), dm = std::abs(mixed[0] - mixed[1]);
      first_disagreement = std::max(first_disagreement, df);
      mixed_disagreement = std::max(mixed_disagreement, dm);
      constexpr double kFirstFloor = 1e-8, kMixedFloor = 1e-5;
      if ((std::max(first[0], first[1]) > kFirstFloor && df > 0.1 * std::max(first[0], first[1])) ||
          (std::max(mixed[0], mixed[1]) > kMixedFloor && dm > 0.1 * std::max(mixed[0], mixed[1]))) {
        r.step_unstable = true;
      }
    }
  }
  r.first_tolerance = 2.0 * first_disagreement + 1e-8;
  r.mixed_tolerance = 2.0 * mixed_disagreement + 1e-6;
  return r;
}

double theorem6_bound(double e_scv, std::size_t n, double lambda, double c, double t) {
  if (!(e_scv >= 0.0 && n >= 1 && lambda > 0.0 && c > 0.0 && t > 0.0)) {
    throw PreconditionError("theorem6_bound: arguments must be positive");
  }
  const double nn = static_cast<double>(n);
  return std::exp(-nn * t * t / (2.0 * nn * e_scv + c * std::pow(lambda, -3.0) * t));
}

double theorem6_deviation(double e_scv, std::size_t n, double lambda, double c, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("theorem6_deviation: delta in (0, 1)");
  const double log_inv = -std::log(delta);
  // n t^2 = L (2 n e + a t) with a = c lambda^{-3}.
  const double a = c * std::pow(lambda, -3.0) * log_inv / static_cast<double>(n);
  return 0.5 * (a + std::sqrt(a * a + 8.0 * e_scv * log_inv));
}

double theorem6_deviation_simple(double e_scv, std::size_t n, double lambda, double c,
                                 double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("theorem6_deviation: delta in (0, 1)");
  const double log_inv = -std::log(delta);
  return std::sqrt(2.0 * e_scv * log_inv) +
         c * std::pow(lambda, -3.0) * log_inv / static_cast<double>(n);
}

ScvEstimate empirical_scv(const Population& population, std::size_t n, double lambda,
                          std::size_t replications, std::uint64_t seed) {
  population.validate();
  if (replications < 1) throw PreconditionError("empirical_scv: replications must be positive");
  std::vector<double> values(replications);
  for (std::size_t r = 0; r < replications; ++r) {
    Rng rng = make_stream(seed, r);
    RlsProblem problem{population.dim, lambda, {}};
    for (std::size_t i = 0; i < n; ++i) problem.sample.push_back(population.draw(rng));
    CompensatedSum total;
    for (std::size_t k = 0; k < n; ++k) {
      const Example a = population.draw(rng), b = population.draw(rng);
      RlsProblem pa = problem, pb = problem;
      pa.sample[k] = a;
      pb.sample[k] = b;
      const double d = generalization_gap(pa, population) - generalization_gap(pb, population);
      total.add(0.5 * d * d);
    }
    values[r] = total.value();
  }
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  ScvEstimate e;
  e.replications = replications;
  e.mean = sum.value() / static_cast<double>(replications);
  if (replications > 1) {
    CompensatedSum sq;
    for (double v : values) sq.add((v - e.mean) * (v - e.mean));
    e.stderr_ = std::sqrt(sq.value() / static_cast<double>(replications - 1) /
                          static_cast<double>(replications));
  }
  return e;
}

TabulatedFunction gap_function(const Population& population, std::size_t n, double lambda,
                               std::size_t cap) {
  population.validate();
  std::vector<double> p(population.atoms.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = population.atoms[i].p;
  auto space = FiniteProductSpace::make(std::vector<FiniteAxis>(n, FiniteAxis(p)), cap);
  RlsProblem problem{population.dim, lambda, std::vector<Example>(n)};
  return TabulatedFunction::from(space, [&](const Configuration& c) {
    for (std::size_t i = 0; i < n; ++i) problem.sample[i] = population.example(c[i]);
    return generalization_gap(problem, population);
  });
}

Example random_example(Rng& rng, std::size_t dim) {
  Example e;
  e.x = uniform_ball(rng, dim);
  e.y = uniform(rng, -1.0, 1.0);
  return e;
}

RlsProblem random_problem(Rng& rng, std::size_t dim, std::size_t n, double lambda) {
  RlsProblem p{dim, lambda, {}};
  for (std::size_t i = 0; i < n; ++i) p.sample.push_back(random_example(rng, dim));
  return p;
}

Population random_population(Rng& rng, std::size_t dim, std::size_t atoms) {
  Population pop{dim, {}};
  const auto p = dirichlet_weights(rng, atoms);
  for (std::size_t i = 0; i < atoms; ++i) {
    auto e = random_example(rng, dim);
    pop.atoms.push_back({std::move(e.x), e.y, p[i]});
  }
  return pop;
}

Setup setup_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw PreconditionError("rls setup: expected an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "dim" && key != "lambda" && key != "population" && key != "n") {
      throw PreconditionError("rls setup: unknown field '" + key + "'");
    }
  }
  for (const char* key : {"dim", "lambda", "population", "n"}) {
    if (!doc.contains(key)) throw PreconditionError(std::string("rls setup: missing field '") + key + "'");
  }
  Setup s;
  s.dim = doc.at("dim").get<std::size_t>();
  s.lambda = doc.at("lambda").get<double>();
  s.n = doc.at("n").get<std::size_t>();
  s.population.dim = s.dim;
  for (const auto& atom : doc.at("population")) {
    for (const auto& [key, _] : atom.items()) {
      if (key != "x" && key != "y" && key != "p") {
        throw PreconditionError("rls setup: unknown atom field '" + key + "'");
      }
    }
    const auto x = atom.at("x").get<std::vector<double>>();
    Atom a;
    a.x = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
    a.y = atom.at("y").get<double>();
    a.p = atom.at("p").get<double>();
    s.population.atoms.push_back(std::move(a));
  }
  if (!(s.lambda > 0.0 && s.lambda < 1.0)) throw PreconditionError("rls setup: lambda must lie in (0, 1)");
  if (s.n < 2) throw PreconditionError("rls setup: n must be at least 2");
  s.population.validate();
  return s;
}

nlohmann::json setup_to_json(const Setup& setup) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : setup.population.atoms) {
    atoms.push_back({{"x", std::vector<double>(a.x.data(), a.x.data() + a.x.size())},
                     {"y", a.y},
                     {"p", a.p}});
  }
  return {{"dim", setup.dim}, {"lambda", setup.lambda}, {"population", atoms}, {"n", setup.n}};
}

}  // namespace bic::rls
