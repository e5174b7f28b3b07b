#include "bic/quadrature.hpp"

#include <cmath>
#include <string>

#include "bic/errors.hpp"

namespace bic {
namespace {

struct Panel {
  double a, fa, m, fm, b, fb, whole;
};

class Integrator {
 public:
  Integrator(const std::function<double(double)>& fn, const QuadratureOptions& opt)
      : fn_(fn), opt_(opt) {}

  double eval(double x) {
    if (++evaluations_ > opt_.max_evaluations) {
      throw QuadratureError("adaptive_simpson: evaluation budget exhausted");
    }
    const double y = fn_(x);
    if (!std::isfinite(y)) throw QuadratureError("adaptive_simpson: non-finite integrand");
    return y;
  }

  Panel make(double a, double fa, double b, double fb) {
    const double m = 0.5 * (a + b);
    const double fm = eval(m);
    return {a, fa, m, fm, b, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb)};
  }

  double recurse(const Panel& p, double tol, int depth) {
    const Panel left = make(p.a, p.fa, p.m, p.fm);
    const Panel right = make(p.m, p.fm, p.b, p.fb);
    const double delta = left.whole + right.whole - p.whole;
    if (std::abs(delta) <= 15.0 * tol) {
      error_ += std::abs(delta) / 15.0;
      return left.whole + right.whole + delta / 15.0;
    }
    if (depth >= opt_.max_depth) {
      throw QuadratureError("adaptive_simpson: no convergence on [" + std::to_string(p.a) +
                            ", " + std::to_string(p.b) + "]");
    }
    return recurse(left, 0.5 * tol, depth + 1) + recurse(right, 0.5 * tol, depth + 1);
  }

  std::size_t evaluations() const { return evaluations_; }
  double error() const { return error_; }

 private:
  const std::function<double(double)>& fn_;
  const QuadratureOptions& opt_;
  std::size_t evaluations_ = 0;
  double error_ = 0.0;
};

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& fn, double a, double b,
                                  const QuadratureOptions& options) {
  if (a == b) return {};
  Integrator integ(fn, options);
  const Panel whole = integ.make(a, integ.eval(a), b, integ.eval(b));
  const double value = integ.recurse(whole, options.abs_tol, 0);
  return {value, integ.error(), integ.evaluations()};
}

}  // namespace bic
