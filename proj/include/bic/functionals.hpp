#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "bic/core_space.hpp"

namespace bic {

// ---------------------------------------------------------------------------
// Interaction functionals
// ---------------------------------------------------------------------------

/// Controls the supremum over configurations in J and J_mu. Up to `exact_cap`
/// configurations the supremum is found by exhaustive enumeration; above it a
/// multi-start greedy coordinate ascent is used and results carry the
/// `approximate` flag.
struct InteractionOptions {
  std::size_t exact_cap = kDefaultConfigurationCap;
  std::size_t restarts = 16;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

/// Value of a supremum over configurations and where it was attained
/// (smallest enumeration index among ties).
struct ConfigurationSup {
  double value = 0.0;
  Configuration argmax;
  bool approximate = false;
};

struct InteractionReport {
  double j = 0.0;
  double j_mu = 0.0;
  double crude = 0.0;
  Configuration argmax_config;
  bool approximate = false;
};

/// J(f)^2 = sup_x sum over ordered pairs k != l of
///          sup_{y,y',z,z'} (D^l_{z,z'} D^k_{y,y'} f)^2(x).
/// Returns the supremum of the squared quantity together with its argmax.
ConfigurationSup interaction_j_squared(const TabulatedFunction& f,
                                       const InteractionOptions& options = {});
double interaction_j(const TabulatedFunction& f, const InteractionOptions& options = {});

/// J_mu(f) = 2 (sup_x sum_l sup_z sum_{k != l} sigma_k^2(f - S_z^l f)(x))^{1/2}.
ConfigurationSup interaction_j_mu_inner(const TabulatedFunction& f,
                                        const InteractionOptions& options = {});
double interaction_j_mu(const TabulatedFunction& f, const InteractionOptions& options = {});

/// n times the largest (signed) mixed second difference over k != l, all
/// configurations and point pairs. Upper-bounds J.
double crude_interaction_bound(const TabulatedFunction& f);

InteractionReport interaction_report(const TabulatedFunction& f,
                                     const InteractionOptions& options = {});
nlohmann::json to_json(const InteractionReport& report);

// ---------------------------------------------------------------------------
// Gibbs states and entropy
// ---------------------------------------------------------------------------

/// The tilted expectation E_{beta f}[g] = E[g e^{beta f}] / Z_{beta f}.
class GibbsState {
 public:
  GibbsState(TabulatedFunction f, double beta);

  const TabulatedFunction& function() const { return f_; }
  double beta() const { return beta_; }
  /// ln Z_{beta f}, computed with a max shift.
  double log_z() const { return log_z_; }
  /// Normalized tilted probability of each configuration.
  const std::vector<double>& tilted() const { return tilted_; }

 private:
  TabulatedFunction f_;
  double beta_;
  double log_z_;
  std::vector<double> tilted_;
};

/// Requires beta >= 0.
GibbsState gibbs(const TabulatedFunction& f, double beta);
double gibbs_expectation(const GibbsState& state, const TabulatedFunction& g);
/// sigma^2_{beta f}[g] = E_{beta f}[(g - E_{beta f} g)^2].
double gibbs_variance(const GibbsState& state, const TabulatedFunction& g);

/// ln E[e^{beta (f - Ef)}] evaluated directly from the table.
double log_mgf_centered(const TabulatedFunction& f, double beta);

/// S_f(beta) = beta E_{beta f}[f] - ln Z_{beta f}, the KL divergence of the
/// tilted measure from mu. Evaluated on f - Ef, which leaves it unchanged and
/// avoids cancellation for small beta.
double entropy(const TabulatedFunction& f, double beta);

/// S_{k,f}(beta) = beta E_{k,beta f}[f] - ln Z_{k,beta f}; constant on k-fibers.
TabulatedFunction conditional_entropy(const TabulatedFunction& f, std::size_t k, double beta);

/// beta * int_0^beta S_f(g)/g^2 dg. The integrand tends to sigma^2(f)/2 at the
/// origin; [0, 1e-3] is covered by a trapezoid panel between that limit and
/// the first evaluated point, the rest by adaptive Simpson.
double herbst_log_mgf(const TabulatedFunction& f, double beta, double quad_tol = 1e-9);

/// int_0^beta int_t^beta sigma^2_{sf}[f] ds dt, computed in the equivalent
/// single-integral form int_0^beta s sigma^2_{sf}[f] ds.
double entropy_fluctuation(const TabulatedFunction& f, double beta, double quad_tol = 1e-9);

}  // namespace bic
